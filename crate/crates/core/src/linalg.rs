//! The discrete Dirichlet Laplacian on interior nodes and its banded
//! Cholesky factorization, used as the Sobolev-gradient preconditioner.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::mesh::{GridFunction, Mesh};

/// Symmetric positive definite band matrix, lower band stored row-wise:
/// entry `(i, j)` with `i − bw ≤ j ≤ i` lives at `i·(bw+1) + (j + bw − i)`.
#[derive(Debug, Clone)]
struct Band {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl Band {
    fn zeros(n: usize, bw: usize) -> Self {
        Band {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.bw + 1) + (j + self.bw - i)
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.bw {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            for j in lo..=i {
                let a = self.data[self.idx(i, j)];
                y[i] += a * x[j];
                if j != i {
                    y[j] += a * x[i];
                }
            }
        }
        y
    }

    /// In-place `L Lᵀ` factorization.
    fn cholesky(mut self) -> Result<Band> {
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            for j in lo..=i {
                let mut s = self.data[self.idx(i, j)];
                let klo = lo.max(j.saturating_sub(self.bw));
                for k in klo..j {
                    s -= self.data[self.idx(i, k)] * self.data[self.idx(j, k)];
                }
                let k = self.idx(i, j);
                if i == j {
                    if !(s > 0.0) {
                        return Err(Error::InvalidArgument("stiffness matrix is not positive definite".into()));
                    }
                    self.data[k] = s.sqrt();
                } else {
                    self.data[k] = s / self.data[self.idx(j, j)];
                }
            }
        }
        Ok(self)
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut y = b.to_vec();
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            let mut s = y[i];
            for k in lo..i {
                s -= self.data[self.idx(i, k)] * y[k];
            }
            y[i] = s / self.data[self.idx(i, i)];
        }
        for i in (0..self.n).rev() {
            let hi = (i + self.bw).min(self.n - 1);
            let mut s = y[i];
            for k in i + 1..=hi {
                s -= self.data[self.idx(k, i)] * y[k];
            }
            y[i] = s / self.data[self.idx(i, i)];
        }
        y
    }
}

/// Stiffness matrix `K_ij = ∫∇φ_i·∇φ_j` on interior nodes with its factor.
#[derive(Debug, Clone)]
pub struct Laplacian {
    interior: Vec<usize>,
    slots: Vec<Option<usize>>,
    stiffness: Band,
    factor: Band,
}

impl Laplacian {
    pub fn new(mesh: &Mesh) -> Result<Self> {
        let interior = mesh.interior_nodes().to_vec();
        let slots: Vec<Option<usize>> = (0..mesh.node_count()).map(|i| mesh.interior_slot(i)).collect();
        let mut bw = 0;
        for el in mesh.elements() {
            for &a in el.vertices() {
                for &b in el.vertices() {
                    if let (Some(i), Some(j)) = (slots[a], slots[b]) {
                        bw = bw.max(i.abs_diff(j));
                    }
                }
            }
        }
        let mut k = Band::zeros(interior.len(), bw);
        for el in mesh.elements() {
            for a in 0..el.vertex_count {
                for b in 0..=a {
                    if let (Some(i), Some(j)) = (slots[el.nodes[a]], slots[el.nodes[b]]) {
                        let v = el.measure
                            * (el.grad[a][0] * el.grad[b][0] + el.grad[a][1] * el.grad[b][1]);
                        k.add(i, j, v);
                    }
                }
            }
        }
        let factor = k.clone().cholesky()?;
        Ok(Laplacian {
            interior,
            slots,
            stiffness: k,
            factor,
        })
    }

    pub fn interior_count(&self) -> usize {
        self.interior.len()
    }

    /// Bandwidth of the stiffness matrix in interior ordering.
    pub fn bandwidth(&self) -> usize {
        self.stiffness.bw
    }

    pub(crate) fn restrict(&self, u: &[f64]) -> Vec<f64> {
        self.interior.iter().map(|&i| u[i]).collect()
    }

    pub(crate) fn extend(&self, x: &[f64]) -> Vec<f64> {
        let mut u = vec![0.0; self.slots.len()];
        for (k, &i) in self.interior.iter().enumerate() {
            u[i] = x[k];
        }
        u
    }

    /// `K⁻¹ g`: the Sobolev gradient (Riesz representative in `H¹₀`) of an
    /// assembled nodal gradient. Boundary entries of `g` are ignored.
    pub fn solve(&self, g: &[f64]) -> Vec<f64> {
        self.extend(&self.factor.solve(&self.restrict(g)))
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        self.extend(&self.stiffness.mul(&self.restrict(u)))
    }

    /// `∫∇u·∇v` for nodal fields.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        let ku = self.stiffness.mul(&self.restrict(u));
        ku.iter().zip(&self.restrict(v)).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self, u: &[f64]) -> f64 {
        self.inner(u, u).max(0.0).sqrt()
    }

    pub fn precondition(&self, g: &GridFunction) -> GridFunction {
        GridFunction::from_vec(self.solve(g.values()))
    }

    /// Dense copy of the interior stiffness matrix.
    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.interior.len();
        DMatrix::from_fn(n, n, |i, j| self.stiffness.get(i, j))
    }
}

use nalgebra::SymmetricEigen;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::{rng_for, scale, SolverConfig};
use crate::energy::Problem;
use crate::error::{Error, Result};
use crate::linalg::Laplacian;
use crate::mesh::GridFunction;
use crate::modular;

/// Nested subspaces built from the first `K` discrete Dirichlet eigenvectors:
/// `Y_k = span(b_1..b_k)` and `Z_k = span(b_k..b_K)`.
#[derive(Debug, Clone, Serialize)]
pub struct SubspaceLadder {
    /// Basis fields, ascending eigenvalue, normalized to `∫|∇b|² = 1` with a
    /// positive first significant interior value.
    #[serde(skip)]
    pub basis: Vec<GridFunction>,
    /// Eigenvalues of the discrete Laplacian (≈ `(kπ)²` on the unit interval).
    pub eigenvalues: Vec<f64>,
    /// `α_k ≈ sup{|u|_{L^{q(x)}} : u ∈ Z_k, ‖u‖ = 1}`, from random samples.
    pub alpha: Vec<f64>,
    /// Condition number of the Euclidean Gram matrix of the basis.
    pub gram_condition: f64,
}

impl SubspaceLadder {
    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    /// Basis of `Y_k` (1-based `k`).
    pub fn y(&self, k: usize) -> &[GridFunction] {
        &self.basis[..k.min(self.basis.len())]
    }

    /// Basis of `Z_k` (1-based `k`).
    pub fn z(&self, k: usize) -> &[GridFunction] {
        &self.basis[k.saturating_sub(1).min(self.basis.len())..]
    }
}

pub fn build_subspace_ladder(prob: &Problem, k: usize, cfg: &SolverConfig) -> Result<SubspaceLadder> {
    let mesh = prob.mesh();
    let lap = Laplacian::new(mesh)?;
    let n = lap.interior_count();
    if k == 0 || k > n {
        return Err(Error::LadderTooLarge {
            requested: k,
            available: n,
        });
    }
    let eig = SymmetricEigen::new(lap.dense());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut basis = Vec::with_capacity(k);
    let mut eigenvalues = Vec::with_capacity(k);
    for &c in order.iter().take(k) {
        let col: Vec<f64> = eig.eigenvectors.column(c).iter().copied().collect();
        let mut b = lap.extend(&col);
        let norm = lap.norm(&b);
        let peak = b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let first = b.iter().copied().find(|x| x.abs() > 1e-6 * peak).unwrap_or(1.0);
        let s = first.signum() / norm;
        b.iter_mut().for_each(|x| *x *= s);
        basis.push(GridFunction::from_vec(b));
        eigenvalues.push(eig.eigenvalues[c] / mesh.cell_measure());
    }

    let gram = nalgebra::DMatrix::from_fn(k, k, |i, j| basis[i].dot(&basis[j]));
    let ge = SymmetricEigen::new(gram).eigenvalues;
    let (gmin, gmax) = ge
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let gram_condition = if gmin > 0.0 { gmax / gmin } else { f64::INFINITY };

    // sample Z_K first and widen, so that the running maximum is nested
    let mut rng = rng_for(cfg.seed, 2);
    let mut alpha = vec![0.0; k];
    let mut running = 0.0f64;
    for level in (0..k).rev() {
        for _ in 0..cfg.alpha_samples.max(1) {
            let mut u = vec![0.0; mesh.node_count()];
            for b in &basis[level..] {
                let c: f64 = rng.sample(StandardNormal);
                u.iter_mut().zip(b.values()).for_each(|(x, y)| *x += c * y);
            }
            let gf = GridFunction::from_vec(u);
            let nu = prob.norm(&gf)?;
            if nu == 0.0 {
                continue;
            }
            let unit = GridFunction::from_vec(scale(gf.values(), 1.0 / nu));
            let lq = modular::luxemburg_norm(mesh, &unit, prob.q())?.value;
            running = running.max(lq);
        }
        alpha[level] = running;
    }

    Ok(SubspaceLadder {
        basis,
        eigenvalues,
        alpha,
        gram_condition,
    })
}

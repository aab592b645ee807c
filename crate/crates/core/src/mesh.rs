//! Uniform tensor meshes on intervals and rectangles.
//!
//! Unknowns live on mesh nodes; gradients and quadrature live on elements.
//! In one dimension an element is a cell. In two dimensions every rectangular
//! cell is split along its lower-left to upper-right diagonal into two
//! triangles, so that the piecewise-linear gradient is constant per element
//! and has no spurious zero-energy (checkerboard) modes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Quadrature element: a cell in 1-D, a triangle in 2-D.
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    /// Vertex node indices; only the first `vertex_count` entries are used.
    pub nodes: [usize; 3],
    pub vertex_count: usize,
    /// `grad[k][d]` is the weight of vertex `k` in the `d`-th partial derivative.
    pub grad: [[f64; 2]; 3],
    pub centroid: [f64; 2],
    pub measure: f64,
}

impl Element {
    pub fn vertices(&self) -> &[usize] {
        &self.nodes[..self.vertex_count]
    }

    /// Constant gradient of the nodal interpolant of `values` on this element.
    #[inline]
    pub fn gradient_of(&self, values: &[f64]) -> [f64; 2] {
        let mut g = [0.0; 2];
        for k in 0..self.vertex_count {
            let u = values[self.nodes[k]];
            g[0] += self.grad[k][0] * u;
            g[1] += self.grad[k][1] * u;
        }
        g
    }

    /// Mean of the vertex values (the element midpoint value of the interpolant).
    #[inline]
    pub fn average_of(&self, values: &[f64]) -> f64 {
        let mut s = 0.0;
        for &n in self.vertices() {
            s += values[n];
        }
        s / self.vertex_count as f64
    }
}

/// Box and per-axis cell counts; the serialized form used by configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub cells: Vec<usize>,
}

impl MeshSpec {
    pub fn build(&self) -> Result<Mesh> {
        Mesh::new(&self.lower, &self.upper, &self.cells)
    }
}

/// Uniform tensor mesh in one or two dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    dim: usize,
    lower: [f64; 2],
    upper: [f64; 2],
    cells: [usize; 2],
    spacing: [f64; 2],
    coords: Vec<[f64; 2]>,
    boundary: Vec<usize>,
    interior: Vec<usize>,
    interior_slot: Vec<Option<usize>>,
    elements: Vec<Element>,
}

impl Mesh {
    /// Builds a mesh on the box `lower × upper` with `cells[d]` cells along axis `d`.
    ///
    /// Nodes are ordered lexicographically with the first axis running fastest.
    pub fn new(lower: &[f64], upper: &[f64], cells: &[usize]) -> Result<Self> {
        let dim = cells.len();
        if !(1..=2).contains(&dim) || lower.len() != dim || upper.len() != dim {
            return Err(Error::DegenerateBox(format!(
                "dimension must be 1 or 2 with matching bounds (got {}, {}, {})",
                lower.len(),
                upper.len(),
                dim
            )));
        }
        for d in 0..dim {
            let (a, b) = (lower[d], upper[d]);
            if !a.is_finite() || !b.is_finite() || b - a <= 0.0 {
                return Err(Error::DegenerateBox(format!("axis {d}: [{a}, {b}]")));
            }
            if cells[d] < 2 {
                return Err(Error::DegenerateBox(format!(
                    "axis {d}: need at least 2 cells, got {}",
                    cells[d]
                )));
            }
        }
        let mut lo = [0.0; 2];
        let mut hi = [0.0; 2];
        let mut nc = [0; 2];
        let mut h = [1.0; 2];
        for d in 0..dim {
            lo[d] = lower[d];
            hi[d] = upper[d];
            nc[d] = cells[d];
            h[d] = (upper[d] - lower[d]) / cells[d] as f64;
        }
        let nx = nc[0] + 1;
        let ny = if dim == 2 { nc[1] + 1 } else { 1 };
        let coord = |d: usize, i: usize| -> f64 {
            // exact endpoints, no accumulated drift
            if i == nc[d] {
                hi[d]
            } else {
                lo[d] + i as f64 * h[d]
            }
        };

        let mut coords = Vec::with_capacity(nx * ny);
        let mut boundary = Vec::new();
        let mut interior = Vec::new();
        let mut interior_slot = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let y = if dim == 2 { coord(1, j) } else { 0.0 };
                coords.push([coord(0, i), y]);
                let on_face = i == 0 || i == nc[0] || (dim == 2 && (j == 0 || j == nc[1]));
                let id = j * nx + i;
                if on_face {
                    boundary.push(id);
                    interior_slot.push(None);
                } else {
                    interior_slot.push(Some(interior.len()));
                    interior.push(id);
                }
            }
        }

        let mut elements = Vec::new();
        if dim == 1 {
            for i in 0..nc[0] {
                elements.push(Element {
                    nodes: [i, i + 1, 0],
                    vertex_count: 2,
                    grad: [[-1.0 / h[0], 0.0], [1.0 / h[0], 0.0], [0.0, 0.0]],
                    centroid: [0.5 * (coords[i][0] + coords[i + 1][0]), 0.0],
                    measure: h[0],
                });
            }
        } else {
            let (hx, hy) = (h[0], h[1]);
            let area = 0.5 * hx * hy;
            for j in 0..nc[1] {
                for i in 0..nc[0] {
                    let a = j * nx + i;
                    let b = a + 1;
                    let c = a + nx + 1;
                    let d = a + nx;
                    let (x0, y0) = (coords[a][0], coords[a][1]);
                    // lower-right triangle a, b, c
                    elements.push(Element {
                        nodes: [a, b, c],
                        vertex_count: 3,
                        grad: [[-1.0 / hx, 0.0], [1.0 / hx, -1.0 / hy], [0.0, 1.0 / hy]],
                        centroid: [x0 + 2.0 * hx / 3.0, y0 + hy / 3.0],
                        measure: area,
                    });
                    // upper-left triangle a, c, d
                    elements.push(Element {
                        nodes: [a, c, d],
                        vertex_count: 3,
                        grad: [[0.0, -1.0 / hy], [1.0 / hx, 0.0], [-1.0 / hx, 1.0 / hy]],
                        centroid: [x0 + hx / 3.0, y0 + 2.0 * hy / 3.0],
                        measure: area,
                    });
                }
            }
        }

        Ok(Mesh {
            dim,
            lower: lo,
            upper: hi,
            cells: nc,
            spacing: h,
            coords,
            boundary,
            interior,
            interior_slot,
            elements,
        })
    }

    pub fn interval(a: f64, b: f64, cells: usize) -> Result<Self> {
        Mesh::new(&[a], &[b], &[cells])
    }

    pub fn rectangle(lower: [f64; 2], upper: [f64; 2], cells: [usize; 2]) -> Result<Self> {
        Mesh::new(&lower, &upper, &cells)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells[..self.dim]
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower[..self.dim]
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper[..self.dim]
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing[..self.dim]
    }

    /// Measure of one tensor cell, `h_1 ⋯ h_N`.
    pub fn cell_measure(&self) -> f64 {
        self.spacing().iter().product()
    }

    /// Measure of the whole box.
    pub fn measure(&self) -> f64 {
        (0..self.dim).map(|d| self.upper[d] - self.lower[d]).product()
    }

    pub fn node_count(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn node(&self, i: usize) -> [f64; 2] {
        self.coords[i]
    }

    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary
    }

    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        self.interior_slot[i].is_none()
    }

    /// Position of node `i` in [`Mesh::interior_nodes`], if interior.
    pub fn interior_slot(&self, i: usize) -> Option<usize> {
        self.interior_slot[i]
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    pub(crate) fn check_nodal(&self, len: usize) -> Result<()> {
        if len != self.node_count() {
            return Err(Error::MeshMismatch {
                expected: self.node_count(),
                found: len,
            });
        }
        Ok(())
    }
}

/// Real scalar field sampled at mesh nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    values: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(mesh: &Mesh) -> Self {
        GridFunction {
            values: vec![0.0; mesh.node_count()],
        }
    }

    pub fn from_fn(mesh: &Mesh, f: impl Fn(&[f64; 2]) -> f64) -> Self {
        GridFunction {
            values: mesh.coords().iter().map(f).collect(),
        }
    }

    pub fn from_values(mesh: &Mesh, values: Vec<f64>) -> Result<Self> {
        mesh.check_nodal(values.len())?;
        if let Some(node) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { node });
        }
        Ok(GridFunction { values })
    }

    /// Unchecked constructor for internal arithmetic on already-validated data.
    pub(crate) fn from_vec(values: Vec<f64>) -> Self {
        GridFunction { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn scaled(&self, t: f64) -> Self {
        GridFunction::from_vec(self.values.iter().map(|v| t * v).collect())
    }

    /// `self + t·other`.
    pub fn axpy(&self, t: f64, other: &GridFunction) -> Self {
        GridFunction::from_vec(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + t * b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &GridFunction) -> Self {
        self.axpy(-1.0, other)
    }

    pub fn dot(&self, other: &GridFunction) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Discrete L² norm with nodal weights equal to the cell measure.
    pub fn l2_norm(&self, mesh: &Mesh) -> f64 {
        (mesh.cell_measure() * self.dot(self)).sqrt()
    }
}

/// Field with `arity` components per element (gradients, element samples).
#[derive(Debug, Clone, PartialEq)]
pub struct CellField {
    arity: usize,
    values: Vec<f64>,
}

impl CellField {
    pub fn new(arity: usize, values: Vec<f64>) -> Self {
        debug_assert!(arity > 0 && values.len() % arity == 0);
        CellField { arity, values }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.arity
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, e: usize) -> &[f64] {
        &self.values[e * self.arity..(e + 1) * self.arity]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Component `d` of every element as a scalar cell field.
    pub fn component(&self, d: usize) -> Vec<f64> {
        self.values.iter().skip(d).step_by(self.arity).copied().collect()
    }
}

/// Per-element constant gradient of the nodal interpolant.
pub fn gradient(mesh: &Mesh, u: &GridFunction) -> Result<CellField> {
    mesh.check_nodal(u.len())?;
    let dim = mesh.dim();
    let mut out = Vec::with_capacity(mesh.element_count() * dim);
    for el in mesh.elements() {
        let g = el.gradient_of(u.values());
        out.extend_from_slice(&g[..dim]);
    }
    Ok(CellField::new(dim, out))
}

/// Element averages of a nodal field.
pub fn element_averages(mesh: &Mesh, u: &GridFunction) -> Vec<f64> {
    mesh.elements().iter().map(|el| el.average_of(u.values())).collect()
}

/// `Σ_e value_e · |e|` over the elements, in element order.
pub fn integrate(mesh: &Mesh, field: &[f64]) -> Result<f64> {
    if field.len() != mesh.element_count() {
        return Err(Error::MeshMismatch {
            expected: mesh.element_count(),
            found: field.len(),
        });
    }
    Ok(mesh
        .elements()
        .iter()
        .zip(field)
        .map(|(el, v)| v * el.measure)
        .sum())
}

/// Copy of `u` with every boundary node set to zero.
pub fn enforce_zero_trace(mesh: &Mesh, u: &GridFunction) -> GridFunction {
    let mut values = u.values().to_vec();
    for &b in mesh.boundary_nodes() {
        values[b] = 0.0;
    }
    GridFunction::from_vec(values)
}

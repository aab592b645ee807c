//! Critical-point solvers for the discrete energy: mountain pass, the
//! symmetric multi-solution (fountain) search and the Rayleigh-quotient
//! machinery for the parameterized problem `−div(A∇u) = λ f(x,u)`.
//!
//! Every solver descends along Sobolev gradients: the assembled gradient is
//! preconditioned by the inverse discrete Dirichlet Laplacian and steps are
//! chosen by Armijo backtracking.

mod descent;
mod fountain;
mod geometry;
mod ladder;
mod mountain_pass;
mod newton;
mod rayleigh;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::energy::{self, EnergyBreakdown, Part, Problem};
use crate::linalg::Laplacian;
use crate::mesh::{GridFunction, Mesh};

pub use fountain::{count_sign_changes, fountain_search, FountainFailure, FountainResult, FountainSolution};
pub use geometry::{verify_mp_geometry, MPGeometry};
pub use ladder::{build_subspace_ladder, SubspaceLadder};
pub use mountain_pass::mountain_pass_solve;
pub use rayleigh::{
    global_minimize_at_lambda, lambda1_minimize, rayleigh_quotient, Lambda1Result, SweepPoint, J_FLOOR,
};

/// Solver settings. Every field has a default, so configs only list overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Stopping tolerance on the gradient norm; `None` means `1e-8` in 1-D
    /// and `1e-6` in 2-D.
    pub grad_tol: Option<f64>,
    /// Sobolev norm below which a solution counts as the zero function.
    pub nontrivial_tol: f64,
    /// Relative L² distance under which two solutions (up to sign) coincide.
    pub dedup_tol: f64,
    /// Energy level below which a ray probe declares `E_λ` unbounded below.
    pub coercivity_cap: f64,
    pub max_iter: usize,
    pub armijo_c: f64,
    pub armijo_shrink: f64,
    /// Points on the discretized mountain-pass path.
    pub path_points: usize,
    /// Outer iterations between path re-relaxations.
    pub relax_every: usize,
    /// Random sphere directions used by the geometry check.
    pub sphere_samples: usize,
    /// Largest scaling tried when looking for a negative-energy valley point.
    pub t_max: f64,
    pub ladder_size: usize,
    /// Random samples per level when estimating `α_k`.
    pub alpha_samples: usize,
    /// Norm levels of the `λ₁` scale sweep, log-spaced over `[1e-3, 1e3]`.
    pub lambda1_scales: usize,
    pub lambda1_starts: usize,
    pub lambda1_iter: usize,
    pub minimize_starts: usize,
    /// Keep every iterate in the report (for Palais–Smale diagnostics).
    pub record_iterates: bool,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            grad_tol: None,
            nontrivial_tol: 1e-6,
            dedup_tol: 1e-3,
            coercivity_cap: 1e6,
            max_iter: 100_000,
            armijo_c: 1e-4,
            armijo_shrink: 0.5,
            path_points: 33,
            relax_every: 10,
            sphere_samples: 64,
            t_max: 1e12,
            ladder_size: 6,
            alpha_samples: 64,
            lambda1_scales: 13,
            lambda1_starts: 3,
            lambda1_iter: 400,
            minimize_starts: 4,
            record_iterates: false,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn grad_tol_for(&self, mesh: &Mesh) -> f64 {
        self.grad_tol
            .unwrap_or(if mesh.dim() == 1 { 1e-8 } else { 1e-6 })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    MaxIter,
    DivergedToMinusInfinity,
    DegenerateZero,
}

/// One line of an energy trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub iter: usize,
    pub e0: f64,
    pub j: f64,
    pub total: f64,
    pub grad_norm: f64,
}

impl TraceRow {
    pub(crate) fn new(iter: usize, e: &EnergyBreakdown, grad_norm: f64) -> Self {
        TraceRow {
            iter,
            e0: e.e0,
            j: e.j,
            total: e.total,
            grad_norm,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub solution: GridFunction,
    pub energy: EnergyBreakdown,
    pub grad_norm: f64,
    pub iterations: usize,
    pub status: Status,
    pub trace: Vec<TraceRow>,
    /// Every iterate, when [`SolverConfig::record_iterates`] is set.
    pub iterates: Vec<GridFunction>,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }
}

/// Independent stream for one use of the run seed.
pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `K⁻¹ξ` for white noise `ξ` on interior nodes: a smooth random zero-trace field.
pub(crate) fn smooth_random_field(lap: &Laplacian, rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let noise: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
    lap.solve(&noise)
}

/// `K⁻¹1`, the discrete torsion function: positive, smooth, zero on the boundary.
pub(crate) fn torsion_field(lap: &Laplacian, mesh: &Mesh) -> Vec<f64> {
    lap.solve(&vec![mesh.cell_measure(); mesh.node_count()])
}

pub(crate) fn scale(v: &[f64], t: f64) -> Vec<f64> {
    v.iter().map(|x| t * x).collect()
}

pub(crate) fn axpy(u: &[f64], a: f64, z: &[f64]) -> Vec<f64> {
    u.iter().zip(z).map(|(x, y)| x + a * y).collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Whether a point with gradient norm `gn` counts as critical: `gn ≤ tol`,
/// or `gn ≤ tol·‖E₀′(u)‖` when the operator part of the gradient exceeds one
/// (round-off in the assembled gradient grows with it).
pub(crate) fn is_critical(prob: &Problem, u: &[f64], gn: f64, tol: f64) -> bool {
    if gn <= tol {
        return true;
    }
    let op = energy::grad_norm_of(prob.mesh(), &energy::assemble(prob, u, Part::Operator));
    gn <= tol * op.max(1.0)
}

/// Round-off allowance for energy comparisons at magnitude `e`.
#[inline]
pub(crate) fn slack(e: f64) -> f64 {
    1e-13 * (1.0 + e.abs())
}

//! Sobolev-gradient descent with Armijo backtracking.

use log::debug;

use super::{axpy, is_critical, dot, slack, SolveReport, SolverConfig, Status, TraceRow};
use crate::energy::{self, EnergyBreakdown, Part, Problem};
use crate::linalg::Laplacian;
use crate::mesh::GridFunction;

const MIN_STEP: f64 = 1e-18;
const MAX_STEP: f64 = 1e8;
/// Largest factor by which the parabolic step may exceed the accepted one.
const MAX_STRETCH: f64 = 4.0;

/// Minimizes `E` from `u0`.
///
/// Stops with `Converged` once the gradient norm reaches `tol`, with
/// `DivergedToMinusInfinity` when the energy drops below `−coercivity_cap`,
/// and with `MaxIter` when the budget is spent or the line search stalls.
pub(crate) fn minimize(
    prob: &Problem,
    lap: &Laplacian,
    u0: Vec<f64>,
    cfg: &SolverConfig,
    tol: f64,
    max_iter: usize,
) -> SolveReport {
    let mesh = prob.mesh();
    let mut u = u0;
    let mut e = energy::energy_unchecked(prob, &u);
    let mut trace = Vec::new();
    let mut iterates = Vec::new();
    let mut alpha = 1.0;
    let mut status = Status::MaxIter;
    let mut gn;
    let mut iter = 0;
    loop {
        let g = energy::assemble(prob, &u, Part::Total);
        gn = energy::grad_norm_of(mesh, &g);
        trace.push(TraceRow::new(iter, &e, gn));
        if cfg.record_iterates {
            iterates.push(GridFunction::from_vec(u.clone()));
        }
        if is_critical(prob, &u, gn, tol) {
            status = Status::Converged;
            break;
        }
        if e.total < -cfg.coercivity_cap {
            status = Status::DivergedToMinusInfinity;
            break;
        }
        if iter >= max_iter {
            break;
        }
        let z = lap.solve(&g);
        let slope = dot(&g, &z);
        let mut accepted = false;
        while alpha >= MIN_STEP {
            let cand = axpy(&u, -alpha, &z);
            let ec = energy::energy_unchecked(prob, &cand);
            if ec.total <= e.total - cfg.armijo_c * alpha * slope + slack(e.total) {
                (u, e) = refine(prob, &u, &z, slope, e.total, &mut alpha, cand, ec);
                accepted = true;
                break;
            }
            alpha *= cfg.armijo_shrink;
        }
        if !accepted {
            debug!("descent stalled at iteration {iter}, grad norm {gn:e}");
            break;
        }
        iter += 1;
    }
    SolveReport {
        solution: GridFunction::from_vec(u),
        energy: e,
        grad_norm: gn,
        iterations: iter,
        status,
        trace,
        iterates,
    }
}

/// Parabolic refinement of an accepted Armijo step: fits `E(u − a z)` through
/// the value and slope at `a = 0` and the value at `alpha`, and keeps the
/// vertex when it lowers the energy further. Updates `alpha` to the step taken.
#[allow(clippy::too_many_arguments)]
fn refine(
    prob: &Problem,
    u: &[f64],
    z: &[f64],
    slope: f64,
    e0: f64,
    alpha: &mut f64,
    cand: Vec<f64>,
    ec: EnergyBreakdown,
) -> (Vec<f64>, EnergyBreakdown) {
    let curv = ec.total - e0 + *alpha * slope;
    if curv > 0.0 {
        let a = (0.5 * slope * *alpha * *alpha / curv).min(MAX_STRETCH * *alpha).min(MAX_STEP);
        if a.is_finite() && a > 0.0 && (a - *alpha).abs() > 1e-3 * *alpha {
            let c2 = axpy(u, -a, z);
            let e2 = energy::energy_unchecked(prob, &c2);
            if e2.total < ec.total {
                *alpha = a;
                return (c2, e2);
            }
        }
    }
    (cand, ec)
}

//! The quotient `I(u)/J(u)`, its infimum `λ₁` over a sweep of norm levels,
//! and global minimization of `E_λ = I − λJ`.

use log::{debug, info};
use serde::Serialize;

use super::descent::minimize;
use super::{axpy, dot, rng_for, scale, slack, smooth_random_field, torsion_field, SolveReport, SolverConfig, Status, TraceRow};
use crate::energy::{self, Part, Problem};
use crate::error::{Error, Result};
use crate::linalg::Laplacian;
use crate::mesh::{GridFunction, Mesh};
use crate::model::log_space;
use crate::modular;

/// Reaction energies at or below this value make the quotient undefined.
pub const J_FLOOR: f64 = 1e-300;

const SCALE_MIN: f64 = 1e-3;
const SCALE_MAX: f64 = 1e3;
const MIN_STEP: f64 = 1e-18;

/// `I(u)/J(u)`.
pub fn rayleigh_quotient(prob: &Problem, u: &GridFunction) -> Result<f64> {
    let e = energy::energy(prob, u)?;
    if !(e.j > J_FLOOR) {
        return Err(Error::ZeroDenominator { value: e.j });
    }
    Ok(e.e0 / e.j)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    /// Norm level `‖u‖`.
    pub scale: f64,
    /// Smallest quotient found at that level.
    pub quotient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lambda1Result {
    /// Smallest quotient over every probed point.
    pub estimate: f64,
    /// Minimizer, unless the sweep is degenerate.
    #[serde(skip)]
    pub minimizer: Option<GridFunction>,
    /// The best quotient sits at an end of the sweep and the quotient varies
    /// by more than a factor of ten across it: no interior minimum was found.
    pub degenerate: bool,
    pub sweep: Vec<SweepPoint>,
    /// Least-squares slope of `log(quotient)` against `log(scale)`.
    pub log_log_slope: f64,
    /// Norm level of the best point.
    pub best_scale: f64,
    /// Number of quotient evaluations.
    pub probes: usize,
}

/// Gradient of the Sobolev norm `N(u) = Σ_d |∂_d u|_{p(x)}` as a nodal vector.
fn norm_gradient(prob: &Problem, u: &[f64]) -> Vec<f64> {
    let mesh = prob.mesh();
    let pe = prob.p().element_values();
    let grads: Vec<[f64; 2]> = mesh.elements().iter().map(|el| el.gradient_of(u)).collect();
    let mut out = vec![0.0; u.len()];
    for d in 0..mesh.dim() {
        let comp: Vec<f64> = grads.iter().map(|g| g[d]).collect();
        let Ok(nd) = modular::luxemburg_of_samples(mesh, &comp, prob.p()) else {
            continue;
        };
        let nd = nd.value;
        if nd == 0.0 {
            continue;
        }
        // ρ(∂_d u/N) = 1 differentiated implicitly
        let mut denom = 0.0;
        for (e, el) in mesh.elements().iter().enumerate() {
            let a = comp[e] / nd;
            if a != 0.0 {
                denom += el.measure * pe[e] * a.abs().powf(pe[e]);
            }
        }
        for (e, el) in mesh.elements().iter().enumerate() {
            let a = comp[e] / nd;
            if a == 0.0 {
                continue;
            }
            let w = el.measure * pe[e] * a.abs().powf(pe[e] - 1.0) * a.signum() / denom;
            for k in 0..el.vertex_count {
                out[el.nodes[k]] += w * el.grad[k][d];
            }
        }
    }
    for &b in mesh.boundary_nodes() {
        out[b] = 0.0;
    }
    out
}

fn norm_of(prob: &Problem, u: &[f64]) -> f64 {
    let mesh = prob.mesh();
    let mut total = 0.0;
    for d in 0..mesh.dim() {
        let comp: Vec<f64> = mesh.elements().iter().map(|el| el.gradient_of(u)[d]).collect();
        total += modular::luxemburg_of_samples(mesh, &comp, prob.p())
            .map(|n| n.value)
            .unwrap_or(f64::NAN);
    }
    total
}

fn retract(prob: &Problem, u: &[f64], level: f64) -> Option<Vec<f64>> {
    let n = norm_of(prob, u);
    (n > 0.0 && n.is_finite()).then(|| scale(u, level / n))
}

fn quotient_of(prob: &Problem, u: &[f64]) -> Option<f64> {
    let e = energy::energy_unchecked(prob, u);
    (e.j > J_FLOOR).then(|| e.e0 / e.j)
}

/// Projected Sobolev descent of the quotient on `{‖u‖ = level}`.
fn descend_on_sphere(
    prob: &Problem,
    lap: &Laplacian,
    u0: Vec<f64>,
    level: f64,
    iters: usize,
    cfg: &SolverConfig,
    probes: &mut usize,
    best: &mut (f64, Vec<f64>, f64),
) -> Option<(f64, Vec<f64>)> {
    let mut u = retract(prob, &u0, level)?;
    let mut q = quotient_of(prob, &u)?;
    *probes += 1;
    let mut alpha = 1.0;
    for _ in 0..iters {
        if q < best.0 {
            *best = (q, u.clone(), level);
        }
        let e = energy::energy_unchecked(prob, &u);
        let gi = energy::assemble(prob, &u, Part::Operator);
        let gj = energy::assemble(prob, &u, Part::Reaction);
        let gq: Vec<f64> = gi.iter().zip(&gj).map(|(a, b)| (a - q * b) / e.j).collect();
        // Sobolev gradient, projected onto the tangent space of the norm sphere
        let z = lap.solve(&gq);
        let gn = norm_gradient(prob, &u);
        let zn = lap.solve(&gn);
        let denom = dot(&gn, &zn);
        let z = if denom > 0.0 { axpy(&z, -dot(&gn, &z) / denom, &zn) } else { z };
        let slope = dot(&gq, &z);
        if !(slope > 1e-30 * (1.0 + q * q)) {
            break;
        }
        let mut accepted = None;
        while alpha >= MIN_STEP {
            if let Some(cand) = retract(prob, &axpy(&u, -alpha, &z), level) {
                if let Some(qc) = quotient_of(prob, &cand) {
                    *probes += 1;
                    if qc <= q - cfg.armijo_c * alpha * slope + slack(q) {
                        accepted = Some((cand, qc));
                        break;
                    }
                }
            }
            alpha *= cfg.armijo_shrink;
        }
        let Some((cand, qc)) = accepted else { break };
        let done = q - qc <= 1e-13 * q.abs();
        u = cand;
        q = qc;
        alpha = (2.0 * alpha).min(1e8);
        if done {
            break;
        }
    }
    if q < best.0 {
        *best = (q, u.clone(), level);
    }
    Some((q, u))
}

/// Start directions: the torsion function, then smooth random fields.
fn starts(lap: &Laplacian, mesh: &Mesh, count: usize, seed: u64, stream: u64) -> Vec<Vec<f64>> {
    let mut rng = rng_for(seed, stream);
    let mut out = vec![torsion_field(lap, mesh)];
    while out.len() < count.max(1) {
        out.push(smooth_random_field(lap, &mut rng, mesh.node_count()));
    }
    out
}

/// Estimates `λ₁ = inf I/J` by minimizing the quotient at each level of a
/// log-spaced sweep of Sobolev norms over `[1e-3, 1e3]`, from several starts.
pub fn lambda1_minimize(prob: &Problem, cfg: &SolverConfig) -> Result<Lambda1Result> {
    let mesh = prob.mesh();
    let lap = Laplacian::new(mesh)?;
    let dirs = starts(&lap, mesh, cfg.lambda1_starts, cfg.seed, 3);
    let levels = log_space(SCALE_MIN, SCALE_MAX, cfg.lambda1_scales.max(2));
    let mut probes = 0;
    let mut best = (f64::INFINITY, Vec::new(), f64::NAN);
    let mut sweep = Vec::with_capacity(levels.len());
    let mut warm: Option<Vec<f64>> = None;
    for &level in &levels {
        let mut level_best: Option<(f64, Vec<f64>)> = None;
        let candidates = warm.iter().cloned().chain(dirs.iter().cloned());
        for d in candidates {
            if let Some((q, u)) =
                descend_on_sphere(prob, &lap, d, level, cfg.lambda1_iter, cfg, &mut probes, &mut best)
            {
                if level_best.as_ref().is_none_or(|b| q < b.0) {
                    level_best = Some((q, u));
                }
            }
        }
        let Some((q, u)) = level_best else {
            return Err(Error::ZeroDenominator { value: 0.0 });
        };
        debug!("λ₁ sweep: level {level:e}, quotient {q:e}");
        sweep.push(SweepPoint { scale: level, quotient: q });
        warm = Some(u);
    }

    let (xs, ys): (Vec<f64>, Vec<f64>) = sweep.iter().map(|s| (s.scale.ln(), s.quotient.ln())).unzip();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let log_log_slope = sxy / sxx;

    let argmin = (0..sweep.len()).fold(0, |m, i| if sweep[i].quotient < sweep[m].quotient { i } else { m });
    let qmax = sweep.iter().map(|s| s.quotient).fold(0.0, f64::max);
    let at_end = argmin == 0 || argmin == sweep.len() - 1;
    let degenerate = at_end && qmax > 10.0 * sweep[argmin].quotient;
    info!("λ₁ estimate {:e} (slope {log_log_slope:.4}, degenerate {degenerate})", best.0);
    Ok(Lambda1Result {
        estimate: best.0,
        minimizer: (!degenerate).then(|| GridFunction::from_vec(best.1)),
        degenerate,
        sweep,
        log_log_slope,
        best_scale: best.2,
        probes,
    })
}

/// Global minimization of `E_λ = I − λJ`.
///
/// A coercivity probe first follows rays through the start directions with
/// doubling scale; if `E_λ` drops below `−coercivity_cap` the probe point is
/// returned with `DivergedToMinusInfinity`. Otherwise Sobolev descent runs
/// from several starts (including `warm`, if given, at several scales) and
/// the lowest-energy result is kept. A result with norm below
/// `nontrivial_tol` is reported as `DegenerateZero`.
pub fn global_minimize_at_lambda(
    prob: &Problem,
    lambda: f64,
    warm: Option<&GridFunction>,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("λ = {lambda} must be positive")));
    }
    let pl = prob.with_lambda(lambda);
    let mesh = prob.mesh();
    let lap = Laplacian::new(mesh)?;
    let tol = cfg.grad_tol_for(mesh);

    let mut dirs = starts(&lap, mesh, cfg.minimize_starts, cfg.seed, 4);
    if let Some(w) = warm {
        mesh.check_nodal(w.len())?;
        dirs.insert(0, crate::mesh::enforce_zero_trace(mesh, w).into_values());
    }
    let dirs: Vec<Vec<f64>> = dirs
        .into_iter()
        .filter_map(|d| {
            let n = lap.norm(&d);
            (n > 0.0).then(|| scale(&d, 1.0 / n))
        })
        .collect();

    for d in &dirs {
        let mut t = 1e-3;
        let mut trace = Vec::new();
        while t <= cfg.t_max {
            let u = scale(d, t);
            let e = energy::energy_unchecked(&pl, &u);
            if e.total < -cfg.coercivity_cap {
                let g = energy::assemble(&pl, &u, Part::Total);
                let gn = energy::grad_norm_of(mesh, &g);
                trace.push(TraceRow::new(trace.len(), &e, gn));
                info!("coercivity probe: E_λ = {:e} at ray scale {t:e}", e.total);
                return Ok(SolveReport {
                    solution: GridFunction::from_vec(u),
                    energy: e,
                    grad_norm: gn,
                    iterations: trace.len(),
                    status: Status::DivergedToMinusInfinity,
                    trace,
                    iterates: Vec::new(),
                });
            }
            trace.push(TraceRow::new(trace.len(), &e, f64::NAN));
            t *= 2.0;
        }
    }

    let mut best: Option<SolveReport> = None;
    for d in &dirs {
        for s in [1e-2, 1.0, 1e2] {
            let r = minimize(&pl, &lap, scale(d, s), cfg, tol, cfg.max_iter);
            debug!("E_λ descent from scale {s:e}: {:?}, energy {:e}", r.status, r.energy.total);
            let better = match &best {
                None => true,
                Some(b) => {
                    (r.converged() && !b.converged())
                        || (r.converged() == b.converged() && r.energy.total < b.energy.total)
                }
            };
            if better {
                best = Some(r);
            }
        }
    }
    let mut report = best.expect("at least one start");
    if report.status == Status::DivergedToMinusInfinity {
        return Ok(report);
    }
    let norm = pl.norm(&report.solution)?;
    if norm <= cfg.nontrivial_tol {
        report.status = Status::DegenerateZero;
    }
    Ok(report)
}

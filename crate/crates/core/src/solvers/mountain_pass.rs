//! Mountain-pass iteration on the ray path `{s·T·w : 0 ≤ s ≤ 1}`.
//!
//! Each outer step locates the path maximizer, takes an Armijo-controlled
//! Sobolev descent step from it, and replaces the path direction `w` by the
//! normalized result. The path end `T·w` is kept in the negative-energy
//! valley by doubling `T`. Every few steps a Newton refinement is tried and
//! accepted once it reaches the tolerance close to the current iterate.

use log::{debug, warn};

use super::newton;
use super::{axpy, is_critical, dot, scale, slack, SolveReport, SolverConfig, Status, TraceRow};
use crate::energy::{self, Part, Problem};
use crate::error::{Error, Result};
use crate::linalg::Laplacian;
use crate::mesh::{enforce_zero_trace, GridFunction};
use crate::solvers::MPGeometry;

const GOLDEN_ITERS: usize = 40;
const POLISH_ITERS: usize = 200;
const MAX_DOUBLINGS: usize = 64;
const MIN_STEP: f64 = 1e-18;

/// Energy along the ray through the unit direction `w`.
pub(crate) struct Ray<'a> {
    prob: &'a Problem,
    w: Vec<f64>,
}

impl<'a> Ray<'a> {
    pub(crate) fn new(prob: &'a Problem, w: Vec<f64>) -> Self {
        Ray { prob, w }
    }

    fn point(&self, t: f64) -> Vec<f64> {
        scale(&self.w, t)
    }

    fn energy(&self, t: f64) -> f64 {
        energy::energy_unchecked(self.prob, &self.point(t)).total
    }

    /// `d/dt E(t w)`.
    fn slope(&self, t: f64) -> f64 {
        dot(&energy::assemble(self.prob, &self.point(t), Part::Total), &self.w)
    }

    /// Doubles `t` from `t0` until `E(t w) < 0`.
    pub(crate) fn valley(&self, t0: f64) -> Option<f64> {
        let mut t = t0;
        for _ in 0..MAX_DOUBLINGS {
            if self.energy(t) < 0.0 {
                return Some(t);
            }
            t *= 2.0;
        }
        None
    }

    /// Maximizer of `E` on `[0, t_end]` sampled at `points` nodes, refined by
    /// golden section and polished by bisection on the ray slope.
    pub(crate) fn peak(&self, t_end: f64, points: usize) -> (f64, f64) {
        let n = points.max(3) - 1;
        let ts: Vec<f64> = (0..=n).map(|i| t_end * i as f64 / n as f64).collect();
        let es: Vec<f64> = ts.iter().map(|&t| self.energy(t)).collect();
        let m = (0..=n).fold(0, |m, i| if es[i] > es[m] { i } else { m });
        let mut a = ts[m.saturating_sub(1)];
        let mut b = ts[(m + 1).min(n)];

        let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - inv_phi * (b - a);
        let mut d = a + inv_phi * (b - a);
        let (mut fc, mut fd) = (self.energy(c), self.energy(d));
        for _ in 0..GOLDEN_ITERS {
            if fc >= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = self.energy(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = self.energy(d);
            }
        }
        let mut t = 0.5 * (a + b);

        // widen until the slope changes sign, then bisect
        let (mut lo, mut hi) = (a, b);
        let mut widen = 0;
        while (self.slope(lo) < 0.0 || self.slope(hi) > 0.0) && widen < 60 {
            let w = hi - lo;
            lo = (lo - w).max(0.0);
            hi += w;
            widen += 1;
        }
        if self.slope(lo) >= 0.0 && self.slope(hi) <= 0.0 {
            for _ in 0..POLISH_ITERS {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if self.slope(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let (elo, ehi) = (self.energy(lo), self.energy(hi));
            t = if elo >= ehi { lo } else { hi };
        }
        (t, self.energy(t))
    }
}

/// Numerical mountain pass from the origin to the valley point `geometry.e`.
///
/// Errors with `DegenerateCollapse` if the path maximum drops below `ρ`.
/// Running out of iterations is reported as `Status::MaxIter`.
pub fn mountain_pass_solve(
    prob: &Problem,
    geometry: &MPGeometry,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    let mesh = prob.mesh();
    mesh.check_nodal(geometry.e.len())?;
    let lap = Laplacian::new(mesh)?;
    let tol = cfg.grad_tol_for(mesh);
    let e = enforce_zero_trace(mesh, &geometry.e);
    let en = lap.norm(e.values());
    if en == 0.0 {
        return Err(Error::InvalidArgument("valley point is zero".into()));
    }
    let mut t_end = en;
    let mut ray = Ray::new(prob, scale(e.values(), 1.0 / en));
    if ray.energy(t_end) >= 0.0 {
        return Err(Error::InvalidArgument("valley point has nonnegative energy".into()));
    }
    let collapse_level = geometry.rho - slack(geometry.rho);

    let (mut t, mut peak) = ray.peak(t_end, cfg.path_points);
    let mut trace = Vec::new();
    let mut iterates = Vec::new();
    let mut alpha = 1.0;
    let mut status = Status::MaxIter;
    let mut iter = 0;
    let (u, eb, gn) = loop {
        let u = ray.point(t);
        let g = energy::assemble(prob, &u, Part::Total);
        let gn = energy::grad_norm_of(mesh, &g);
        let eb = energy::energy_unchecked(prob, &u);
        trace.push(TraceRow::new(iter, &eb, gn));
        if cfg.record_iterates {
            iterates.push(GridFunction::from_vec(u.clone()));
        }
        if peak < collapse_level {
            return Err(Error::DegenerateCollapse {
                peak,
                rho: geometry.rho,
            });
        }
        let critical = is_critical(prob, &u, gn, tol);
        if !critical && iter >= cfg.max_iter {
            break (u, eb, gn);
        }
        let periodic = iter > 0 && iter % cfg.relax_every == 0;
        if periodic {
            t_end = ray.valley(2.0 * t).unwrap_or(t_end);
        }
        if critical || periodic {
            if let Some((v, vn)) = newton::refine_near(prob, &lap, &u, gn, tol) {
                if is_critical(prob, &v, vn, tol) {
                    let eb = energy::energy_unchecked(prob, &v);
                    iter += 1;
                    trace.push(TraceRow::new(iter, &eb, vn));
                    if cfg.record_iterates {
                        iterates.push(GridFunction::from_vec(v.clone()));
                    }
                    status = Status::Converged;
                    break (v, eb, vn);
                }
            }
            if critical {
                status = Status::Converged;
                break (u, eb, gn);
            }
        }

        let z = lap.solve(&g);
        let slope = dot(&g, &z);
        let mut accepted = None;
        while alpha >= MIN_STEP {
            let cand = axpy(&u, -alpha, &z);
            let cn = lap.norm(&cand);
            if cn > 0.0 {
                let next = Ray::new(prob, scale(&cand, 1.0 / cn));
                if let Some(end) = next.valley(t_end) {
                    let (nt, np) = next.peak(end, cfg.path_points);
                    if np <= peak - cfg.armijo_c * alpha * slope + slack(peak) {
                        accepted = Some((next, end, nt, np));
                        break;
                    }
                }
            }
            alpha *= cfg.armijo_shrink;
        }
        let Some((next, end, nt, np)) = accepted else {
            warn!("mountain pass line search stalled at iteration {iter}, grad norm {gn:e}");
            break (u, eb, gn);
        };
        ray = next;
        t_end = end;
        t = nt;
        peak = np;
        alpha = (2.0 * alpha).min(1e8);
        iter += 1;
        debug!("mountain pass iteration {iter}: peak {peak:.12e}, grad norm {gn:e}, step {alpha:e}");
    };

    let solution = GridFunction::from_vec(u);
    let status = if status == Status::Converged && prob.norm(&solution)? <= cfg.nontrivial_tol {
        Status::DegenerateZero
    } else {
        status
    };
    Ok(SolveReport {
        solution,
        energy: eb,
        grad_norm: gn,
        iterations: iter,
        status,
        trace,
        iterates,
    })
}

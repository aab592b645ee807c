//! Symmetric multi-solution search.
//!
//! Level `k` looks for a critical point of minimax type over the support
//! `L = span(u_1, …, u_{k−1})` of the solutions found so far: for a direction
//! `v ⟂ L` the local peak of `E` on `span(L, v)` is located by Newton ascent
//! in coefficient space, and `v` is moved by Sobolev descent steps until the
//! peak is critical, with periodic Newton refinement near the end. Level `k`
//! starts from `+b_k` and, failing that, `−b_k`.
//! This is an energy-level heuristic; it does not implement a deformation
//! argument.

use log::{debug, info, warn};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use super::newton;
use super::{axpy, is_critical, dot, scale, slack, SolveReport, SolverConfig, Status, SubspaceLadder, TraceRow};
use crate::energy::{self, Part, Problem};
use crate::error::{Error, Result};
use crate::linalg::Laplacian;
use crate::mesh::GridFunction;

const NEWTON_ITERS: usize = 60;
const MIN_STEP: f64 = 1e-18;

#[derive(Debug, Clone, PartialEq)]
pub struct FountainSolution {
    pub report: SolveReport,
    /// Ladder level (1-based) that produced the solution.
    pub level: usize,
    /// `+1` or `−1`: the sign of the starting direction `±b_level`.
    pub start_sign: f64,
    pub sign_changes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FountainFailure {
    pub level: usize,
    pub start_sign: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FountainResult {
    /// Distinct converged solutions, ascending energy.
    pub solutions: Vec<FountainSolution>,
    pub failures: Vec<FountainFailure>,
}

/// Sign changes along the node ordering, ignoring values below `1e-8·max|u|`.
pub fn count_sign_changes(u: &GridFunction) -> usize {
    let peak = u.max_abs();
    let mut last = 0.0;
    let mut changes = 0;
    for &x in u.values() {
        if x.abs() <= 1e-8 * peak {
            continue;
        }
        if last != 0.0 && (x > 0.0) != (last > 0.0) {
            changes += 1;
        }
        last = x;
    }
    changes
}

/// Distance of `u` to `v` modulo sign, relative to the larger L² norm.
fn relative_distance(mesh: &crate::mesh::Mesh, u: &GridFunction, v: &GridFunction) -> f64 {
    let d = f64::min(u.sub(v).l2_norm(mesh), u.axpy(1.0, v).l2_norm(mesh));
    d / u.l2_norm(mesh).max(v.l2_norm(mesh))
}

pub fn fountain_search(
    prob: &Problem,
    ladder: &SubspaceLadder,
    cfg: &SolverConfig,
) -> Result<FountainResult> {
    if !prob.reaction().is_odd() {
        return Err(Error::OddnessRequired);
    }
    let mesh = prob.mesh();
    let lap = Laplacian::new(mesh)?;
    let mut found: Vec<FountainSolution> = Vec::new();
    let mut failures = Vec::new();
    for level in 1..=ladder.len() {
        let b = ladder.basis[level - 1].values();
        for sign in [1.0, -1.0] {
            let support: Vec<Vec<f64>> = found.iter().map(|s| s.report.solution.values().to_vec()).collect();
            let report = match local_minimax(prob, &lap, &support, &scale(b, sign), cfg) {
                Ok(r) => r,
                Err(e) => {
                    failures.push(FountainFailure {
                        level,
                        start_sign: sign,
                        reason: e.to_string(),
                    });
                    continue;
                }
            };
            if report.status != Status::Converged {
                failures.push(FountainFailure {
                    level,
                    start_sign: sign,
                    reason: format!("{:?} with grad norm {:e}", report.status, report.grad_norm),
                });
                continue;
            }
            let duplicate = found
                .iter()
                .any(|s| relative_distance(mesh, &s.report.solution, &report.solution) <= cfg.dedup_tol);
            if duplicate {
                debug!("level {level} ({sign:+}) reproduced a known solution");
                continue;
            }
            info!("level {level}: energy {:.10e}", report.energy.total);
            found.push(FountainSolution {
                sign_changes: count_sign_changes(&report.solution),
                report,
                level,
                start_sign: sign,
            });
            break;
        }
    }
    found.sort_by(|a, b| {
        a.report
            .energy
            .total
            .total_cmp(&b.report.energy.total)
            .then_with(|| {
                a.report
                    .solution
                    .values()
                    .iter()
                    .zip(b.report.solution.values())
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
    });
    Ok(FountainResult {
        solutions: found,
        failures,
    })
}

/// `span(L, v)` with `L` made `K`-orthonormal; the last column is `v`.
struct Frame {
    columns: Vec<Vec<f64>>,
}

impl Frame {
    fn point(&self, c: &[f64]) -> Vec<f64> {
        let mut u = vec![0.0; self.columns[0].len()];
        for (col, &ci) in self.columns.iter().zip(c) {
            u.iter_mut().zip(col).for_each(|(x, y)| *x += ci * y);
        }
        u
    }
}

fn orthonormalize(lap: &Laplacian, vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for o in &out {
                let c = lap.inner(&w, o);
                w = axpy(&w, -c, o);
            }
        }
        let n = lap.norm(&w);
        if n > 1e-12 {
            out.push(scale(&w, 1.0 / n));
        }
    }
    out
}

struct Peak {
    coeffs: Vec<f64>,
    u: Vec<f64>,
    value: f64,
}

/// Local maximum of `E` on the frame, starting from `c0`.
fn frame_peak(prob: &Problem, frame: &Frame, c0: Vec<f64>) -> Option<Peak> {
    let n = frame.columns.len();
    let grad = |c: &[f64]| -> Vec<f64> {
        let g = energy::assemble(prob, &frame.point(c), Part::Total);
        frame.columns.iter().map(|col| dot(&g, col)).collect()
    };
    let value = |c: &[f64]| energy::energy_unchecked(prob, &frame.point(c)).total;
    let mut c = c0;
    let mut f = value(&c);
    for _ in 0..NEWTON_ITERS {
        let g = grad(&c);
        let scale_c = c.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        let gmax = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if gmax <= 1e-14 * (1.0 + f.abs()) {
            break;
        }
        let h = 1e-6 * scale_c;
        let mut hess = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut cp = c.clone();
            let mut cm = c.clone();
            cp[j] += h;
            cm[j] -= h;
            let (gp, gm) = (grad(&cp), grad(&cm));
            for i in 0..n {
                hess[(i, j)] = (gp[i] - gm[i]) / (2.0 * h);
            }
        }
        let hess = 0.5 * (&hess + hess.transpose());
        let eig = SymmetricEigen::new(hess);
        // ascent step with curvature magnitudes: Newton near a maximum,
        // away from saddles elsewhere
        let gv = DVector::from_vec(g.clone());
        let mut step = DVector::zeros(n);
        for k in 0..n {
            let vk = eig.eigenvectors.column(k);
            let lam = eig.eigenvalues[k].abs().max(1e-12);
            let proj = vk.dot(&gv);
            step += vk * (proj / lam);
            if eig.eigenvalues[k] > 0.0 && proj.abs() < 1e-10 * (1.0 + gmax) {
                step += vk * (0.1 * scale_c);
            }
        }
        let mut s = 1.0;
        let mut moved = false;
        while s > 1e-10 {
            let cand: Vec<f64> = c.iter().zip(step.iter()).map(|(x, d)| x + s * d).collect();
            let fc = value(&cand);
            if fc >= f - slack(f) {
                let gc = grad(&cand);
                let gcm = gc.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                if fc > f || gcm < gmax {
                    c = cand;
                    f = fc;
                    moved = true;
                    break;
                }
            }
            s *= 0.5;
        }
        if !moved {
            break;
        }
    }
    if !(c[n - 1] > 0.0) || !f.is_finite() {
        return None;
    }
    let u = frame.point(&c);
    Some(Peak { coeffs: c, u, value: f })
}

/// Initial coefficients: zero on the support, the ray maximizer along `v`.
fn ray_start(prob: &Problem, v: &[f64], n: usize) -> Option<Vec<f64>> {
    let ray = super::mountain_pass::Ray::new(prob, v.to_vec());
    let end = ray.valley(1.0)?;
    let (t, _) = ray.peak(end, 33);
    let mut c = vec![0.0; n];
    c[n - 1] = t;
    Some(c)
}

fn local_minimax(
    prob: &Problem,
    lap: &Laplacian,
    support: &[Vec<f64>],
    start: &[f64],
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    let mesh = prob.mesh();
    let tol = cfg.grad_tol_for(mesh);
    let basis = orthonormalize(lap, support);
    let project = |v: &[f64]| -> Option<Vec<f64>> {
        let mut w = v.to_vec();
        for _ in 0..2 {
            for o in &basis {
                let c = lap.inner(&w, o);
                w = axpy(&w, -c, o);
            }
        }
        let n = lap.norm(&w);
        (n > 1e-12).then(|| scale(&w, 1.0 / n))
    };
    let with_v = |v: Vec<f64>| {
        let mut columns = basis.clone();
        columns.push(v);
        Frame { columns }
    };
    let nc = basis.len() + 1;
    let no_peak = || Error::InvalidArgument("no local peak on the search subspace".into());

    let v = project(start).ok_or_else(no_peak)?;
    let c0 = ray_start(prob, &v, nc).ok_or_else(no_peak)?;
    let mut frame = with_v(v);
    let mut peak = frame_peak(prob, &frame, c0).ok_or_else(no_peak)?;

    let mut trace = Vec::new();
    let mut iterates = Vec::new();
    let mut alpha = 1.0;
    let mut status = Status::MaxIter;
    let mut iter = 0;
    let (u, gn) = loop {
        let g = energy::assemble(prob, &peak.u, Part::Total);
        let gn = energy::grad_norm_of(mesh, &g);
        let eb = energy::energy_unchecked(prob, &peak.u);
        trace.push(TraceRow::new(iter, &eb, gn));
        if cfg.record_iterates {
            iterates.push(GridFunction::from_vec(peak.u.clone()));
        }
        let critical = is_critical(prob, &peak.u, gn, tol);
        if !critical && iter >= cfg.max_iter {
            break (peak.u, gn);
        }
        if critical || (iter > 0 && iter % cfg.relax_every == 0) {
            if let Some((w, wn)) = newton::refine_near(prob, lap, &peak.u, gn, tol) {
                if is_critical(prob, &w, wn, tol) {
                    let eb = energy::energy_unchecked(prob, &w);
                    iter += 1;
                    trace.push(TraceRow::new(iter, &eb, wn));
                    if cfg.record_iterates {
                        iterates.push(GridFunction::from_vec(w.clone()));
                    }
                    status = Status::Converged;
                    break (w, wn);
                }
            }
            if critical {
                status = Status::Converged;
                break (peak.u, gn);
            }
        }
        let z = lap.solve(&g);
        let slope = dot(&g, &z);
        let tv = peak.coeffs[nc - 1];
        let v = frame.columns[nc - 1].clone();
        let mut accepted = None;
        while alpha >= MIN_STEP {
            if let Some(nv) = project(&axpy(&v, -alpha / tv, &z)) {
                let cand = with_v(nv);
                if let Some(p) = frame_peak(prob, &cand, peak.coeffs.clone()) {
                    if p.value <= peak.value - cfg.armijo_c * alpha * slope + slack(peak.value) {
                        accepted = Some((cand, p));
                        break;
                    }
                }
            }
            alpha *= cfg.armijo_shrink;
        }
        let Some((f, p)) = accepted else {
            warn!("minimax line search stalled at iteration {iter}, grad norm {gn:e}");
            break (peak.u, gn);
        };
        frame = f;
        peak = p;
        alpha = (2.0 * alpha).min(1e8);
        iter += 1;
    };
    let solution = GridFunction::from_vec(u);
    let status = if status == Status::Converged && prob.norm(&solution)? <= cfg.nontrivial_tol {
        Status::DegenerateZero
    } else {
        status
    };
    Ok(SolveReport {
        energy: energy::energy(prob, &solution)?,
        solution,
        grad_norm: gn,
        iterations: iter,
        status,
        trace,
        iterates,
    })
}

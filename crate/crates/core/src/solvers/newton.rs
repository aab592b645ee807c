//! Newton refinement of an approximate critical point.
//!
//! The Hessian is built from central differences of the assembled gradient,
//! one gradient pair per color of a banded coloring of the nodes. The
//! indefinite Newton system is solved by MINRES preconditioned with the
//! discrete Dirichlet Laplacian.

use log::debug;

use super::{axpy, dot, scale};
use crate::energy::{self, Part, Problem};
use crate::linalg::Laplacian;

const MINRES_TOL: f64 = 1e-12;
const MINRES_MAX_ITER: usize = 500;
const FD_STEP: f64 = 1e-6;
const NEWTON_STEPS: usize = 12;
/// Largest move, relative to `‖u‖`, accepted from a refinement.
const NEWTON_RADIUS: f64 = 0.1;

/// Symmetric Hessian stored as sparse rows.
struct Hessian {
    rows: Vec<Vec<(usize, f64)>>,
}

impl Hessian {
    fn assemble(prob: &Problem, u: &[f64]) -> Self {
        let mesh = prob.mesh();
        let n = u.len();
        let bw = mesh
            .elements()
            .iter()
            .flat_map(|e| {
                let v = e.vertices();
                v.iter().flat_map(move |&a| v.iter().map(move |&b| a.abs_diff(b)))
            })
            .max()
            .unwrap_or(0);
        let colors = (2 * bw + 1).min(n.max(1));
        let umax = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let h = FD_STEP * (1.0 + umax);
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for c in 0..colors {
            let cols: Vec<usize> = (c..n).step_by(colors).filter(|&j| !mesh.is_boundary(j)).collect();
            if cols.is_empty() {
                continue;
            }
            let mut up = u.to_vec();
            let mut dn = u.to_vec();
            for &j in &cols {
                up[j] += h;
                dn[j] -= h;
            }
            let gp = energy::assemble(prob, &up, Part::Total);
            let gm = energy::assemble(prob, &dn, Part::Total);
            for r in 0..n {
                if mesh.is_boundary(r) {
                    continue;
                }
                // the unique perturbed column within the band of row r
                let lo = r.saturating_sub(bw);
                let start = lo + (c + colors - lo % colors) % colors;
                if start <= r + bw && start < n && !mesh.is_boundary(start) {
                    let v = (gp[r] - gm[r]) / (2.0 * h);
                    if v != 0.0 {
                        rows[r].push((start, v));
                    }
                }
            }
        }
        // symmetrize
        let mut sym: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (r, row) in rows.iter().enumerate() {
            for &(j, v) in row {
                sym[r].push((j, 0.5 * v));
                sym[j].push((r, 0.5 * v));
            }
        }
        Hessian { rows: sym }
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(j, v)| v * x[j]).sum())
            .collect()
    }
}

/// Preconditioned MINRES for `H x = b` with preconditioner `K`.
fn minres(h: &Hessian, lap: &Laplacian, b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r1 = b.to_vec();
    let mut y = lap.solve(&r1);
    let beta1 = dot(&r1, &y);
    if beta1 <= 0.0 {
        return x;
    }
    let beta1 = beta1.sqrt();
    let mut r2 = r1.clone();
    let (mut oldb, mut beta) = (0.0, beta1);
    let (mut dbar, mut epsln, mut phibar) = (0.0, 0.0, beta1);
    let (mut cs, mut sn) = (-1.0f64, 0.0f64);
    let mut w = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    for it in 0..MINRES_MAX_ITER {
        let v = scale(&y, 1.0 / beta);
        y = h.apply(&v);
        if it > 0 {
            y = axpy(&y, -beta / oldb, &r1);
        }
        let alfa = dot(&v, &y);
        y = axpy(&y, -alfa / beta, &r2);
        r1 = std::mem::replace(&mut r2, y);
        y = lap.solve(&r2);
        oldb = beta;
        let bb = dot(&r2, &y);
        beta = bb.max(0.0).sqrt();
        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;
        let w1 = std::mem::replace(&mut w2, w);
        w = v
            .iter()
            .zip(&w1)
            .zip(&w2)
            .map(|((vi, a), b)| (vi - oldeps * a - delta * b) / gamma)
            .collect();
        x = axpy(&x, phi, &w);
        if phibar <= MINRES_TOL * beta1 || beta == 0.0 {
            break;
        }
    }
    x
}

/// Newton iteration from `u` while each step at least halves the gradient
/// norm. Returns the best point found and its gradient norm.
pub(crate) fn polish(prob: &Problem, lap: &Laplacian, u: &[f64], tol: f64, max_steps: usize) -> (Vec<f64>, f64) {
    let mesh = prob.mesh();
    let mut u = u.to_vec();
    let mut g = energy::assemble(prob, &u, Part::Total);
    let mut gn = energy::grad_norm_of(mesh, &g);
    for step in 0..max_steps {
        if gn <= tol {
            break;
        }
        let h = Hessian::assemble(prob, &u);
        let delta = minres(&h, lap, &scale(&g, -1.0));
        let cand = axpy(&u, 1.0, &delta);
        let gc = energy::assemble(prob, &cand, Part::Total);
        let gnc = energy::grad_norm_of(mesh, &gc);
        debug!("newton step {step}: grad norm {gn:e} -> {gnc:e}");
        if !(gnc < 0.5 * gn) {
            break;
        }
        u = cand;
        g = gc;
        gn = gnc;
    }
    (u, gn)
}

/// Newton refinement of `u` (gradient norm `gn`), kept only if it lowers the
/// gradient norm without leaving a small neighborhood of `u`.
pub(crate) fn refine_near(prob: &Problem, lap: &Laplacian, u: &[f64], gn: f64, tol: f64) -> Option<(Vec<f64>, f64)> {
    let (v, vn) = polish(prob, lap, u, tol, NEWTON_STEPS);
    (vn < gn && lap.norm(&axpy(&v, -1.0, u)) <= NEWTON_RADIUS * lap.norm(u)).then_some((v, vn))
}

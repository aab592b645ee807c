#![allow(dead_code)]

use std::sync::Arc;

use varexp::energy::Problem;
use varexp::*;

pub fn unit_interval(cells: usize) -> Arc<Mesh> {
    Arc::new(Mesh::interval(0.0, 1.0, cells).unwrap())
}

pub fn power_problem(mesh: &Arc<Mesh>, kind: model::KernelKind, p: f64, q: f64, c: f64) -> Problem {
    let pf = ExponentField::constant(mesh, p).unwrap();
    let qf = ExponentField::constant(mesh, q).unwrap();
    let k = OperatorKernel::new(kind, pf).unwrap();
    let r = Reaction::power_uniform(mesh, qf, c).unwrap();
    Problem::new(mesh.clone(), k, r).unwrap()
}

/// `−u″ = u³` on (0,1), discretized.
pub fn cubic_model(cells: usize) -> Problem {
    power_problem(&unit_interval(cells), model::KernelKind::PxLaplacian, 2.0, 4.0, 1.0)
}

/// `−u″ = λu` on (0,1), discretized.
pub fn linear_validation(cells: usize) -> Problem {
    power_problem(&unit_interval(cells), model::KernelKind::PxLaplacian, 2.0, 2.0, 1.0)
}

pub fn sine(mesh: &Mesh, k: f64) -> GridFunction {
    let u = GridFunction::from_fn(mesh, |x| (k * std::f64::consts::PI * x[0]).sin());
    enforce_zero_trace(mesh, &u)
}

/// Positive solution of `−u″ = u³`, `u(0) = u(1) = 0`, by shooting.
pub struct Shooting {
    /// `u′(0)`.
    pub slope: f64,
    pub amplitude: f64,
    /// `∫₀¹ u′²`.
    pub dirichlet: f64,
}

impl Shooting {
    /// Integrates from `u′(0) = 1` with RK4 up to the first zero `X`, then
    /// rescales: `a·u(a x)` solves the same equation, so `a = X` moves the
    /// zero to 1.
    pub fn cubic(step: f64) -> Self {
        let f = |u: f64, v: f64| (v, -u * u * u);
        let (mut x, mut u, mut v) = (0.0f64, 0.0f64, 1.0f64);
        let (mut amp, mut dir) = (0.0f64, 0.0f64);
        loop {
            let (k1u, k1v) = f(u, v);
            let (k2u, k2v) = f(u + 0.5 * step * k1u, v + 0.5 * step * k1v);
            let (k3u, k3v) = f(u + 0.5 * step * k2u, v + 0.5 * step * k2v);
            let (k4u, k4v) = f(u + step * k3u, v + step * k3v);
            let un = u + step / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
            let vn = v + step / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            if un <= 0.0 && x > 0.0 {
                // linear interpolation to the crossing, u″ ≈ 0 there
                let frac = u / (u - un);
                dir += 0.5 * (v * v + vn * vn) * step * frac;
                x += frac * step;
                break;
            }
            dir += 0.5 * (v * v + vn * vn) * step;
            if v > 0.0 && vn <= 0.0 {
                // quadratic peak correction: u ≈ u_p − v²/(2u³)
                let up = u + v * v / (2.0 * u * u * u);
                amp = amp.max(up);
            }
            amp = amp.max(un);
            x += step;
            u = un;
            v = vn;
        }
        let a = x;
        Shooting {
            slope: a * a,
            amplitude: a * amp,
            dirichlet: a.powi(3) * dir,
        }
    }

    /// Energy `½∫u′² − ¼∫u⁴ = ¼∫u′²` of the one-bump solution.
    pub fn energy(&self) -> f64 {
        0.25 * self.dirichlet
    }
}

/// Smallest eigenvalue of `−u″ = λu` on `cells` linear elements with the
/// cell-average mass `Σ h ū²`: `sin(πx)` is an eigenvector of both
/// matrices, with ratio `(2/h)² tan²(πh/2)`.
pub fn discrete_dirichlet_eigenvalue(cells: usize) -> f64 {
    let h = 1.0 / cells as f64;
    (2.0 / h * (0.5 * std::f64::consts::PI * h).tan()).powi(2)
}

//! The `p(x)`-modular, the Luxemburg norm and the zero-trace Sobolev norm.
//!
//! All integrals use the element midpoint rule: the integrand is evaluated at
//! the element average of the nodal values with the element exponent.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponent::ExponentField;
use crate::mesh::{self, GridFunction, Mesh};

/// Tolerance on `|ρ(u/‖u‖) − 1|` at a returned Luxemburg norm.
pub const NORM_TOL: f64 = 1e-10;
/// Absolute tolerance for the zero boundary trace.
pub const BOUNDARY_TOL: f64 = 1e-12;

const MAX_BRACKET_STEPS: usize = 200;
const MAX_BISECTIONS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormResult {
    pub value: f64,
    /// `ρ(u/value)`; zero when `value` is zero.
    pub modular_at_value: f64,
    pub bisection_iterations: usize,
}

fn check_exponent(mesh: &Mesh, p: &ExponentField) -> Result<()> {
    mesh.check_nodal(p.len())?;
    if p.element_values().len() != mesh.element_count() {
        return Err(Error::MeshMismatch {
            expected: mesh.element_count(),
            found: p.element_values().len(),
        });
    }
    Ok(())
}

/// `Σ_e |e| · |v_e / scale|^{p_e}` over element samples `v`.
fn element_modular(mesh: &Mesh, v: &[f64], p: &[f64], scale: f64) -> f64 {
    mesh.elements()
        .iter()
        .zip(v.iter().zip(p))
        .map(|(el, (&x, &pe))| {
            if x == 0.0 {
                0.0
            } else {
                el.measure * (x.abs() / scale).powf(pe)
            }
        })
        .sum()
}

/// `ρ_{p(x)}(u) = ∫ |u|^{p(x)} dx`.
pub fn modular(mesh: &Mesh, u: &GridFunction, p: &ExponentField) -> Result<f64> {
    mesh.check_nodal(u.len())?;
    check_exponent(mesh, p)?;
    Ok(element_modular(
        mesh,
        &mesh::element_averages(mesh, u),
        p.element_values(),
        1.0,
    ))
}

/// Modular of the gradient magnitude, `∫ |∇u|^{p(x)} dx`.
pub fn gradient_modular(mesh: &Mesh, u: &GridFunction, p: &ExponentField) -> Result<f64> {
    check_exponent(mesh, p)?;
    let g = mesh::gradient(mesh, u)?;
    let mags: Vec<f64> = (0..g.len())
        .map(|e| g.get(e).iter().map(|c| c * c).sum::<f64>().sqrt())
        .collect();
    Ok(element_modular(mesh, &mags, p.element_values(), 1.0))
}

/// Luxemburg norm `inf{μ > 0 : ρ(u/μ) ≤ 1}` of a nodal field.
pub fn luxemburg_norm(mesh: &Mesh, u: &GridFunction, p: &ExponentField) -> Result<NormResult> {
    mesh.check_nodal(u.len())?;
    check_exponent(mesh, p)?;
    luxemburg_of_samples(mesh, &mesh::element_averages(mesh, u), p)
}

/// Luxemburg norm of a field given by its element samples.
pub fn luxemburg_of_samples(mesh: &Mesh, v: &[f64], p: &ExponentField) -> Result<NormResult> {
    let pe = p.element_values();
    let rho = |mu: f64| element_modular(mesh, v, pe, mu);

    let rho1 = rho(1.0);
    if rho1 == 0.0 {
        return Ok(NormResult {
            value: 0.0,
            modular_at_value: 0.0,
            bisection_iterations: 0,
        });
    }
    if !rho1.is_finite() {
        return Err(Error::BracketFailure { modular: rho1 });
    }

    // ρ^{1/p⁺} and ρ^{1/p⁻} enclose the norm on either side of one
    let a = rho1.powf(1.0 / p.p_minus());
    let b = rho1.powf(1.0 / p.p_plus());
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    let mut steps = 0;
    while rho(lo) < 1.0 {
        lo *= 0.5;
        steps += 1;
        if steps > MAX_BRACKET_STEPS || lo == 0.0 {
            return Err(Error::BracketFailure { modular: rho1 });
        }
    }
    while rho(hi) > 1.0 {
        hi *= 2.0;
        steps += 1;
        if steps > MAX_BRACKET_STEPS || !hi.is_finite() {
            return Err(Error::BracketFailure { modular: rho1 });
        }
    }

    let mut best = (lo, rho(lo));
    let consider = |best: &mut (f64, f64), mu: f64, r: f64| {
        if (r - 1.0).abs() < (best.1 - 1.0).abs() {
            *best = (mu, r);
        }
    };
    let r_hi = rho(hi);
    consider(&mut best, hi, r_hi);

    let mut iterations = 0;
    // aim below the tolerance so that recomputing ρ at the result stays within it
    while (best.1 - 1.0).abs() > 0.1 * NORM_TOL && iterations < MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        let r = rho(mid);
        consider(&mut best, mid, r);
        if r > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(NormResult {
        value: best.0,
        modular_at_value: best.1,
        bisection_iterations: iterations,
    })
}

fn check_zero_trace(mesh: &Mesh, u: &GridFunction) -> Result<()> {
    for &b in mesh.boundary_nodes() {
        let value = u.values()[b];
        if value.abs() > BOUNDARY_TOL {
            return Err(Error::NonzeroBoundary { node: b, value });
        }
    }
    Ok(())
}

/// `‖u‖ = Σ_i |∂_i u|_{p(x)}`, the norm of the zero-trace Sobolev space.
pub fn sobolev0_norm(mesh: &Mesh, u: &GridFunction, p: &ExponentField) -> Result<f64> {
    mesh.check_nodal(u.len())?;
    check_exponent(mesh, p)?;
    check_zero_trace(mesh, u)?;
    let g = mesh::gradient(mesh, u)?;
    let mut total = 0.0;
    for d in 0..mesh.dim() {
        total += luxemburg_of_samples(mesh, &g.component(d), p)?.value;
    }
    Ok(total)
}

/// Both sides of the variable-exponent Hölder inequality
/// `|∫uv| ≤ (1/p⁻ + 1/p'⁻) |u|_{p(x)} |v|_{p'(x)}` with `p'` the conjugate of `p`.
pub fn holder_pairing_bound(
    mesh: &Mesh,
    u: &GridFunction,
    v: &GridFunction,
    p: &ExponentField,
) -> Result<(f64, f64)> {
    mesh.check_nodal(u.len())?;
    mesh.check_nodal(v.len())?;
    check_exponent(mesh, p)?;
    let ua = mesh::element_averages(mesh, u);
    let va = mesh::element_averages(mesh, v);
    let prod: Vec<f64> = ua.iter().zip(&va).map(|(a, b)| a * b).collect();
    let lhs = mesh::integrate(mesh, &prod)?.abs();
    let q = p.conjugate();
    let nu = luxemburg_of_samples(mesh, &ua, p)?.value;
    let nv = luxemburg_of_samples(mesh, &va, &q)?.value;
    let rhs = (1.0 / p.p_minus() + 1.0 / q.p_minus()) * nu * nv;
    Ok((lhs, rhs))
}

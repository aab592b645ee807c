//! Energy split, exact discrete derivative and monotonicity of the operator.

use std::f64::consts::PI;
use std::sync::Arc;

use varexp::energy::{directional_derivative, energy, gradient_vector, grad_norm, monotone_gap, Problem};
use varexp::*;

fn main() -> Result<()> {
    let mesh = Arc::new(Mesh::rectangle([0.0, 0.0], [1.0, 1.0], [16, 16])?);
    let p = ExponentField::build(&FieldSpec::expr("1.8 + 0.6*x*y"), &mesh)?;
    let q = ExponentField::constant(&mesh, 3.5)?;
    let prob = Problem::new(mesh.clone(), OperatorKernel::px_mean_curvature(p), Reaction::power_uniform(&mesh, q, 1.0)?)?;

    let u = enforce_zero_trace(&mesh, &GridFunction::from_fn(&mesh, |x| 2.0 * (PI * x[0]).sin() * (PI * x[1]).sin()));
    let v = enforce_zero_trace(&mesh, &GridFunction::from_fn(&mesh, |x| x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1])));

    let e = energy(&prob, &u)?;
    println!("E(u) = {:.8} = I {:.8} - J {:.8}", e.total, e.e0, e.j);

    let d = directional_derivative(&prob, &u, &v)?;
    let h = 1e-5;
    let fd = (energy(&prob, &u.axpy(h, &v))?.total - energy(&prob, &u.axpy(-h, &v))?.total) / (2.0 * h);
    println!("E'(u)v = {d:.10}, central difference {fd:.10}");

    let g = gradient_vector(&prob, &u)?;
    println!("gradient norm {:.6e}", grad_norm(&mesh, &g));
    println!("monotone gap (u, v) {:.6e}", monotone_gap(&prob, &u, &v)?);
    println!("E(-u) - E(u) = {:e}", energy(&prob, &u.scaled(-1.0))?.total - e.total);
    Ok(())
}

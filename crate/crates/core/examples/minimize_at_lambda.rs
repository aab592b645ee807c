//! Global minimization of `I - lambda J` below and above the first eigenvalue.

use std::f64::consts::PI;
use std::sync::Arc;

use varexp::energy::Problem;
use varexp::solvers::*;
use varexp::*;

fn main() -> Result<()> {
    let mesh = Arc::new(Mesh::interval(0.0, 1.0, 128)?);
    let cfg = SolverConfig::default();
    let p = ExponentField::constant(&mesh, 2.0)?;
    let linear = Problem::new(
        mesh.clone(),
        OperatorKernel::px_laplacian(p.clone()),
        Reaction::power_uniform(&mesh, ExponentField::constant(&mesh, 2.0)?, 1.0)?,
    )?;
    let cubic = Problem::new(
        mesh.clone(),
        OperatorKernel::px_laplacian(p),
        Reaction::power_uniform(&mesh, ExponentField::constant(&mesh, 4.0)?, 1.0)?,
    )?;
    for (name, prob) in [("linear", &linear), ("cubic", &cubic)] {
        for lambda in [5.0, 1.5 * PI * PI] {
            let r = global_minimize_at_lambda(prob, lambda, None, &cfg)?;
            println!("{name:<7} lambda = {lambda:<8.4} {:?}, E = {:.6e}", r.status, r.energy.total);
        }
    }
    Ok(())
}

//! Mountain-pass solution of `-u'' = u^3` on (0,1) with its geometry and
//! Palais-Smale diagnostics.

use std::f64::consts::PI;
use std::sync::Arc;

use varexp::energy::{ps_diagnostics, Problem, TracePoint};
use varexp::solvers::*;
use varexp::*;

fn main() -> Result<()> {
    env_logger::init();
    let mesh = Arc::new(Mesh::interval(0.0, 1.0, 256)?);
    let p = ExponentField::constant(&mesh, 2.0)?;
    let q = ExponentField::constant(&mesh, 4.0)?;
    let prob = Problem::new(mesh.clone(), OperatorKernel::px_laplacian(p), Reaction::power_uniform(&mesh, q, 1.0)?)?;
    let cfg = SolverConfig {
        record_iterates: true,
        ..SolverConfig::default()
    };

    let phi = enforce_zero_trace(&mesh, &GridFunction::from_fn(&mesh, |x| (PI * x[0]).sin()));
    let geo = verify_mp_geometry(&prob, &phi, cfg.sphere_samples, &cfg)?;
    println!("r = {:.4e}, rho = {:.4e}, t* = {}", geo.r, geo.rho, geo.t_star);

    let rep = mountain_pass_solve(&prob, &geo, &cfg)?;
    println!(
        "{:?} after {} iterations: E = {:.8}, grad norm {:.2e}, max u = {:.6}",
        rep.status,
        rep.iterations,
        rep.energy.total,
        rep.grad_norm,
        rep.solution.max_abs()
    );

    let trace: Vec<TracePoint> = rep
        .iterates
        .iter()
        .zip(&rep.trace)
        .map(|(u, row)| TracePoint {
            u: u.clone(),
            energy: row.total,
            grad_norm: row.grad_norm,
        })
        .collect();
    if !trace.is_empty() {
        let ps = ps_diagnostics(&prob, &trace)?;
        println!("sup norm {:.6}, unbounded {}", ps.sup_norm, ps.unbounded);
        println!("difference modulars {:?}", ps.difference_modulars);
    }
    Ok(())
}

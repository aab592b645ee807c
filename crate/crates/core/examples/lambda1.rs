//! First eigenvalue of `-u'' = lambda u` by the Rayleigh-quotient sweep, and
//! the degenerate sweep of the superlinear model.

use std::f64::consts::PI;
use std::sync::Arc;

use varexp::energy::Problem;
use varexp::solvers::*;
use varexp::*;

fn problem(mesh: &Arc<Mesh>, q: f64) -> Result<Problem> {
    let p = ExponentField::constant(mesh, 2.0)?;
    let q = ExponentField::constant(mesh, q)?;
    Problem::new(mesh.clone(), OperatorKernel::px_laplacian(p), Reaction::power_uniform(mesh, q, 1.0)?)
}

fn main() -> Result<()> {
    let mesh = Arc::new(Mesh::interval(0.0, 1.0, 256)?);
    let cfg = SolverConfig::default();
    for q in [2.0, 4.0] {
        let l = lambda1_minimize(&problem(&mesh, q)?, &cfg)?;
        println!("q = {q}: estimate {:.6} (pi^2 = {:.6}), degenerate {}", l.estimate, PI * PI, l.degenerate);
        println!("  log-log slope {:.4}, best scale {:.3e}, {} probes", l.log_log_slope, l.best_scale, l.probes);
        for s in &l.sweep {
            println!("  {:>10.3e} {:>14.6e}", s.scale, s.quotient);
        }
    }
    Ok(())
}

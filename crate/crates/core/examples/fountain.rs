//! Infinitely many solutions of `-u'' = u^3`: a subspace ladder and the
//! critical levels found on it.

use std::sync::Arc;

use varexp::energy::Problem;
use varexp::solvers::*;
use varexp::*;

fn main() -> Result<()> {
    env_logger::init();
    let mesh = Arc::new(Mesh::interval(0.0, 1.0, 192)?);
    let p = ExponentField::constant(&mesh, 2.0)?;
    let q = ExponentField::constant(&mesh, 4.0)?;
    let prob = Problem::new(mesh.clone(), OperatorKernel::px_laplacian(p), Reaction::power_uniform(&mesh, q, 1.0)?)?;
    let cfg = SolverConfig::default();

    let ladder = build_subspace_ladder(&prob, 5, &cfg)?;
    println!("ladder eigenvalues {:.4?}", ladder.eigenvalues);
    println!("alpha_k            {:.4?}", ladder.alpha);

    let res = fountain_search(&prob, &ladder, &cfg)?;
    let e1 = res.solutions.first().map_or(f64::NAN, |s| s.report.energy.total);
    println!("{:>2} {:>14} {:>10} {:>6} {:>10}", "k", "energy", "grad", "signs", "E/(k^4 E1)");
    for s in &res.solutions {
        let k = (s.sign_changes + 1) as f64;
        println!(
            "{:>2} {:>14.8} {:>10.2e} {:>6} {:>10.6}",
            s.level,
            s.report.energy.total,
            s.report.grad_norm,
            s.sign_changes,
            s.report.energy.total / (k.powi(4) * e1)
        );
    }
    for f in &res.failures {
        println!("level {} ({:+}) failed: {}", f.level, f.start_sign, f.reason);
    }
    Ok(())
}

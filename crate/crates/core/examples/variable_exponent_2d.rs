//! Mountain pass on the unit square with variable `p`, `q` and coefficient.

use std::f64::consts::PI;
use std::sync::Arc;

use varexp::energy::Problem;
use varexp::solvers::*;
use varexp::*;

fn main() -> Result<()> {
    env_logger::init();
    let mesh = Arc::new(Mesh::rectangle([0.0, 0.0], [1.0, 1.0], [20, 20])?);
    let p = ExponentField::build(&FieldSpec::expr("1.8 + 0.4*x"), &mesh)?;
    let q = ExponentField::build(&FieldSpec::expr("3 + 0.5*y"), &mesh)?;
    let c = FieldSpec::expr("1 + 0.5*sin(pi*x)").sample(&mesh)?;
    println!("{:?}", check_admissibility(&p, &q, &mesh)?);
    let prob = Problem::new(mesh.clone(), OperatorKernel::px_laplacian(p), Reaction::power(&mesh, q, c)?)?;

    let cfg = SolverConfig::default();
    let phi = enforce_zero_trace(&mesh, &GridFunction::from_fn(&mesh, |x| (PI * x[0]).sin() * (PI * x[1]).sin()));
    let geo = verify_mp_geometry(&prob, &phi, 32, &cfg)?;
    let rep = mountain_pass_solve(&prob, &geo, &cfg)?;
    println!(
        "{:?}: E = {:.6} (rho {:.3e}), grad norm {:.2e}, max u {:.4}",
        rep.status,
        rep.energy.total,
        geo.rho,
        rep.grad_norm,
        rep.solution.max_abs()
    );
    Ok(())
}

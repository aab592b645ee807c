//! Modular, Luxemburg norm and zero-trace Sobolev norm for a variable exponent.

use varexp::modular::{gradient_modular, holder_pairing_bound};
use varexp::*;

fn main() -> Result<()> {
    let mesh = Mesh::interval(0.0, 1.0, 256)?;
    let p = ExponentField::build(&FieldSpec::expr("2 + step(x - 0.5)"), &mesh)?;
    let u = enforce_zero_trace(&mesh, &GridFunction::from_fn(&mesh, |x| (std::f64::consts::PI * x[0]).sin()));

    println!("p- = {}, p+ = {}", p.p_minus(), p.p_plus());
    for t in [0.25, 1.0, 4.0] {
        let v = u.scaled(t);
        let rho = modular(&mesh, &v, &p)?;
        let n = luxemburg_norm(&mesh, &v, &p)?;
        println!(
            "t = {t:<5} rho = {rho:<12.6} |u| = {:<12.6} rho(u/|u|) - 1 = {:+.1e} ({} bisections)",
            n.value,
            n.modular_at_value - 1.0,
            n.bisection_iterations
        );
    }
    println!("gradient modular {:.6}", gradient_modular(&mesh, &u, &p)?);
    println!("sobolev norm     {:.6}", sobolev0_norm(&mesh, &u, &p)?);

    let ones = GridFunction::from_fn(&mesh, |_| 1.0);
    let (lhs, rhs) = holder_pairing_bound(&mesh, &u, &ones, &p)?;
    println!("Hölder pairing   {lhs:.6} <= {rhs:.6}");
    Ok(())
}

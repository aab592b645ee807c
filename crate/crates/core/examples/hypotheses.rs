//! Admissibility of the exponents and sampled structure checks for each
//! built-in kernel family.

use varexp::model::{simon_ratio_floor, verify_kernel_hypotheses, verify_reaction_hypotheses, KernelKind, SamplingPlan};
use varexp::*;

fn main() -> Result<()> {
    let mesh = Mesh::interval(0.0, 1.0, 64)?;
    let p = ExponentField::build(&FieldSpec::expr("2.2 + 0.3*sin(pi*x)"), &mesh)?;
    let q = ExponentField::constant(&mesh, 4.0)?;
    let adm = check_admissibility(&p, &q, &mesh)?;
    println!("{adm:#?}");

    let plan = SamplingPlan::default();
    let r = Reaction::power_uniform(&mesh, q, 1.0)?;
    for kind in [KernelKind::PxLaplacian, KernelKind::WeightedPxLaplacian, KernelKind::PxMeanCurvature] {
        let k = OperatorKernel::new(kind, p.clone())?;
        let report = verify_kernel_hypotheses(&k, &mesh, &plan)?.merge(verify_reaction_hypotheses(&r, &p, &mesh, &plan)?);
        println!("\n{kind:?}");
        for c in &report.checks {
            let margin = c.worst.as_ref().map_or(f64::NAN, |w| w.margin);
            println!("  {:<5} {:?} (worst margin {margin:.3e}, {} samples)", c.hypothesis.to_string(), c.status, c.samples);
        }
        let simon = simon_ratio_floor(&k, &mesh, 10_000, 1);
        println!("  monotonicity ratio floor {:.4}", simon.floor());
    }
    Ok(())
}

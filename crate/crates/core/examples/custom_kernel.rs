//! User-supplied kernel and reaction: `A(s) = 1 + s^2` and `f(t) = t^3 + t^5`.
//!
//! The cubic term dominates near zero, so the sampled growth and decay checks
//! report violations; the mountain-pass solver still finds a critical point.

use std::f64::consts::PI;
use std::sync::Arc;

use varexp::energy::Problem;
use varexp::model::{
    verify_kernel_hypotheses, verify_reaction_hypotheses, KernelFn, ReactionFn, ReactionParams, ReactionSite,
    SamplingPlan, Site,
};
use varexp::solvers::*;
use varexp::*;

#[derive(Debug)]
struct Stiffening;

impl KernelFn for Stiffening {
    fn value(&self, _: &Site, s: f64) -> f64 {
        1.0 + s * s
    }

    fn derivative(&self, _: &Site, s: f64) -> Option<f64> {
        Some(2.0 * s)
    }

    fn potential(&self, _: &Site, t: f64) -> Option<f64> {
        Some(0.5 * t * t + 0.25 * t.powi(4))
    }
}

#[derive(Debug)]
struct CubicQuintic;

impl ReactionFn for CubicQuintic {
    fn value(&self, _: &ReactionSite, t: f64) -> f64 {
        t.powi(3) + t.powi(5)
    }

    fn primitive(&self, _: &ReactionSite, t: f64) -> f64 {
        t.powi(4) / 4.0 + t.powi(6) / 6.0
    }
}

fn main() -> Result<()> {
    env_logger::init();
    let mesh = Arc::new(Mesh::interval(0.0, 1.0, 128)?);
    let p = ExponentField::constant(&mesh, 4.0)?;
    let q = ExponentField::constant(&mesh, 6.0)?;
    let k = OperatorKernel::custom(Arc::new(Stiffening), p.clone(), vec![1.0; mesh.node_count()], 2.0, 1.0)?;
    let params = ReactionParams {
        growth_constant: 2.0,
        mu: 4.5,
        threshold: 1.0,
        odd: true,
    };
    let r = Reaction::custom(&mesh, Arc::new(CubicQuintic), q, params)?;

    let plan = SamplingPlan::default();
    let report = verify_kernel_hypotheses(&k, &mesh, &plan)?.merge(verify_reaction_hypotheses(&r, &p, &mesh, &plan)?);
    for c in &report.checks {
        println!("{:<5} {:?}", c.hypothesis.to_string(), c.status);
    }

    let prob = Problem::new(mesh.clone(), k, r)?;
    let cfg = SolverConfig::default();
    let phi = enforce_zero_trace(&mesh, &GridFunction::from_fn(&mesh, |x| (PI * x[0]).sin()));
    let geo = verify_mp_geometry(&prob, &phi, 16, &cfg)?;
    let rep = mountain_pass_solve(&prob, &geo, &cfg)?;
    println!(
        "{:?}: E = {:.6}, grad norm {:.2e}, max u {:.4}",
        rep.status,
        rep.energy.total,
        rep.grad_norm,
        rep.solution.max_abs()
    );
    Ok(())
}

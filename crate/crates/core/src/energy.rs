//! The discrete energy `E(u) = Σ_e |e|·Φ(x_e, |∇u|_e) − Σ_e |e|·F(x_e, ū_e)`,
//! its exact derivative, and monotonicity and Palais–Smale diagnostics.
//!
//! `ū_e` is the mean of the element's vertex values and `x_e` its centroid;
//! the exponent used on an element is the mean of its vertex exponents.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponent::ExponentField;
use crate::mesh::{GridFunction, Mesh};
use crate::model::{OperatorKernel, Reaction, ReactionSite, Site};
use crate::modular;

/// The boundary value problem `−div(A(x,|∇u|)∇u) = f(x,u)`, `u = 0` on `∂Ω`.
#[derive(Debug, Clone)]
pub struct Problem {
    mesh: Arc<Mesh>,
    kernel: OperatorKernel,
    reaction: Reaction,
    sites: Vec<Site>,
    reaction_sites: Vec<ReactionSite>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyBreakdown {
    /// Operator part `I(u) = ∫Φ(x, |∇u|)`.
    pub e0: f64,
    /// Reaction part `J(u) = ∫F(x, u)`.
    pub j: f64,
    /// `e0 − j`.
    pub total: f64,
}

impl Problem {
    pub fn new(mesh: Arc<Mesh>, kernel: OperatorKernel, reaction: Reaction) -> Result<Self> {
        mesh.check_nodal(kernel.exponent().len())?;
        mesh.check_nodal(reaction.exponent().len())?;
        let pe = kernel.exponent().element_values();
        let sites = mesh
            .elements()
            .iter()
            .zip(pe)
            .map(|(el, &p)| Site { x: el.centroid, p })
            .collect();
        let reaction_sites = (0..mesh.element_count())
            .map(|e| reaction.element_site(&mesh, e))
            .collect();
        Ok(Problem {
            mesh,
            kernel,
            reaction,
            sites,
            reaction_sites,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn kernel(&self) -> &OperatorKernel {
        &self.kernel
    }

    pub fn reaction(&self) -> &Reaction {
        &self.reaction
    }

    pub fn p(&self) -> &ExponentField {
        self.kernel.exponent()
    }

    pub fn q(&self) -> &ExponentField {
        self.reaction.exponent()
    }

    /// The problem with reaction `λ f`.
    pub fn with_lambda(&self, lambda: f64) -> Problem {
        Problem {
            reaction: self.reaction.scaled(lambda),
            ..self.clone()
        }
    }

    fn check(&self, u: &GridFunction) -> Result<()> {
        self.mesh.check_nodal(u.len())
    }

    /// `‖u‖` in the zero-trace Sobolev space with exponent `p`.
    pub fn norm(&self, u: &GridFunction) -> Result<f64> {
        modular::sobolev0_norm(&self.mesh, u, self.p())
    }
}

#[inline]
fn norm2(g: [f64; 2]) -> f64 {
    (g[0] * g[0] + g[1] * g[1]).sqrt()
}

pub fn energy(prob: &Problem, u: &GridFunction) -> Result<EnergyBreakdown> {
    prob.check(u)?;
    Ok(energy_unchecked(prob, u.values()))
}

pub(crate) fn energy_unchecked(prob: &Problem, u: &[f64]) -> EnergyBreakdown {
    let (mut e0, mut j) = (0.0, 0.0);
    for (e, el) in prob.mesh.elements().iter().enumerate() {
        let s = norm2(el.gradient_of(u));
        if s != 0.0 {
            e0 += el.measure * prob.kernel.potential(&prob.sites[e], s);
        }
        let ub = el.average_of(u);
        if ub != 0.0 {
            j += el.measure * prob.reaction.primitive(&prob.reaction_sites[e], ub);
        }
    }
    EnergyBreakdown {
        e0,
        j,
        total: e0 - j,
    }
}

/// `E′(u)v = Σ_e |e|·(A(x_e,|∇u|)∇u·∇v − f(x_e, ū_e) v̄_e)`.
pub fn directional_derivative(prob: &Problem, u: &GridFunction, v: &GridFunction) -> Result<f64> {
    prob.check(u)?;
    prob.check(v)?;
    let (u, v) = (u.values(), v.values());
    let mut total = 0.0;
    for (e, el) in prob.mesh.elements().iter().enumerate() {
        let gu = el.gradient_of(u);
        let s = norm2(gu);
        if s != 0.0 {
            let gv = el.gradient_of(v);
            let a = prob.kernel.value(&prob.sites[e], s);
            total += el.measure * a * (gu[0] * gv[0] + gu[1] * gv[1]);
        }
        let ub = el.average_of(u);
        total -= el.measure * prob.reaction.value(&prob.reaction_sites[e], ub) * el.average_of(v);
    }
    Ok(total)
}

/// Which parts of the energy a gradient assembly includes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Total,
    Operator,
    Reaction,
}

/// Nodal gradient `g_i = E′(u)δ_i` for interior nodes, zero on the boundary.
pub fn gradient_vector(prob: &Problem, u: &GridFunction) -> Result<GridFunction> {
    prob.check(u)?;
    Ok(GridFunction::from_vec(assemble(prob, u.values(), Part::Total)))
}

/// Gradient of `I` (operator part) or `J` (reaction part) alone.
pub fn part_gradient(prob: &Problem, u: &GridFunction, part: Part) -> Result<GridFunction> {
    prob.check(u)?;
    Ok(GridFunction::from_vec(assemble(prob, u.values(), part)))
}

pub(crate) fn assemble(prob: &Problem, u: &[f64], part: Part) -> Vec<f64> {
    let mesh = &prob.mesh;
    let mut g = vec![0.0; u.len()];
    for (e, el) in mesh.elements().iter().enumerate() {
        let nv = el.vertex_count;
        if part != Part::Reaction {
            let gu = el.gradient_of(u);
            let s = norm2(gu);
            if s != 0.0 {
                let a = el.measure * prob.kernel.value(&prob.sites[e], s);
                for k in 0..nv {
                    g[el.nodes[k]] += a * (el.grad[k][0] * gu[0] + el.grad[k][1] * gu[1]);
                }
            }
        }
        if part != Part::Operator {
            let ub = el.average_of(u);
            let f = prob.reaction.value(&prob.reaction_sites[e], ub);
            if f != 0.0 {
                // J enters with a minus sign in the total, a plus sign on its own
                let w = if part == Part::Total { -1.0 } else { 1.0 } * el.measure * f / nv as f64;
                for k in 0..nv {
                    g[el.nodes[k]] += w;
                }
            }
        }
    }
    for &b in mesh.boundary_nodes() {
        g[b] = 0.0;
    }
    g
}

/// Stopping-test norm of an assembled gradient: `(Σ g_i² / |cell|)^{1/2}`.
pub fn grad_norm(mesh: &Mesh, g: &GridFunction) -> f64 {
    grad_norm_of(mesh, g.values())
}

pub(crate) fn grad_norm_of(mesh: &Mesh, g: &[f64]) -> f64 {
    (g.iter().map(|x| x * x).sum::<f64>() / mesh.cell_measure()).sqrt()
}

/// `(E₀′(u) − E₀′(v))(u − v)`, nonnegative for a monotone operator.
pub fn monotone_gap(prob: &Problem, u: &GridFunction, v: &GridFunction) -> Result<f64> {
    prob.check(u)?;
    prob.check(v)?;
    let (u, v) = (u.values(), v.values());
    let mut total = 0.0;
    for (e, el) in prob.mesh.elements().iter().enumerate() {
        let gu = el.gradient_of(u);
        let gv = el.gradient_of(v);
        let (su, sv) = (norm2(gu), norm2(gv));
        let au = if su == 0.0 { 0.0 } else { prob.kernel.value(&prob.sites[e], su) };
        let av = if sv == 0.0 { 0.0 } else { prob.kernel.value(&prob.sites[e], sv) };
        let d = [gu[0] - gv[0], gu[1] - gv[1]];
        total += el.measure * ((au * gu[0] - av * gv[0]) * d[0] + (au * gu[1] - av * gv[1]) * d[1]);
    }
    Ok(total)
}

/// One recorded iterate of a solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct TracePoint {
    pub u: GridFunction,
    pub energy: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsReport {
    /// `sup_n ‖u_n‖`.
    pub sup_norm: f64,
    pub first_norm: f64,
    pub last_grad_norm: f64,
    /// `∫|∇(u_n − u_N)|^{p(x)}` against the last iterate `u_N`.
    pub difference_modulars: Vec<f64>,
    /// Set when `sup_n ‖u_n‖` exceeds a thousand times `‖u_0‖` (or is not finite).
    pub unbounded: bool,
}

/// Boundedness and strong-convergence surrogates for a Palais–Smale sequence.
pub fn ps_diagnostics(prob: &Problem, trace: &[TracePoint]) -> Result<PsReport> {
    let last = trace
        .last()
        .ok_or_else(|| Error::InvalidArgument("empty trace".into()))?;
    let mut norms = Vec::with_capacity(trace.len());
    let mut difference_modulars = Vec::with_capacity(trace.len());
    for t in trace {
        norms.push(prob.norm(&t.u)?);
        difference_modulars.push(modular::gradient_modular(&prob.mesh, &t.u.sub(&last.u), prob.p())?);
    }
    let sup_norm = norms.iter().copied().fold(0.0, f64::max);
    let first_norm = norms[0];
    let unbounded = !sup_norm.is_finite()
        || (first_norm > 0.0 && sup_norm > 1e3 * first_norm)
        || norms.iter().any(|n| !n.is_finite());
    Ok(PsReport {
        sup_norm,
        first_norm,
        last_grad_norm: last.grad_norm,
        difference_modulars,
        unbounded,
    })
}

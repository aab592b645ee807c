//! Operator kernels `A(x, s)`, reactions `f(x, t)` and sampling-based
//! verifiers for the structural hypotheses they are required to satisfy.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::ExponentField;
use crate::mesh::Mesh;
use crate::quadrature::adaptive_simpson;

/// Floor applied to `s` when a power kernel is singular at the origin.
pub const S_EPS: f64 = 1e-12;
/// Absolute tolerance of the quadrature fallback for `Φ`.
pub const PHI_QUAD_TOL: f64 = 1e-10;
/// Relative slack below which a negative margin is treated as round-off.
pub const MARGIN_SLACK: f64 = 1e-9;

/// Where a kernel is evaluated: spatial position and local exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Site {
    pub x: [f64; 2],
    pub p: f64,
}

/// User-supplied kernel `A(x, s)`.
///
/// `derivative` should return `∂ₛA`. When it returns `None` a central
/// difference with step `1e-6·max(1, s)` is used; expect roughly six
/// significant digits from it. When `potential` returns `None`,
/// `Φ(x, t) = ∫₀ᵗ sA(x, s) ds` is computed by adaptive quadrature.
pub trait KernelFn: Send + Sync + fmt::Debug {
    fn value(&self, site: &Site, s: f64) -> f64;

    fn derivative(&self, _site: &Site, _s: f64) -> Option<f64> {
        None
    }

    fn potential(&self, _site: &Site, _t: f64) -> Option<f64> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    /// `A = s^{p(x)−2}`
    PxLaplacian,
    /// `A = p(x) s^{p(x)−2}`
    WeightedPxLaplacian,
    /// `A = (1 + s²)^{(p(x)−2)/2}`
    PxMeanCurvature,
    Custom,
}

#[derive(Debug, Clone)]
enum KernelImpl {
    Builtin(KernelKind),
    Custom(Arc<dyn KernelFn>),
}

/// The map `(x, s) ↦ A(x, s)` together with its potential and the
/// structural constants `a₁(·)`, `a₂`, `a₃`.
#[derive(Debug, Clone)]
pub struct OperatorKernel {
    imp: KernelImpl,
    p: ExponentField,
    a1: Vec<f64>,
    a2: f64,
    a3: f64,
}

/// Result of a pointwise kernel evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEval {
    pub value: f64,
    /// Set when `p(x) < 2`, `s < S_EPS` and the value was taken at `S_EPS`.
    pub singular_origin: bool,
}

impl OperatorKernel {
    /// One of the three named families, with constants that make the growth
    /// and ellipticity bounds hold by construction.
    pub fn new(kind: KernelKind, p: ExponentField) -> Result<Self> {
        let (pm, pp) = (p.p_minus(), p.p_plus());
        let (a1, a2, a3) = match kind {
            KernelKind::PxLaplacian => (vec![0.0; p.len()], 1.0 + pp, f64::min(1.0, pm - 1.0)),
            KernelKind::WeightedPxLaplacian => {
                (vec![0.0; p.len()], 1.0 + pp, pm * f64::min(1.0, pm - 1.0))
            }
            KernelKind::PxMeanCurvature => {
                // (1+s²)^{(p−2)/2} s ≤ 2^{(p−2)/2} max(1, s^{p−1}) when p > 2
                let a1 = p
                    .node_values()
                    .iter()
                    .map(|&v| if v > 2.0 { 2f64.powf(0.5 * (v - 2.0)) } else { 0.0 })
                    .collect();
                let a2 = f64::max(1.0 + pp, 2f64.powf(0.5 * (pp - 2.0)));
                let a3 = if pm >= 2.0 {
                    1.0
                } else {
                    f64::min(1.0, pm - 1.0) * 2f64.powf(0.5 * (pm - 2.0))
                };
                (a1, a2, a3)
            }
            KernelKind::Custom => {
                return Err(Error::InvalidArgument(
                    "custom kernels are built with OperatorKernel::custom".into(),
                ))
            }
        };
        Ok(OperatorKernel {
            imp: KernelImpl::Builtin(kind),
            p,
            a1,
            a2,
            a3,
        })
    }

    pub fn px_laplacian(p: ExponentField) -> Self {
        OperatorKernel::new(KernelKind::PxLaplacian, p).expect("builtin family")
    }

    pub fn weighted_px_laplacian(p: ExponentField) -> Self {
        OperatorKernel::new(KernelKind::WeightedPxLaplacian, p).expect("builtin family")
    }

    pub fn px_mean_curvature(p: ExponentField) -> Self {
        OperatorKernel::new(KernelKind::PxMeanCurvature, p).expect("builtin family")
    }

    /// Custom kernel; `a1` is nodal and all constants must be supplied.
    pub fn custom(
        f: Arc<dyn KernelFn>,
        p: ExponentField,
        a1: Vec<f64>,
        a2: f64,
        a3: f64,
    ) -> Result<Self> {
        if a1.len() != p.len() {
            return Err(Error::MeshMismatch {
                expected: p.len(),
                found: a1.len(),
            });
        }
        if !(a2 > 0.0 && a3 > 0.0) {
            return Err(Error::InvalidArgument("a2 and a3 must be positive".into()));
        }
        Ok(OperatorKernel {
            imp: KernelImpl::Custom(f),
            p,
            a1,
            a2,
            a3,
        })
    }

    pub fn kind(&self) -> KernelKind {
        match &self.imp {
            KernelImpl::Builtin(k) => *k,
            KernelImpl::Custom(_) => KernelKind::Custom,
        }
    }

    pub fn exponent(&self) -> &ExponentField {
        &self.p
    }

    pub fn a1(&self) -> &[f64] {
        &self.a1
    }

    pub fn a2(&self) -> f64 {
        self.a2
    }

    pub fn a3(&self) -> f64 {
        self.a3
    }

    pub fn node_site(&self, mesh: &Mesh, node: usize) -> Site {
        Site {
            x: mesh.node(node),
            p: self.p.node_values()[node],
        }
    }

    fn regularize(&self, p: f64, s: f64) -> (f64, bool) {
        match self.imp {
            KernelImpl::Builtin(KernelKind::PxLaplacian | KernelKind::WeightedPxLaplacian)
                if p < 2.0 && s < S_EPS =>
            {
                (S_EPS, true)
            }
            _ => (s, false),
        }
    }

    /// `A(x, s)`, regularized at the origin for the singular power families.
    #[inline]
    pub fn value(&self, site: &Site, s: f64) -> f64 {
        let (s, _) = self.regularize(site.p, s);
        match &self.imp {
            KernelImpl::Builtin(KernelKind::PxLaplacian) => s.powf(site.p - 2.0),
            KernelImpl::Builtin(KernelKind::WeightedPxLaplacian) => site.p * s.powf(site.p - 2.0),
            KernelImpl::Builtin(KernelKind::PxMeanCurvature) => {
                (0.5 * (site.p - 2.0) * (s * s).ln_1p()).exp()
            }
            KernelImpl::Builtin(KernelKind::Custom) => unreachable!(),
            KernelImpl::Custom(f) => f.value(site, s),
        }
    }

    /// `∂ₛA(x, s)`.
    pub fn derivative(&self, site: &Site, s: f64) -> f64 {
        let p = site.p;
        match &self.imp {
            KernelImpl::Builtin(kind) => {
                if p == 2.0 {
                    return 0.0;
                }
                match kind {
                    KernelKind::PxLaplacian | KernelKind::WeightedPxLaplacian => {
                        let s = if p < 3.0 { s.max(S_EPS) } else { s };
                        let w = if *kind == KernelKind::WeightedPxLaplacian { p } else { 1.0 };
                        w * (p - 2.0) * s.powf(p - 3.0)
                    }
                    KernelKind::PxMeanCurvature => {
                        (p - 2.0) * s * (0.5 * (p - 4.0) * (s * s).ln_1p()).exp()
                    }
                    KernelKind::Custom => unreachable!(),
                }
            }
            KernelImpl::Custom(f) => f.derivative(site, s).unwrap_or_else(|| {
                let h = 1e-6 * s.max(1.0);
                if s >= h {
                    (f.value(site, s + h) - f.value(site, s - h)) / (2.0 * h)
                } else {
                    (f.value(site, s + h) - f.value(site, s)) / h
                }
            }),
        }
    }

    /// `Φ(x, t) = ∫₀ᵗ sA(x, s) ds`.
    pub fn potential(&self, site: &Site, t: f64) -> f64 {
        let p = site.p;
        match &self.imp {
            KernelImpl::Builtin(KernelKind::PxLaplacian) => t.powf(p) / p,
            KernelImpl::Builtin(KernelKind::WeightedPxLaplacian) => t.powf(p),
            KernelImpl::Builtin(KernelKind::PxMeanCurvature) => {
                (0.5 * p * (t * t).ln_1p()).exp_m1() / p
            }
            KernelImpl::Builtin(KernelKind::Custom) => unreachable!(),
            KernelImpl::Custom(f) => f
                .potential(site, t)
                .unwrap_or_else(|| quadrature_potential(self, site, t)),
        }
    }

    /// `A(x, s)·s`, the flux magnitude; zero at `s = 0`.
    #[inline]
    pub(crate) fn flux(&self, site: &Site, s: f64) -> f64 {
        if s == 0.0 {
            0.0
        } else {
            self.value(site, s) * s
        }
    }
}

/// `∫₀ᵗ sA(x, s) ds` by adaptive Simpson quadrature.
pub fn quadrature_potential(k: &OperatorKernel, site: &Site, t: f64) -> f64 {
    adaptive_simpson(&|s: f64| k.flux(site, s), 0.0, t, PHI_QUAD_TOL)
}

fn check_node(len: usize, node: usize) -> Result<()> {
    if node >= len {
        return Err(Error::MeshMismatch {
            expected: len,
            found: node,
        });
    }
    Ok(())
}

/// `A(x_node, s)` with the regularization flag.
pub fn kernel_eval(k: &OperatorKernel, mesh: &Mesh, node: usize, s: f64) -> Result<KernelEval> {
    check_node(mesh.node_count(), node)?;
    if !(s >= 0.0) {
        return Err(Error::InvalidArgument(format!("kernel argument {s} < 0")));
    }
    let site = k.node_site(mesh, node);
    let (_, singular_origin) = k.regularize(site.p, s);
    Ok(KernelEval {
        value: k.value(&site, s),
        singular_origin,
    })
}

/// `Φ(x_node, t)`.
pub fn potential_phi(k: &OperatorKernel, mesh: &Mesh, node: usize, t: f64) -> Result<f64> {
    check_node(mesh.node_count(), node)?;
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("potential argument {t} < 0")));
    }
    Ok(k.potential(&k.node_site(mesh, node), t))
}

/// Monotonicity gap `(A(|ξ|)ξ − A(|ζ|)ζ)·(ξ − ζ)` and the matching lower-bound
/// shape: `|ξ−ζ|^p` for `p ≥ 2`, `|ξ−ζ|² min{1, (|ξ|+|ζ|)^{p−2}}` for `p < 2`.
pub fn simon_gap(
    k: &OperatorKernel,
    mesh: &Mesh,
    node: usize,
    xi: &[f64],
    zeta: &[f64],
) -> Result<(f64, f64)> {
    check_node(mesh.node_count(), node)?;
    if xi.len() != zeta.len() {
        return Err(Error::InvalidArgument("ξ and ζ differ in length".into()));
    }
    simon_gap_at(k, &k.node_site(mesh, node), xi, zeta)
}

pub(crate) fn simon_gap_at(
    k: &OperatorKernel,
    site: &Site,
    xi: &[f64],
    zeta: &[f64],
) -> Result<(f64, f64)> {
    let norm = |v: &[f64]| v.iter().map(|c| c * c).sum::<f64>().sqrt();
    let (nx, nz) = (norm(xi), norm(zeta));
    if nx == 0.0 && nz == 0.0 {
        return Err(Error::BothZero);
    }
    let ax = if nx == 0.0 { 0.0 } else { k.value(site, nx) };
    let az = if nz == 0.0 { 0.0 } else { k.value(site, nz) };
    let mut gap = 0.0;
    let mut diff2 = 0.0;
    for (a, b) in xi.iter().zip(zeta) {
        let d = a - b;
        gap += (ax * a - az * b) * d;
        diff2 += d * d;
    }
    let diff = diff2.sqrt();
    let bound = if site.p >= 2.0 {
        diff.powf(site.p)
    } else {
        diff2 * f64::min(1.0, (nx + nz).powf(site.p - 2.0))
    };
    Ok((gap, bound))
}

/// Empirical lower bound of `gap / bound` for [`simon_gap`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimonEstimate {
    /// Smallest observed ratio over samples at nodes with `p(x) ≥ 2`.
    pub degenerate_floor: Option<f64>,
    /// Smallest observed ratio over samples at nodes with `p(x) < 2`.
    pub singular_floor: Option<f64>,
    /// Samples with a negative gap, or a non-positive ratio.
    pub violations: usize,
    pub samples: usize,
}

impl SimonEstimate {
    pub fn floor(&self) -> f64 {
        [self.degenerate_floor, self.singular_floor]
            .into_iter()
            .flatten()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Draws `samples_per_class` random pairs `(ξ, ζ)` at random nodes of each
/// exponent class (`p ≥ 2` and `p < 2`) and records the worst ratio.
pub fn simon_ratio_floor(
    k: &OperatorKernel,
    mesh: &Mesh,
    samples_per_class: usize,
    seed: u64,
) -> SimonEstimate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pv = k.exponent().node_values();
    let degenerate: Vec<usize> = (0..pv.len()).filter(|&i| pv[i] >= 2.0).collect();
    let singular: Vec<usize> = (0..pv.len()).filter(|&i| pv[i] < 2.0).collect();
    let dim = mesh.dim();
    let mut est = SimonEstimate {
        degenerate_floor: None,
        singular_floor: None,
        violations: 0,
        samples: 0,
    };
    for (class, floor) in [
        (&degenerate, &mut est.degenerate_floor),
        (&singular, &mut est.singular_floor),
    ] {
        if class.is_empty() {
            continue;
        }
        let mut worst = f64::INFINITY;
        for _ in 0..samples_per_class {
            let node = class[rng.gen_range(0..class.len())];
            let site = k.node_site(mesh, node);
            let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
                let scale = 10f64.powf(rng.gen_range(-3.0..3.0));
                (0..dim).map(|_| scale * rng.gen_range(-1.0..1.0)).collect()
            };
            let xi = draw(&mut rng);
            let zeta = if rng.gen_bool(0.1) { vec![0.0; dim] } else { draw(&mut rng) };
            let Ok((gap, bound)) = simon_gap_at(k, &site, &xi, &zeta) else {
                continue;
            };
            est.samples += 1;
            if gap < 0.0 {
                est.violations += 1;
                continue;
            }
            if bound > 0.0 {
                let r = gap / bound;
                if r <= 0.0 {
                    est.violations += 1;
                }
                worst = worst.min(r);
            }
        }
        if worst.is_finite() {
            *floor = Some(worst);
        }
    }
    est
}

/// Where a reaction is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReactionSite {
    pub x: [f64; 2],
    pub q: f64,
    /// Coefficient `c(x)` of the power family (1 for custom reactions).
    pub c: f64,
}

/// User-supplied reaction `f(x, t)` with primitive `F(x, t) = ∫₀ᵗ f(x, s) ds`.
pub trait ReactionFn: Send + Sync + fmt::Debug {
    fn value(&self, site: &ReactionSite, t: f64) -> f64;
    fn primitive(&self, site: &ReactionSite, t: f64) -> f64;
}

/// Hypothesis parameters carried by a reaction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReactionParams {
    /// `C` in `|f(x,t)| ≤ C|t|^{q(x)−1}`.
    pub growth_constant: f64,
    /// Ambrosetti–Rabinowitz exponent `μ`.
    pub mu: f64,
    /// Ambrosetti–Rabinowitz threshold `R`.
    pub threshold: f64,
    pub odd: bool,
}

#[derive(Debug, Clone)]
enum ReactionImpl {
    Power,
    Custom(Arc<dyn ReactionFn>),
}

/// The reaction `f(x, t)` with exponent `q(·)`.
///
/// The built-in family is `f = c(x)|t|^{q(x)−2}t`, `F = c(x)|t|^{q(x)}/q(x)`.
#[derive(Debug, Clone)]
pub struct Reaction {
    imp: ReactionImpl,
    q: ExponentField,
    c_nodes: Vec<f64>,
    c_elements: Vec<f64>,
    scale: f64,
    params: ReactionParams,
}

impl Reaction {
    /// Power family with nodal coefficient `c ≥ 0`. Defaults: `C = max c`
    /// (1 if `c ≡ 0`), `μ = q⁻`, `R = 1`, odd.
    pub fn power(mesh: &Mesh, q: ExponentField, c: Vec<f64>) -> Result<Self> {
        mesh.check_nodal(c.len())?;
        mesh.check_nodal(q.len())?;
        if let Some(node) = c.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { node });
        }
        if c.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidArgument("reaction coefficient must be ≥ 0".into()));
        }
        let cmax = c.iter().copied().fold(0.0, f64::max);
        let c_elements = mesh.elements().iter().map(|el| el.average_of(&c)).collect();
        let params = ReactionParams {
            growth_constant: if cmax > 0.0 { cmax } else { 1.0 },
            mu: q.p_minus(),
            threshold: 1.0,
            odd: true,
        };
        Ok(Reaction {
            imp: ReactionImpl::Power,
            q,
            c_nodes: c,
            c_elements,
            scale: 1.0,
            params,
        })
    }

    pub fn power_uniform(mesh: &Mesh, q: ExponentField, c: f64) -> Result<Self> {
        Reaction::power(mesh, q, vec![c; mesh.node_count()])
    }

    pub fn custom(
        mesh: &Mesh,
        f: Arc<dyn ReactionFn>,
        q: ExponentField,
        params: ReactionParams,
    ) -> Result<Self> {
        mesh.check_nodal(q.len())?;
        Ok(Reaction {
            imp: ReactionImpl::Custom(f),
            q,
            c_nodes: vec![1.0; mesh.node_count()],
            c_elements: vec![1.0; mesh.element_count()],
            scale: 1.0,
            params,
        })
    }

    pub fn with_params(mut self, params: ReactionParams) -> Self {
        self.params = params;
        self
    }

    /// The reaction multiplied by `factor` (the `λ f` of a parameterized problem).
    pub fn scaled(&self, factor: f64) -> Self {
        let mut r = self.clone();
        r.scale *= factor;
        r
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn exponent(&self) -> &ExponentField {
        &self.q
    }

    pub fn params(&self) -> &ReactionParams {
        &self.params
    }

    pub fn is_odd(&self) -> bool {
        self.params.odd
    }

    pub fn node_site(&self, mesh: &Mesh, node: usize) -> ReactionSite {
        ReactionSite {
            x: mesh.node(node),
            q: self.q.node_values()[node],
            c: self.c_nodes[node],
        }
    }

    pub(crate) fn element_site(&self, mesh: &Mesh, e: usize) -> ReactionSite {
        ReactionSite {
            x: mesh.elements()[e].centroid,
            q: self.q.element_values()[e],
            c: self.c_elements[e],
        }
    }

    #[inline]
    pub fn value(&self, site: &ReactionSite, t: f64) -> f64 {
        let v = match &self.imp {
            ReactionImpl::Power => {
                if t == 0.0 || site.c == 0.0 {
                    0.0
                } else {
                    site.c * t.abs().powf(site.q - 2.0) * t
                }
            }
            ReactionImpl::Custom(f) => f.value(site, t),
        };
        self.scale * v
    }

    #[inline]
    pub fn primitive(&self, site: &ReactionSite, t: f64) -> f64 {
        let v = match &self.imp {
            ReactionImpl::Power => {
                if t == 0.0 || site.c == 0.0 {
                    0.0
                } else {
                    site.c * t.abs().powf(site.q) / site.q
                }
            }
            ReactionImpl::Custom(f) => f.primitive(site, t),
        };
        self.scale * v
    }
}

/// `f(x_node, t)`.
pub fn reaction_eval(r: &Reaction, mesh: &Mesh, node: usize, t: f64) -> Result<f64> {
    check_node(mesh.node_count(), node)?;
    Ok(r.value(&r.node_site(mesh, node), t))
}

/// `F(x_node, t)`.
pub fn reaction_primitive(r: &Reaction, mesh: &Mesh, node: usize, t: f64) -> Result<f64> {
    check_node(mesh.node_count(), node)?;
    Ok(r.primitive(&r.node_site(mesh, node), t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hypothesis {
    A2,
    A3,
    A4,
    F1,
    F2,
    F3,
    F4,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Hypothesis::A2 => "(A2)",
            Hypothesis::A3 => "(A3)",
            Hypothesis::A4 => "(A4)",
            Hypothesis::F1 => "(f1)",
            Hypothesis::F2 => "(f2)",
            Hypothesis::F3 => "(f3)",
            Hypothesis::F4 => "(f4)",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HypothesisStatus {
    HoldsOnSample,
    Violated,
    NotApplicable,
}

/// Sample with the smallest (relative) margin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub node: usize,
    pub x: [f64; 2],
    /// The sampled `s` or `t`.
    pub arg: f64,
    /// Margin divided by the magnitude of the larger side; negative means violated.
    pub margin: f64,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisCheck {
    pub hypothesis: Hypothesis,
    pub status: HypothesisStatus,
    pub worst: Option<Witness>,
    pub samples: usize,
    /// Extra scalar reported by some checks (the decay ratio for (f3)).
    pub diagnostic: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct HypothesisReport {
    pub checks: Vec<HypothesisCheck>,
}

impl HypothesisReport {
    pub fn get(&self, h: Hypothesis) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.hypothesis == h)
    }

    pub fn status(&self, h: Hypothesis) -> Option<HypothesisStatus> {
        self.get(h).map(|c| c.status)
    }

    pub fn any_violated(&self) -> bool {
        self.checks
            .iter()
            .any(|c| c.status == HypothesisStatus::Violated)
    }

    pub fn merge(mut self, other: HypothesisReport) -> Self {
        self.checks.extend(other.checks);
        self
    }
}

/// Sample points for the hypothesis verifiers.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingPlan {
    /// Kernel arguments `s` (log-spaced).
    pub s_values: Vec<f64>,
    /// Magnitudes for the symmetric `t` range of (f1) and (f4).
    pub t_magnitudes: Vec<f64>,
    /// Upper end and count of the `[R, t_max]` range for (f2).
    pub t_max: f64,
    pub ar_count: usize,
    /// Decreasing `|t|` ladder for the (f3) decay diagnostic.
    pub t_small: Vec<f64>,
}

pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..n)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64))
        .collect()
}

impl Default for SamplingPlan {
    fn default() -> Self {
        SamplingPlan {
            s_values: log_space(1e-12, 1e3, 64),
            t_magnitudes: log_space(1e-6, 1e3, 48),
            t_max: 1e3,
            ar_count: 48,
            t_small: log_space(1e-1, 1e-6, 6),
        }
    }
}

/// Running worst-margin reduction for one hypothesis.
struct Tracker {
    hypothesis: Hypothesis,
    worst: Option<Witness>,
    samples: usize,
}

impl Tracker {
    fn new(hypothesis: Hypothesis) -> Self {
        Tracker {
            hypothesis,
            worst: None,
            samples: 0,
        }
    }

    /// Records `lhs ≥ rhs` at a sample, as a relative margin.
    fn record(&mut self, node: usize, x: [f64; 2], arg: f64, lhs: f64, rhs: f64) {
        let scale = lhs.abs().max(rhs.abs());
        let margin = if scale == 0.0 { 0.0 } else { (lhs - rhs) / scale };
        self.record_margin(node, x, arg, margin, None);
    }

    fn record_margin(&mut self, node: usize, x: [f64; 2], arg: f64, margin: f64, note: Option<String>) {
        self.samples += 1;
        let margin = if margin.is_nan() { f64::NEG_INFINITY } else { margin };
        if self.worst.as_ref().is_none_or(|w| margin < w.margin) {
            self.worst = Some(Witness {
                node,
                x,
                arg,
                margin,
                note,
            });
        }
    }

    fn finish(self, diagnostic: Option<f64>) -> HypothesisCheck {
        let violated = self
            .worst
            .as_ref()
            .is_some_and(|w| w.margin < -MARGIN_SLACK);
        HypothesisCheck {
            hypothesis: self.hypothesis,
            status: if violated {
                HypothesisStatus::Violated
            } else {
                HypothesisStatus::HoldsOnSample
            },
            worst: self.worst,
            samples: self.samples,
            diagnostic,
        }
    }
}

/// Checks the growth (A2), ellipticity (A3) and homogeneity (A4) bounds at
/// every node and every sampled `s`.
pub fn verify_kernel_hypotheses(
    k: &OperatorKernel,
    mesh: &Mesh,
    plan: &SamplingPlan,
) -> Result<HypothesisReport> {
    mesh.check_nodal(k.exponent().len())?;
    let pp = k.exponent().p_plus();
    let mut a2 = Tracker::new(Hypothesis::A2);
    let mut a3 = Tracker::new(Hypothesis::A3);
    let mut a4 = Tracker::new(Hypothesis::A4);
    for node in 0..mesh.node_count() {
        let site = k.node_site(mesh, node);
        let x = site.x;
        for &s in &plan.s_values {
            let a = k.value(&site, s);
            a2.record(node, x, s, k.a1()[node] + k.a2() * s.powf(site.p - 1.0), a * s);
            let ellip = f64::min(a, a + s * k.derivative(&site, s));
            a3.record(node, x, s, ellip, k.a3() * f64::min(1.0, s.powf(site.p - 2.0)));
            a4.record(node, x, s, pp * k.potential(&site, s), s * s * a);
        }
    }
    Ok(HypothesisReport {
        checks: vec![a2.finish(None), a3.finish(None), a4.finish(None)],
    })
}

/// Checks (f1)–(f4) for `r` against the operator exponent `p`.
pub fn verify_reaction_hypotheses(
    r: &Reaction,
    p: &ExponentField,
    mesh: &Mesh,
    plan: &SamplingPlan,
) -> Result<HypothesisReport> {
    mesh.check_nodal(r.exponent().len())?;
    mesh.check_nodal(p.len())?;
    let pp = p.p_plus();
    let params = *r.params();
    let big_c = params.growth_constant * r.scale();

    let mut f1 = Tracker::new(Hypothesis::F1);
    let mut f2 = Tracker::new(Hypothesis::F2);
    let mut f4 = Tracker::new(Hypothesis::F4);
    let ar_ts = if params.threshold > 0.0 && params.threshold < plan.t_max {
        log_space(params.threshold, plan.t_max, plan.ar_count)
    } else {
        vec![params.threshold.max(f64::MIN_POSITIVE)]
    };
    let mut any_nonzero = false;
    for node in 0..mesh.node_count() {
        let site = r.node_site(mesh, node);
        let x = site.x;
        for &m in &plan.t_magnitudes {
            for t in [m, -m] {
                let f = r.value(&site, t);
                any_nonzero |= f != 0.0;
                f1.record(node, x, t, big_c * t.abs().powf(site.q - 1.0), f.abs());
                let tf = t * f;
                let margin = if tf >= 0.0 { 0.0 } else { -1.0 };
                f4.record_margin(node, x, t, margin, None);
            }
        }
        for &t in &ar_ts {
            let big_f = r.primitive(&site, t);
            if params.mu * big_f <= 0.0 {
                f2.record_margin(node, x, t, -1.0, Some("F is not positive".into()));
            } else {
                f2.record(node, x, t, t * r.value(&site, t), params.mu * big_f);
            }
        }
    }
    if params.mu <= pp {
        f2.record_margin(0, mesh.node(0), params.mu, -1.0, Some(format!("μ = {} ≤ p⁺ = {pp}", params.mu)));
    }
    if !any_nonzero {
        f4.record_margin(0, mesh.node(0), 0.0, -1.0, Some("identically zero on sample".into()));
    }

    // (f3): sup over nodes of |f|/|t|^{p⁺−1} along a decreasing |t| ladder;
    // decay means the ratio at least halves across the ladder
    let mut f3 = Tracker::new(Hypothesis::F3);
    let ratio_at = |t: f64| -> (f64, usize) {
        let mut best = (0.0, 0);
        for node in 0..mesh.node_count() {
            let site = r.node_site(mesh, node);
            let v = f64::max(r.value(&site, t).abs(), r.value(&site, -t).abs())
                / t.powf(pp - 1.0);
            if v > best.0 {
                best = (v, node);
            }
        }
        best
    };
    let mut diagnostic = None;
    if let (Some(&t0), Some(&t1)) = (plan.t_small.first(), plan.t_small.last()) {
        let (r0, _) = ratio_at(t0);
        let (r1, n1) = ratio_at(t1);
        diagnostic = Some(r1);
        let margin = if r0 == 0.0 { 0.5 } else { 0.5 - r1 / r0 };
        let note = Some(format!("ratio {r0:e} at |t| = {t0:e}, {r1:e} at |t| = {t1:e}"));
        f3.record_margin(n1, mesh.node(n1), t1, margin, note);
        f3.samples = plan.t_small.len() * mesh.node_count();
    }

    Ok(HypothesisReport {
        checks: vec![f1.finish(None), f2.finish(None), f3.finish(diagnostic), f4.finish(None)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::ExponentField;

    fn unit(cells: usize) -> Mesh {
        Mesh::interval(0.0, 1.0, cells).unwrap()
    }

    #[test]
    fn kernel_values() {
        let m = unit(4);
        let p2 = ExponentField::constant(&m, 2.0).unwrap();
        let lap = OperatorKernel::px_laplacian(p2.clone());
        let mc = OperatorKernel::px_mean_curvature(p2);
        for s in [0.0, 0.3, 7.0] {
            assert_eq!(kernel_eval(&lap, &m, 1, s).unwrap().value, 1.0);
            assert_eq!(kernel_eval(&mc, &m, 1, s).unwrap().value, 1.0);
        }
        let p4 = ExponentField::constant(&m, 4.0).unwrap();
        let lap4 = OperatorKernel::px_laplacian(p4.clone());
        assert!((kernel_eval(&lap4, &m, 2, 3.0).unwrap().value - 9.0).abs() < 1e-12);
        let w4 = OperatorKernel::weighted_px_laplacian(p4);
        assert!((kernel_eval(&w4, &m, 2, 3.0).unwrap().value - 36.0).abs() < 1e-12);
    }

    #[test]
    fn singular_origin_is_flagged_not_thrown() {
        let m = unit(4);
        let k = OperatorKernel::px_laplacian(ExponentField::constant(&m, 1.5).unwrap());
        let e = kernel_eval(&k, &m, 0, 0.0).unwrap();
        assert!(e.singular_origin);
        assert!((e.value - S_EPS.powf(-0.5)).abs() < 1e-3);
        assert!(!kernel_eval(&k, &m, 0, 0.5).unwrap().singular_origin);
        assert!(kernel_eval(&k, &m, 0, -1.0).is_err());
    }

    #[test]
    fn potentials() {
        let m = unit(4);
        let p2 = ExponentField::constant(&m, 2.0).unwrap();
        let lap = OperatorKernel::px_laplacian(p2.clone());
        assert!((potential_phi(&lap, &m, 0, 1.0).unwrap() - 0.5).abs() < 1e-15);
        let mc = OperatorKernel::px_mean_curvature(p2);
        assert!((potential_phi(&mc, &m, 0, 1.0).unwrap() - 0.5).abs() < 1e-15);

        let mc3 = OperatorKernel::px_mean_curvature(ExponentField::constant(&m, 3.0).unwrap());
        let closed = potential_phi(&mc3, &m, 0, 2.0).unwrap();
        let want = (5f64.powf(1.5) - 1.0) / 3.0;
        assert!((closed - want).abs() < 1e-12);
        assert!((closed - 3.3934).abs() < 1e-4);
        let quad = quadrature_potential(&mc3, &mc3.node_site(&m, 0), 2.0);
        assert!((quad - want).abs() < 1e-10);
    }

    #[derive(Debug)]
    struct Linear;
    impl KernelFn for Linear {
        fn value(&self, _site: &Site, s: f64) -> f64 {
            1.0 + s
        }
    }

    #[test]
    fn custom_kernel_fallbacks() {
        let m = unit(4);
        let p = ExponentField::constant(&m, 3.0).unwrap();
        let k = OperatorKernel::custom(Arc::new(Linear), p, vec![0.0; 5], 2.0, 1.0).unwrap();
        let site = k.node_site(&m, 2);
        assert!((k.derivative(&site, 2.0) - 1.0).abs() < 1e-6);
        assert!((k.derivative(&site, 0.0) - 1.0).abs() < 1e-5);
        // ∫₀² s(1+s) ds = 2 + 8/3
        assert!((k.potential(&site, 2.0) - (2.0 + 8.0 / 3.0)).abs() < 1e-10);
        assert_eq!(k.kind(), KernelKind::Custom);
        assert!(OperatorKernel::new(KernelKind::Custom, ExponentField::constant(&m, 3.0).unwrap()).is_err());
    }

    #[test]
    fn kernel_hypotheses_builtin_families() {
        let m = unit(10);
        let plan = SamplingPlan::default();
        let pvar = ExponentField::build(&"2.5 + 0.5*sin(pi*x)".into(), &m).unwrap();
        let lap = OperatorKernel::px_laplacian(pvar.clone());
        let r = verify_kernel_hypotheses(&lap, &m, &plan).unwrap();
        assert!(!r.any_violated(), "{r:#?}");
        let a4 = r.get(Hypothesis::A4).unwrap();
        assert!(a4.worst.as_ref().unwrap().margin >= -1e-12);

        // constant p: a₃ = min(1, p − 1)
        for p in [1.5, 2.0, 3.5] {
            let k = OperatorKernel::px_laplacian(ExponentField::constant(&m, p).unwrap());
            assert_eq!(k.a3(), f64::min(1.0, p - 1.0));
            let r = verify_kernel_hypotheses(&k, &m, &plan).unwrap();
            assert_eq!(r.status(Hypothesis::A3), Some(HypothesisStatus::HoldsOnSample));
        }

        let mc2 = OperatorKernel::px_mean_curvature(ExponentField::constant(&m, 2.0).unwrap());
        let r = verify_kernel_hypotheses(&mc2, &m, &plan).unwrap();
        let a4 = r.get(Hypothesis::A4).unwrap();
        assert_eq!(a4.status, HypothesisStatus::HoldsOnSample);
        assert!(a4.worst.as_ref().unwrap().margin.abs() < 1e-12);

        for k in [
            OperatorKernel::weighted_px_laplacian(pvar.clone()),
            OperatorKernel::px_mean_curvature(pvar.clone()),
        ] {
            let r = verify_kernel_hypotheses(&k, &m, &plan).unwrap();
            assert!(!r.any_violated(), "{:?}: {r:#?}", k.kind());
        }
    }

    #[test]
    fn mean_curvature_below_two_fails_homogeneity_bound() {
        // with p ≡ p⁺ < 2, t²A(t) exceeds p⁺Φ(t) for every t > 0
        let m = unit(4);
        let k = OperatorKernel::px_mean_curvature(ExponentField::constant(&m, 1.5).unwrap());
        let r = verify_kernel_hypotheses(&k, &m, &SamplingPlan::default()).unwrap();
        let a4 = r.get(Hypothesis::A4).unwrap();
        assert_eq!(a4.status, HypothesisStatus::Violated);
        assert!(a4.worst.as_ref().unwrap().margin < 0.0);
        assert_eq!(r.status(Hypothesis::A2), Some(HypothesisStatus::HoldsOnSample));
        assert_eq!(r.status(Hypothesis::A3), Some(HypothesisStatus::HoldsOnSample));
    }

    #[test]
    fn simon_gap_examples() {
        let m = unit(4);
        let lap2 = OperatorKernel::px_laplacian(ExponentField::constant(&m, 2.0).unwrap());
        let (g, b) = simon_gap(&lap2, &m, 1, &[1.0, 2.0], &[-0.5, 0.25]).unwrap();
        assert!((g - b).abs() < 1e-14 && (g - (1.5f64.powi(2) + 1.75f64.powi(2))).abs() < 1e-14);
        assert_eq!(simon_gap(&lap2, &m, 1, &[0.3, 0.4], &[0.3, 0.4]).unwrap(), (0.0, 0.0));
        assert!(matches!(
            simon_gap(&lap2, &m, 1, &[0.0, 0.0], &[0.0, 0.0]),
            Err(Error::BothZero)
        ));
        let lap4 = OperatorKernel::px_laplacian(ExponentField::constant(&m, 4.0).unwrap());
        let (g, b) = simon_gap(&lap4, &m, 1, &[1.0, 0.0], &[0.0, 0.0]).unwrap();
        assert!((g - 1.0).abs() < 1e-15 && (b - 1.0).abs() < 1e-15);
    }

    #[test]
    fn simon_floor_is_positive() {
        let m = unit(20);
        let p = ExponentField::build(&"1.5 + 2*x".into(), &m).unwrap();
        for k in [
            OperatorKernel::px_laplacian(p.clone()),
            OperatorKernel::weighted_px_laplacian(p.clone()),
            OperatorKernel::px_mean_curvature(p.clone()),
        ] {
            let est = simon_ratio_floor(&k, &m, 2000, 7);
            assert_eq!(est.violations, 0);
            assert!(est.degenerate_floor.unwrap() > 0.0);
            assert!(est.singular_floor.unwrap() > 0.0);
        }
    }

    #[test]
    fn reaction_values() {
        let m = unit(4);
        let q4 = ExponentField::constant(&m, 4.0).unwrap();
        let r = Reaction::power_uniform(&m, q4, 1.0).unwrap();
        assert!((reaction_eval(&r, &m, 1, 2.0).unwrap() - 8.0).abs() < 1e-14);
        assert!((reaction_primitive(&r, &m, 1, 2.0).unwrap() - 4.0).abs() < 1e-14);
        assert_eq!(reaction_eval(&r, &m, 1, 0.0).unwrap(), 0.0);
        assert_eq!(reaction_primitive(&r, &m, 1, 0.0).unwrap(), 0.0);
        for t in [1e-5, 0.3, 2.0, 40.0] {
            assert_eq!(
                reaction_eval(&r, &m, 2, -t).unwrap(),
                -reaction_eval(&r, &m, 2, t).unwrap()
            );
        }
        let r2 = r.scaled(2.0);
        assert!((reaction_eval(&r2, &m, 1, 2.0).unwrap() - 16.0).abs() < 1e-14);
    }

    #[test]
    fn reaction_hypotheses_model_family() {
        let m = unit(10);
        let plan = SamplingPlan::default();
        let p = ExponentField::constant(&m, 2.0).unwrap();
        let q = ExponentField::build(&"4 + 0.5*x".into(), &m).unwrap();
        let c = (0..m.node_count()).map(|i| 0.5 + 0.05 * i as f64).collect();
        let r = Reaction::power(&m, q, c).unwrap();
        assert_eq!(r.params().mu, 4.0);
        let rep = verify_reaction_hypotheses(&r, &p, &m, &plan).unwrap();
        assert!(!rep.any_violated(), "{rep:#?}");

        // q ≡ 4, p⁺ = 2: ratio |t|^{q−p⁺} at 1e-6 is 1e-12
        let q4 = ExponentField::constant(&m, 4.0).unwrap();
        let r4 = Reaction::power_uniform(&m, q4, 1.0).unwrap();
        let rep = verify_reaction_hypotheses(&r4, &p, &m, &plan).unwrap();
        let d = rep.get(Hypothesis::F3).unwrap().diagnostic.unwrap();
        assert!((d - 1e-12).abs() < 1e-20);
        assert_eq!(rep.status(Hypothesis::F3), Some(HypothesisStatus::HoldsOnSample));

        // μ must exceed p⁺
        let bad = r4.clone().with_params(ReactionParams {
            mu: 2.0,
            ..*r4.params()
        });
        let rep = verify_reaction_hypotheses(&bad, &p, &m, &plan).unwrap();
        assert_eq!(rep.status(Hypothesis::F2), Some(HypothesisStatus::Violated));
    }

    #[test]
    fn zero_reaction_violates_nontriviality() {
        let m = unit(6);
        let p = ExponentField::constant(&m, 2.0).unwrap();
        let r = Reaction::power_uniform(&m, ExponentField::constant(&m, 4.0).unwrap(), 0.0).unwrap();
        let rep = verify_reaction_hypotheses(&r, &p, &m, &SamplingPlan::default()).unwrap();
        let f4 = rep.get(Hypothesis::F4).unwrap();
        assert_eq!(f4.status, HypothesisStatus::Violated);
        let w = f4.worst.as_ref().unwrap();
        assert!(w.margin < 0.0);
        assert_eq!(w.note.as_deref(), Some("identically zero on sample"));
        assert_eq!(rep.status(Hypothesis::F2), Some(HypothesisStatus::Violated));
    }

    #[test]
    fn linear_reaction_does_not_decay() {
        let m = unit(6);
        let p = ExponentField::constant(&m, 2.0).unwrap();
        let r = Reaction::power_uniform(&m, ExponentField::constant(&m, 2.0).unwrap(), 1.0).unwrap();
        let rep = verify_reaction_hypotheses(&r, &p, &m, &SamplingPlan::default()).unwrap();
        assert_eq!(rep.status(Hypothesis::F3), Some(HypothesisStatus::Violated));
        assert!(rep.get(Hypothesis::F3).unwrap().worst.as_ref().unwrap().margin < 0.0);
    }

    #[test]
    fn violated_checks_carry_negative_witnesses() {
        let m = unit(6);
        let p = ExponentField::constant(&m, 3.0).unwrap();
        let r = Reaction::power_uniform(&m, ExponentField::constant(&m, 1.5).unwrap(), 1.0).unwrap();
        let rep = verify_reaction_hypotheses(&r, &p, &m, &SamplingPlan::default()).unwrap();
        for c in &rep.checks {
            if c.status == HypothesisStatus::Violated {
                assert!(c.worst.as_ref().unwrap().margin < 0.0, "{c:?}");
            }
        }
        assert!(rep.any_violated());
    }
}

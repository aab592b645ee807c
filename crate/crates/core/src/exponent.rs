//! Variable exponents `p(·)` sampled on a mesh, and their admissibility checks.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::FieldSpec;
use crate::mesh::Mesh;

/// Exponent field with every value strictly greater than one.
///
/// Values are sampled at nodes and interpolated piecewise linearly, so the
/// element (quadrature) value is the mean of the element's vertex values and
/// always lies within the nodal extrema.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentField {
    nodes: Vec<f64>,
    elements: Vec<f64>,
    minus: f64,
    plus: f64,
}

impl ExponentField {
    /// Builds an exponent field from a closed-form expression, constant or table.
    pub fn build(spec: &FieldSpec, mesh: &Mesh) -> Result<Self> {
        ExponentField::from_nodal(mesh, spec.sample(mesh)?)
    }

    pub fn constant(mesh: &Mesh, value: f64) -> Result<Self> {
        ExponentField::from_nodal(mesh, vec![value; mesh.node_count()])
    }

    pub fn from_fn(mesh: &Mesh, f: impl Fn(&[f64; 2]) -> f64) -> Result<Self> {
        ExponentField::from_nodal(mesh, mesh.coords().iter().map(f).collect())
    }

    pub fn from_nodal(mesh: &Mesh, nodes: Vec<f64>) -> Result<Self> {
        mesh.check_nodal(nodes.len())?;
        for (node, &v) in nodes.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { node });
            }
            if v <= 1.0 {
                return Err(Error::AnyValueAtMostOne { node, value: v });
            }
        }
        let elements = mesh.elements().iter().map(|el| el.average_of(&nodes)).collect();
        let (minus, plus) = extrema(&nodes);
        Ok(ExponentField {
            nodes,
            elements,
            minus,
            plus,
        })
    }

    /// Hölder conjugate `p/(p−1)`, applied node- and element-wise so that
    /// `1/p + 1/p' = 1` holds exactly at every quadrature point.
    pub fn conjugate(&self) -> ExponentField {
        let conj = |p: f64| p / (p - 1.0);
        let nodes: Vec<f64> = self.nodes.iter().map(|&p| conj(p)).collect();
        let elements = self.elements.iter().map(|&p| conj(p)).collect();
        let (minus, plus) = extrema(&nodes);
        ExponentField {
            nodes,
            elements,
            minus,
            plus,
        }
    }

    pub fn node_values(&self) -> &[f64] {
        &self.nodes
    }

    pub fn element_values(&self) -> &[f64] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `p⁻`, the smallest nodal value.
    pub fn p_minus(&self) -> f64 {
        self.minus
    }

    /// `p⁺`, the largest nodal value.
    pub fn p_plus(&self) -> f64 {
        self.plus
    }

    pub fn is_constant(&self) -> bool {
        self.minus == self.plus
    }
}

fn extrema(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// Sobolev critical exponent per node; `f64::INFINITY` marks `p(x) ≥ N`.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalExponent {
    values: Vec<f64>,
}

impl CriticalExponent {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_unbounded(&self, node: usize) -> bool {
        self.values[node] == f64::INFINITY
    }
}

/// `p*(x) = N p(x) / (N − p(x))` where `p(x) < N`, and `+∞` otherwise.
pub fn critical_exponent(p: &ExponentField, dim: usize) -> CriticalExponent {
    let n = dim as f64;
    CriticalExponent {
        values: p
            .node_values()
            .iter()
            .map(|&v| if v < n { n * v / (n - v) } else { f64::INFINITY })
            .collect(),
    }
}

/// Finite-sample log-Hölder constant: the largest `|p(x) − p(y)| · (−log|x − y|)`
/// over node pairs with `0 < |x − y| ≤ 1/2`.
pub fn log_holder_estimate(p: &ExponentField, mesh: &Mesh) -> f64 {
    let xs = mesh.coords();
    let v = p.node_values();
    let mut best = 0.0_f64;
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            let dist = ((xs[i][0] - xs[j][0]).powi(2) + (xs[i][1] - xs[j][1]).powi(2)).sqrt();
            if dist > 0.0 && dist <= 0.5 {
                best = best.max((v[i] - v[j]).abs() * -dist.ln());
            }
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    /// Every value of `p` and `q` exceeds one.
    pub c_plus_ok: bool,
    /// `p⁺ < q⁻`.
    pub growth_gap_ok: bool,
    /// `q(x) < p*(x)` at every node; equality counts as a failure.
    pub subcritical_ok: bool,
    /// `2(q⁺ − q⁻) < p⁻`.
    pub a5_ok: bool,
    pub log_holder_estimate: f64,
    /// First node where `q(x) ≥ p*(x)`, if any.
    pub supercritical_node: Option<usize>,
}

impl AdmissibilityReport {
    pub fn all_ok(&self) -> bool {
        self.c_plus_ok && self.growth_gap_ok && self.subcritical_ok && self.a5_ok
    }
}

/// Node-exact admissibility of the pair `(p, q)` on `mesh`.
pub fn check_admissibility(
    p: &ExponentField,
    q: &ExponentField,
    mesh: &Mesh,
) -> Result<AdmissibilityReport> {
    if p.len() != q.len() {
        return Err(Error::MeshMismatch {
            expected: p.len(),
            found: q.len(),
        });
    }
    mesh.check_nodal(p.len())?;
    let crit = critical_exponent(p, mesh.dim());
    let supercritical_node = q
        .node_values()
        .iter()
        .zip(crit.values())
        .position(|(&qv, &pc)| qv >= pc);
    Ok(AdmissibilityReport {
        c_plus_ok: p.node_values().iter().chain(q.node_values()).all(|&v| v > 1.0),
        growth_gap_ok: p.p_plus() < q.p_minus(),
        subcritical_ok: supercritical_node.is_none(),
        a5_ok: 2.0 * (q.p_plus() - q.p_minus()) < p.p_minus(),
        log_holder_estimate: log_holder_estimate(p, mesh),
        supercritical_node,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit(cells: usize) -> Mesh {
        Mesh::interval(0.0, 1.0, cells).unwrap()
    }

    #[test]
    fn build_examples() {
        let m = unit(10);
        let c = ExponentField::build(&FieldSpec::Constant(2.0), &m).unwrap();
        assert_eq!((c.p_minus(), c.p_plus()), (2.0, 2.0));

        let lin = ExponentField::build(&FieldSpec::expr("2 + x"), &m).unwrap();
        assert_eq!(lin.p_minus(), 2.0);
        assert_eq!(lin.p_plus(), 3.0);

        assert!(matches!(
            ExponentField::build(&FieldSpec::Constant(0.5), &m),
            Err(Error::AnyValueAtMostOne { .. })
        ));
        assert!(matches!(
            ExponentField::build(&FieldSpec::Constant(1.0), &m),
            Err(Error::AnyValueAtMostOne { .. })
        ));
        assert!(matches!(
            ExponentField::build(&FieldSpec::expr("3 + 1/(x-0.5)^2"), &m),
            Err(Error::NonFinite { node: 5 })
        ));
    }

    #[test]
    fn critical_exponent_examples() {
        let m = unit(10);
        let two = ExponentField::constant(&m, 2.0).unwrap();
        let c1 = critical_exponent(&two, 1);
        assert!((0..m.node_count()).all(|i| c1.is_unbounded(i)));
        let c3 = critical_exponent(&two, 3);
        assert!(c3.values().iter().all(|&v| v == 6.0));

        let lin = ExponentField::from_fn(&m, |x| 2.0 + x[0]).unwrap();
        let c4 = critical_exponent(&lin, 4);
        assert_eq!(c4.values()[0], 4.0);
        for (i, x) in m.coords().iter().enumerate() {
            let want = 4.0 * (2.0 + x[0]) / (2.0 - x[0]);
            assert!((c4.values()[i] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn log_holder_examples() {
        let m = unit(10);
        assert_eq!(log_holder_estimate(&ExponentField::constant(&m, 3.0).unwrap(), &m), 0.0);

        let lin = ExponentField::from_fn(&m, |x| 2.0 + x[0]).unwrap();
        // exhaustive pair scan oracle: for p = 2 + x, every pair at distance d
        // contributes d·(−ln d); maximize over the realizable distances k/10
        let oracle = (1..=5)
            .map(|k| k as f64 / 10.0)
            .map(|d| d * -d.ln())
            .fold(0.0, f64::max);
        let est = log_holder_estimate(&lin, &m);
        assert!((est - oracle).abs() < 1e-12);
        // the (0.3, 0.4) pair alone contributes 0.1·(−ln 0.1)
        assert!(est >= 0.1 * -(0.1f64).ln() - 1e-15);
        assert!((0.1 * -(0.1f64).ln() - 0.2303).abs() < 1e-4);
    }

    #[test]
    fn admissibility_examples() {
        let m = unit(10);
        let p2 = ExponentField::constant(&m, 2.0).unwrap();
        let q4 = ExponentField::constant(&m, 4.0).unwrap();
        let r = check_admissibility(&p2, &q4, &m).unwrap();
        assert!(r.c_plus_ok && r.growth_gap_ok && r.subcritical_ok && r.a5_ok);

        let q_var = ExponentField::from_fn(&m, |x| 4.0 + 2.0 * x[0]).unwrap();
        let r = check_admissibility(&p2, &q_var, &m).unwrap();
        assert!(!r.a5_ok);

        let p3 = ExponentField::constant(&m, 3.0).unwrap();
        let q25 = ExponentField::constant(&m, 2.5).unwrap();
        assert!(!check_admissibility(&p3, &q25, &m).unwrap().growth_gap_ok);

        let other = ExponentField::constant(&unit(5), 4.0).unwrap();
        assert!(matches!(
            check_admissibility(&p2, &other, &m),
            Err(Error::MeshMismatch { .. })
        ));
    }

    #[test]
    fn subcritical_equality_is_flagged() {
        // N = 3, p = 2 gives p* = 6; q = 6 sits exactly on the threshold
        let m = Mesh::rectangle([0.0, 0.0], [1.0, 1.0], [2, 2]).unwrap();
        let p = ExponentField::constant(&m, 2.0).unwrap();
        let q = ExponentField::constant(&m, 6.0).unwrap();
        let crit = critical_exponent(&p, 3);
        assert!(crit.values().iter().all(|&v| v == 6.0));
        // on the 2-D mesh p = 2 ≥ N so p* is unbounded and q is subcritical
        assert!(check_admissibility(&p, &q, &m).unwrap().subcritical_ok);
        let p15 = ExponentField::constant(&m, 1.5).unwrap(); // p* = 6
        let r = check_admissibility(&p15, &q, &m).unwrap();
        assert!(!r.subcritical_ok);
        assert_eq!(r.supercritical_node, Some(0));
    }

    proptest! {
        #[test]
        fn extrema_are_attained_and_bound_everything(
            vals in prop::collection::vec(1.01f64..9.0, 3..40)
        ) {
            let m = unit(vals.len() - 1);
            let p = ExponentField::from_nodal(&m, vals.clone()).unwrap();
            prop_assert!(vals.contains(&p.p_minus()));
            prop_assert!(vals.contains(&p.p_plus()));
            for v in p.node_values().iter().chain(p.element_values()) {
                prop_assert!(p.p_minus() <= *v && *v <= p.p_plus());
            }
            let c = p.conjugate();
            for (a, b) in p.element_values().iter().zip(c.element_values()) {
                prop_assert!((1.0 / a + 1.0 / b - 1.0).abs() < 1e-14);
            }
        }

        #[test]
        fn log_holder_is_permutation_invariant(
            vals in prop::collection::vec(1.01f64..5.0, 4..20),
            rot in 0usize..20,
        ) {
            // reversing the node order of a 1-D mesh is a permutation of the
            // node pairs that preserves every distance
            let m = unit(vals.len() - 1);
            let p = ExponentField::from_nodal(&m, vals.clone()).unwrap();
            let mut rev = vals.clone();
            rev.reverse();
            let pr = ExponentField::from_nodal(&m, rev).unwrap();
            let a = log_holder_estimate(&p, &m);
            prop_assert!((a - log_holder_estimate(&pr, &m)).abs() <= 1e-12 * (1.0 + a));
            // zero exactly for constant fields
            let c = ExponentField::constant(&m, vals[rot % vals.len()]).unwrap();
            prop_assert_eq!(log_holder_estimate(&c, &m), 0.0);
            let q = ExponentField::constant(&m, 4.0 + vals[0]).unwrap();
            prop_assert_eq!(
                check_admissibility(&p, &q, &m).unwrap(),
                check_admissibility(&p, &q, &m).unwrap()
            );
        }
    }
}

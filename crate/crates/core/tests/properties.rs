mod common;

use std::sync::Arc;

use proptest::prelude::*;
use varexp::energy::{self, Problem};
use varexp::model::{self, KernelKind, Site};
use varexp::modular::{self, NORM_TOL};
use varexp::*;

fn mesh_strategy() -> impl Strategy<Value = Arc<Mesh>> {
    prop_oneof![
        (2usize..40).prop_map(|n| Arc::new(Mesh::interval(0.0, 1.0, n).unwrap())),
        (2usize..8, 2usize..8)
            .prop_map(|(a, b)| Arc::new(Mesh::rectangle([0.0, 0.0], [1.0, 2.0], [a, b]).unwrap())),
    ]
}

/// A mesh with nodal samples in `[lo, hi)`, enough for the largest mesh.
fn mesh_and_values(lo: f64, hi: f64) -> impl Strategy<Value = (Arc<Mesh>, Vec<f64>)> {
    mesh_strategy().prop_flat_map(move |m| {
        let n = m.node_count();
        (Just(m), prop::collection::vec(lo..hi, n))
    })
}

fn zero_trace(mesh: &Mesh, v: Vec<f64>) -> GridFunction {
    enforce_zero_trace(mesh, &GridFunction::from_values(mesh, v).unwrap())
}

fn exponent(mesh: &Mesh, seed: &[f64], lo: f64, hi: f64) -> ExponentField {
    let v = seed.iter().map(|s| lo + (hi - lo) * s.fract().abs()).collect();
    ExponentField::from_nodal(mesh, v).unwrap()
}

fn problem(mesh: &Arc<Mesh>, kind: KernelKind, p: ExponentField, q: ExponentField) -> Problem {
    let k = OperatorKernel::new(kind, p).unwrap();
    let r = Reaction::power_uniform(mesh, q, 1.0).unwrap();
    Problem::new(mesh.clone(), k, r).unwrap()
}

fn kind_strategy() -> impl Strategy<Value = KernelKind> {
    prop_oneof![
        Just(KernelKind::PxLaplacian),
        Just(KernelKind::WeightedPxLaplacian),
        Just(KernelKind::PxMeanCurvature),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exponent_extrema_are_attained((mesh, v) in mesh_and_values(1.01, 6.0)) {
        let p = ExponentField::from_nodal(&mesh, v.clone()).unwrap();
        prop_assert!(v.iter().all(|&x| p.p_minus() <= x && x <= p.p_plus()));
        prop_assert!(v.contains(&p.p_minus()));
        prop_assert!(v.contains(&p.p_plus()));
    }

    #[test]
    fn log_holder_is_permutation_invariant(cells in 2usize..30, v in prop::collection::vec(1.1f64..4.0, 31), shift in 1usize..30) {
        // a reflected mesh carries the same point set in reversed node order
        let mesh = Mesh::interval(0.0, 1.0, cells).unwrap();
        let n = mesh.node_count();
        let v = &v[..n];
        let p = ExponentField::from_nodal(&mesh, v.to_vec()).unwrap();
        let mirrored = Mesh::interval(-1.0, 0.0, cells).unwrap();
        let rev: Vec<f64> = v.iter().rev().copied().collect();
        let q = ExponentField::from_nodal(&mirrored, rev).unwrap();
        let a = log_holder_estimate(&p, &mesh);
        let b = log_holder_estimate(&q, &mirrored);
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a), "{a} vs {b}");
        let c = ExponentField::constant(&mesh, 1.0 + shift as f64 * 0.1).unwrap();
        prop_assert_eq!(log_holder_estimate(&c, &mesh), 0.0);
    }

    #[test]
    fn admissibility_is_deterministic(pv in 1.1f64..5.0, qv in 1.1f64..8.0) {
        let mesh = Mesh::interval(0.0, 1.0, 8).unwrap();
        let p = ExponentField::constant(&mesh, pv).unwrap();
        let q = ExponentField::constant(&mesh, qv).unwrap();
        let a = check_admissibility(&p, &q, &mesh).unwrap();
        let b = check_admissibility(&p, &q, &mesh).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.growth_gap_ok, p.p_plus() < q.p_minus());
    }

    #[test]
    fn modular_norm_relations((mesh, v) in mesh_and_values(-3.0, 3.0), seed in prop::collection::vec(0.0f64..1.0, 81)) {
        let u = GridFunction::from_values(&mesh, v).unwrap();
        let ps: Vec<f64> = (0..mesh.node_count()).map(|i| seed[i % seed.len()]).collect();
        let p = exponent(&mesh, &ps, 1.2, 5.0);
        let rho = modular::modular(&mesh, &u, &p).unwrap();
        let norm = luxemburg_norm(&mesh, &u, &p).unwrap();
        let lam = norm.value;
        if rho == 0.0 {
            prop_assert_eq!(lam, 0.0);
        } else {
            // unit modular at the norm
            prop_assert!((norm.modular_at_value - 1.0).abs() <= NORM_TOL);
            let recomputed = modular::modular(&mesh, &u.scaled(1.0 / lam), &p).unwrap();
            prop_assert!((recomputed - 1.0).abs() <= NORM_TOL);
            // norm and modular fall on the same side of 1
            if (lam - 1.0).abs() > NORM_TOL {
                prop_assert_eq!(lam < 1.0, rho < 1.0);
            }
            // power bounds above and below 1
            let slack = 1e-9 * (1.0 + rho);
            if lam > 1.0 + NORM_TOL {
                prop_assert!(lam.powf(p.p_minus()) <= rho + slack && rho <= lam.powf(p.p_plus()) + slack);
            }
            if lam < 1.0 - NORM_TOL {
                prop_assert!(lam.powf(p.p_plus()) <= rho + slack && rho <= lam.powf(p.p_minus()) + slack);
            }
        }
    }

    #[test]
    fn modular_and_norm_vanish_together((mesh, w) in mesh_and_values(-1.0, 1.0), pv in 1.2f64..4.0) {
        // modular and norm vanish together along u_n = u + w/n
        prop_assume!(w.iter().any(|&x| x.abs() > 1e-3));
        let p = ExponentField::constant(&mesh, pv).unwrap();
        let w = GridFunction::from_values(&mesh, w).unwrap();
        let mut prev = (f64::INFINITY, f64::INFINITY);
        for n in [1.0, 10.0, 100.0, 1000.0] {
            let d = w.scaled(1.0 / n);
            let rho = modular::modular(&mesh, &d, &p).unwrap();
            let lam = luxemburg_norm(&mesh, &d, &p).unwrap().value;
            prop_assert!(rho < prev.0 && lam < prev.1);
            prev = (rho, lam);
        }
        prop_assert!(prev.0 < 1e-4 && prev.1 < 1e-2);
    }

    #[test]
    fn simon_gap_is_nonnegative(
        kind in kind_strategy(),
        pv in 1.2f64..4.0,
        xi in prop::collection::vec(-10.0f64..10.0, 2),
        zeta in prop::collection::vec(-10.0f64..10.0, 2),
    ) {
        prop_assume!(xi.iter().chain(&zeta).any(|&x| x != 0.0));
        let mesh = Mesh::rectangle([0.0, 0.0], [1.0, 1.0], [2, 2]).unwrap();
        let p = ExponentField::constant(&mesh, pv).unwrap();
        let k = OperatorKernel::new(kind, p).unwrap();
        let (gap, _) = model::simon_gap(&k, &mesh, 4, &xi, &zeta).unwrap();
        prop_assert!(gap >= -1e-12 * (1.0 + xi.iter().chain(&zeta).map(|x| x * x).sum::<f64>()), "gap {gap}");
    }

    #[test]
    fn potential_matches_quadrature(kind in kind_strategy(), pv in 1.2f64..4.0, t in 0.0f64..5.0, x in 0.0f64..1.0) {
        let mesh = Mesh::interval(0.0, 1.0, 4).unwrap();
        let k = OperatorKernel::new(kind, ExponentField::constant(&mesh, pv).unwrap()).unwrap();
        let site = Site { x: [x, 0.0], p: pv };
        let closed = k.potential(&site, t);
        let quad = model::quadrature_potential(&k, &site, t);
        prop_assert!((closed - quad).abs() <= 1e-10 * (1.0 + closed.abs()), "{closed} vs {quad}");
        prop_assert!(k.value(&site, t) >= 0.0);
    }

    #[test]
    fn potential_derivative_is_flux(kind in kind_strategy(), pv in 1.2f64..4.0, t in 0.1f64..5.0) {
        let mesh = Mesh::interval(0.0, 1.0, 4).unwrap();
        let k = OperatorKernel::new(kind, ExponentField::constant(&mesh, pv).unwrap()).unwrap();
        let site = Site { x: [0.5, 0.0], p: pv };
        let h = 1e-5;
        let fd = (k.potential(&site, t + h) - k.potential(&site, t - h)) / (2.0 * h);
        let exact = t * k.value(&site, t);
        prop_assert!((fd - exact).abs() <= 1e-6 * exact.abs(), "{fd} vs {exact}");
        prop_assert_eq!(k.potential(&site, 0.0), 0.0);
    }

    #[test]
    fn gradient_of_affine_functions_is_exact(
        mesh in mesh_strategy(),
        c in -5.0f64..5.0,
        a in -5.0f64..5.0,
        b in -5.0f64..5.0,
    ) {
        let constant = GridFunction::from_fn(&mesh, |_| c);
        let g = gradient(&mesh, &constant).unwrap();
        prop_assert!(g.values().iter().all(|&x| x == 0.0));
        let affine = GridFunction::from_fn(&mesh, |x| c + a * x[0] + b * x[1]);
        let g = gradient(&mesh, &affine).unwrap();
        let slope = [a, b];
        for e in 0..g.len() {
            for (d, &s) in g.get(e).iter().zip(&slope) {
                prop_assert!((d - s).abs() <= 1e-9 * (1.0 + c.abs() + a.abs() + b.abs()), "{d} vs {s}");
            }
        }
    }

    #[test]
    fn integral_of_one_is_measure(mesh in mesh_strategy()) {
        let ones = vec![1.0; mesh.element_count()];
        let total = integrate(&mesh, &ones).unwrap();
        prop_assert!((total - mesh.measure()).abs() <= 1e-13 * mesh.measure());
    }

    #[test]
    fn zero_trace_is_idempotent((mesh, v) in mesh_and_values(-2.0, 2.0)) {
        let u = zero_trace(&mesh, v);
        prop_assert!(mesh.boundary_nodes().iter().all(|&b| u.values()[b] == 0.0));
        prop_assert_eq!(enforce_zero_trace(&mesh, &u), u);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn directional_derivative_matches_difference_quotient(
        (mesh, v) in mesh_and_values(-1.0, 1.0),
        kind in kind_strategy(),
        pv in 1.5f64..3.0,
        qv in 3.1f64..5.0,
    ) {
        let p = ExponentField::constant(&mesh, pv).unwrap();
        let q = ExponentField::constant(&mesh, qv).unwrap();
        let prob = problem(&mesh, kind, p, q);
        let u = zero_trace(&mesh, v.clone());
        let w: Vec<f64> = v.iter().enumerate().map(|(i, x)| (x * 7.0 + i as f64).sin()).collect();
        let w = zero_trace(&mesh, w);
        let h = 1e-5;
        let ep = energy::energy(&prob, &u.axpy(h, &w)).unwrap().total;
        let em = energy::energy(&prob, &u.axpy(-h, &w)).unwrap().total;
        let fd = (ep - em) / (2.0 * h);
        let dd = energy::directional_derivative(&prob, &u, &w).unwrap();
        prop_assert!((dd - fd).abs() <= 1e-6 * (1.0 + dd.abs()), "{dd} vs {fd}");
        // the assembled gradient pairs with w to the same value
        let g = energy::gradient_vector(&prob, &u).unwrap();
        prop_assert!((g.dot(&w) - dd).abs() <= 1e-10 * (1.0 + dd.abs()));
    }

    #[test]
    fn operator_is_monotone_and_convex(
        (mesh, v) in mesh_and_values(-2.0, 2.0),
        kind in kind_strategy(),
        pv in 1.3f64..4.0,
        shift in 0.1f64..3.0,
    ) {
        let p = ExponentField::constant(&mesh, pv).unwrap();
        let q = ExponentField::constant(&mesh, pv + 1.0).unwrap();
        let prob = problem(&mesh, kind, p, q);
        let u = zero_trace(&mesh, v.clone());
        let w = zero_trace(&mesh, v.iter().enumerate().map(|(i, x)| shift * (x + i as f64).cos()).collect());
        let gap = energy::monotone_gap(&prob, &u, &w).unwrap();
        prop_assert!(gap >= -1e-12, "gap {gap}");
        let mid = u.axpy(1.0, &w).scaled(0.5);
        let e = |x: &GridFunction| energy::energy(&prob, x).unwrap().e0;
        prop_assert!(e(&mid) <= 0.5 * (e(&u) + e(&w)) + 1e-12);
    }

    #[test]
    fn energy_is_even_for_odd_reactions((mesh, v) in mesh_and_values(-2.0, 2.0), pv in 1.3f64..3.0) {
        let p = ExponentField::constant(&mesh, pv).unwrap();
        let q = ExponentField::constant(&mesh, pv + 1.5).unwrap();
        let prob = problem(&mesh, KernelKind::PxLaplacian, p, q);
        let u = zero_trace(&mesh, v);
        let a = energy::energy(&prob, &u).unwrap();
        let b = energy::energy(&prob, &u.scaled(-1.0)).unwrap();
        prop_assert_eq!(a.total, b.total);
        prop_assert_eq!(a.total, a.e0 - a.j);
    }
}

//! End-to-end runs over the shipped fixtures: inclusion → basic construction →
//! bimodules → linking algebra → classification.

use indextwo::basic::{
    corner_is_a, crossed_model, cut_expectation_f, fixed_points_of_flip, models_isomorphic, q_model, verify_basic,
};
use indextwo::bimodule::{
    build_bminus, build_xalpha, build_xb, canonical_xb_to_bminus, verify_bimodule, Involution, InvolutiveBimodule,
};
use indextwo::correspondence::{functor_f, functor_g, roundtrip_fg, roundtrip_gf, verify_l_equivalence};
use indextwo::dynamics::{
    classify, crossed_product_z2, find_quasi_basis_unitary, restricted_crossed_model, validate_two_z_inner,
    TwoZInnerSystem,
};
use indextwo::fixtures::{self, by_name};
use indextwo::inclusion::{make_inclusion_pair, InclusionPair};
use indextwo::subspace::LinMap;
use indextwo::{CMat, Error, Tol};

fn tol() -> Tol {
    Tol::default()
}

fn all_pairs() -> Vec<(&'static str, InclusionPair)> {
    ["A", "B", "C", "D", "E"]
        .into_iter()
        .map(|n| (n, by_name(n, 0, &tol()).unwrap()))
        .collect()
}

#[test]
fn every_fixture_has_index_two() {
    for (name, p) in all_pairs() {
        let two = p.b.unit().scale_re(2.0);
        assert!(p.index.dist(&two) < 1e-9, "{name}");
        assert!(p.report.all_pass(), "{name}: {:?}", p.report.failures());
    }
}

#[test]
fn c3_control_is_rejected_with_its_index() {
    let (b, a, e) = fixtures::c3_control(&tol()).unwrap();
    match make_inclusion_pair(&b, &a, &e, &tol()) {
        Err(Error::IndexNotTwo(v)) => assert!(v.dist(&CMat::diag_re(&[2.0, 2.0, 1.0])) < 1e-9),
        other => panic!("expected IndexNotTwo, got {other:?}"),
    }
}

#[test]
fn basic_construction_models_agree() {
    // dim B for A, B, C, D, E: C^2, M_2, M_3, M_4, the 8-dim restricted model
    let dims = [2, 4, 9, 16, 8];
    for ((name, p), dim_b) in all_pairs().into_iter().zip(dims) {
        assert_eq!(p.b.dim(), dim_b, "{name}");
        let c = crossed_model(&p, &tol());
        let q = q_model(&p, &tol()).unwrap();
        assert_eq!(c.algebra.dim(), 2 * dim_b, "{name}");
        assert_eq!(q.algebra.dim(), 2 * dim_b, "{name}");
        for m in [&c, &q] {
            let rep = verify_basic(m, &p, &tol());
            assert!(rep.all_pass(), "{name} {:?}: {:?}", m.kind, rep.failures());
        }
        let (_, rep) = models_isomorphic(&c, &q, &tol()).unwrap();
        assert!(rep.all_pass(), "{name}");

        let cut = cut_expectation_f(&c, &p, &tol());
        assert!(cut.report.all_pass(), "{name}: {:?}", cut.report.failures());
        assert!(cut.index.dist(&c.one_minus_e()) < 1e-8, "{name}");
        assert!(corner_is_a(&c, &p, &tol()).all_pass(), "{name}");
        let (fixed, rep) = fixed_points_of_flip(&c, &p, &tol());
        assert_eq!(fixed.dim(), dim_b, "{name}");
        assert!(rep.all_pass(), "{name}");
    }
}

#[test]
fn bimodules_satisfy_the_axioms_and_mutations_do_not() {
    for (name, p) in all_pairs() {
        let c = crossed_model(&p, &tol());
        let xb = build_xb(&c, &p, &tol());
        let bm = build_bminus(&p, &tol());
        for (which, x) in [("XB", &xb), ("Bminus", &bm)] {
            let rep = verify_bimodule(x, &tol());
            assert!(rep.all_pass(), "{name}/{which}: {:?}", rep.failures());
            let broken = InvolutiveBimodule {
                module: x.module.clone(),
                involution: Involution::identity(x.dim()),
            };
            assert!(!verify_bimodule(&broken, &tol()).all_pass(), "{name}/{which} mutation passed");
        }
        let (_, rep) = canonical_xb_to_bminus(&c, &p, &xb, &bm, &tol()).unwrap();
        assert!(rep.all_pass(), "{name}: {:?}", rep.failures());
    }
    let xa = build_xalpha(&fixtures::fix_e(&tol()), &tol()).unwrap();
    assert!(verify_bimodule(&xa, &tol()).all_pass());
}

#[test]
fn functor_g_recovers_the_inclusion_sizes() {
    // dim A + dim X for A, B, C: 1 + 1, 2 + 2, 5 + 4
    for (name, want) in [("A", 2), ("B", 4), ("C", 9)] {
        let p = by_name(name, 0, &tol()).unwrap();
        let x = functor_f(&p, &tol()).unwrap();
        let (q, link) = functor_g(&x, &tol()).unwrap();
        assert_eq!(q.b.dim(), want, "{name}");
        assert!(link.report.all_pass(), "{name}: {:?}", link.report.failures());
        assert!(q.index.dist(&q.b.unit().scale_re(2.0)) < 1e-8, "{name}");
    }
}

#[test]
fn round_trips_on_every_fixture() {
    for (name, p) in all_pairs() {
        let gf = roundtrip_gf(&p, &tol()).unwrap();
        assert!(gf.pass(), "{name}: {:?}", gf.report.failures());
        let c = crossed_model(&p, &tol());
        for x in [build_xb(&c, &p, &tol()), build_bminus(&p, &tol())] {
            let fg = roundtrip_fg(&x, &tol()).unwrap();
            assert!(fg.pass(), "{name}: {:?}", fg.report.failures());
        }
    }
    let xa = build_xalpha(&fixtures::fix_e(&tol()), &tol()).unwrap();
    assert!(roundtrip_fg(&xa, &tol()).unwrap().pass());
}

#[test]
fn restricted_model_matches_the_linking_algebra_of_x_alpha() {
    let m = restricted_crossed_model(&fixtures::fix_e(&tol()), &tol()).unwrap();
    assert_eq!(m.pair.b.dim(), 8);
    assert!(m.phi_report.all_pass(), "{:?}", m.phi_report.failures());
}

#[test]
fn restricted_and_full_crossed_products_agree_when_z_is_one() {
    let d2 = fixtures::diagonal_algebra(2, &tol());
    let swap = LinMap::from_fn(d2.space(), |x| CMat::diag(&[x.get(1, 1), x.get(0, 0)]));
    let sys = TwoZInnerSystem {
        a: d2.clone(),
        alpha: swap.clone(),
        z: CMat::identity(2),
    };
    assert!(validate_two_z_inner(&sys, &tol()).all_pass());
    let restricted = restricted_crossed_model(&sys, &tol()).unwrap();
    let full = crossed_product_z2(&d2, &swap, &tol()).unwrap();
    let id = LinMap::from_fn(restricted.pair.b.space(), |b| b.clone());
    let rep = verify_l_equivalence(&restricted.pair, &full, &id, None, &tol());
    assert!(rep.all_pass(), "{:?}", rep.failures());
}

#[test]
fn two_z_inner_needs_alpha_squared_to_be_ad_z() {
    let m2 = fixtures::full_matrix_algebra(2, &tol());
    let y = CMat::diag(&[indextwo::matkernel::ONE, indextwo::matkernel::I]);
    let bad = TwoZInnerSystem::inner(m2, &y, CMat::identity(2));
    let rep = validate_two_z_inner(&bad, &tol());
    assert!(!rep.get("alpha_squared").unwrap().pass);
    assert!(restricted_crossed_model(&bad, &tol()).is_err());
}

#[test]
fn goldman_failure_witness() {
    let p = fixtures::fix_c(&tol()).unwrap();
    let c = crossed_model(&p, &tol());
    // equal normalized traces, yet inequivalent
    let te = c.jones.normalized_trace();
    let tf = c.one_minus_e().normalized_trace();
    assert!((te.re - 0.5).abs() < 1e-12 && (tf.re - 0.5).abs() < 1e-12);
    let r = classify(&p, &tol()).unwrap();
    assert!(!r.projections_equivalent && r.consistent);
    assert_eq!((r.jones_ranks, r.complement_ranks), (vec![1, 2], vec![2, 1]));
    assert!(find_quasi_basis_unitary(&p, &tol()).is_none());
}

#[test]
fn crossed_product_fixtures_have_unitary_quasi_bases() {
    for name in ["A", "B"] {
        let p = by_name(name, 0, &tol()).unwrap();
        let u = find_quasi_basis_unitary(&p, &tol()).unwrap();
        assert!(u.unitary_defect() < 1e-9, "{name}");
        assert!(p.expect(&u).norm() < 1e-9, "{name}");
        let r = classify(&p, &tol()).unwrap();
        let sys = r.two_z_inner.unwrap();
        assert!(sys.z.dist(&CMat::identity(sys.z.rows())) < 1e-9, "{name}");
    }
}

#[test]
fn fixture_d_seeds_are_deterministic() {
    let t = tol();
    let p1 = fixtures::fix_d(5, &t).unwrap();
    let p2 = fixtures::fix_d(5, &t).unwrap();
    assert_eq!(p1.e.target.dim(), p2.e.target.dim());
    let r1 = serde_json::to_string(&classify(&p1, &t).unwrap()).unwrap();
    let r2 = serde_json::to_string(&classify(&p2, &t).unwrap()).unwrap();
    assert_eq!(r1, r2);
}

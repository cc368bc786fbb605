//! Property tests for the structural invariants, over seeded random inputs.

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use indextwo::basic::{crossed_model, reduce_left, verify_basic};
use indextwo::bimodule::{build_bminus, build_xb, fullness_witness, v_map, verify_bimodule};
use indextwo::correspondence::{functor_f, functor_g};
use indextwo::cstar::{block_structure, check_automorphism, mvn_equivalent};
use indextwo::dynamics::{classify, crossed_product_z2};
use indextwo::fixtures::{fix_d, fix_d_unitary, full_matrix_algebra};
use indextwo::inclusion::{
    expectation_from_involutive_automorphism, make_inclusion_pair, minus_part, pair_invariants, quasi_basis,
    quasi_basis_from_seeds, AutSpec,
};
use indextwo::matkernel::{
    hermitian_eig, polar_partial_isometry, psd_inv_sqrt, random_scalar, random_unitary, unitary_inv_sqrt, zadmul,
    zmul, C64,
};
use indextwo::subspace::{LinMap, Subspace};
use indextwo::{CMat, Tol};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_dmat(r: usize, c: usize, seed: u64) -> DMatrix<C64> {
    let mut g = rng(seed);
    DMatrix::from_fn(r, c, |_, _| random_scalar(&mut g))
}

/// Self-adjoint unitary `v diag(1^r, -1^(n-r)) v*`.
fn symmetry(n: usize, r: usize, seed: u64) -> CMat {
    let v = random_unitary(n, &mut rng(seed));
    let signs: Vec<f64> = (0..n).map(|i| if i < r { 1.0 } else { -1.0 }).collect();
    &(&v * &CMat::diag_re(&signs)) * &v.adjoint()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn split_product_matches_naive(m in 1usize..40, k in 1usize..40, n in 1usize..40, seed in any::<u64>()) {
        let a = random_dmat(m, k, seed);
        let b = random_dmat(k, n, seed ^ 1);
        let naive = &a * &b;
        prop_assert!((zmul(&a, &b) - &naive).norm() <= 1e-12 * naive.norm().max(1.0));
        let c = random_dmat(m, n, seed ^ 2);
        let naive = a.ad_mul(&c);
        prop_assert!((zadmul(&a, &c) - &naive).norm() <= 1e-12 * naive.norm().max(1.0));
    }

    #[test]
    fn adjoint_is_anti_multiplicative(n in 1usize..6, seed in any::<u64>()) {
        let mut g = rng(seed);
        let m = CMat::random(n, n, &mut g);
        let k = CMat::random(n, n, &mut g);
        prop_assert!((&m * &k).adjoint().dist(&(&k.adjoint() * &m.adjoint())) < 1e-12);
        prop_assert!(m.adjoint().adjoint().dist(&m) == 0.0);
        let z = random_scalar(&mut g);
        prop_assert!(m.scale(z).adjoint().dist(&m.adjoint().scale(z.conj())) < 1e-12);
    }

    #[test]
    fn hermitian_eig_vectors_are_orthonormal(n in 1usize..7, seed in any::<u64>()) {
        let tol = Tol::default();
        let m = CMat::random(n, n, &mut rng(seed));
        let h = &m + &m.adjoint();
        let (vals, vecs) = hermitian_eig(&h, &tol).unwrap();
        prop_assert!((&vecs.adjoint() * &vecs).dist(&CMat::identity(n)) < 1e-9);
        let d = CMat::diag_re(&vals);
        prop_assert!((&(&vecs * &d) * &vecs.adjoint()).dist(&h) < 1e-9 * h.norm().max(1.0));
    }

    #[test]
    fn psd_inv_sqrt_commutes_and_inverts(n in 1usize..6, seed in any::<u64>()) {
        let tol = Tol::default();
        let m = CMat::random(n, n, &mut rng(seed));
        let p = &(&m * &m.adjoint()) + &CMat::identity(n);
        let s = psd_inv_sqrt(&p, &tol).unwrap();
        prop_assert!(s.commutator(&p).norm() < 1e-9);
        prop_assert!((&(&s * &p) * &s).dist(&CMat::identity(n)) < 1e-9);
    }

    #[test]
    fn polar_fixes_partial_isometries(n in 2usize..6, r in 1usize..5, seed in any::<u64>()) {
        let tol = Tol::default();
        let r = r.min(n);
        let mut g = rng(seed);
        let u = random_unitary(n, &mut g);
        let w = random_unitary(n, &mut g);
        let diag: Vec<f64> = (0..n).map(|i| if i < r { 1.0 } else { 0.0 }).collect();
        let v = &(&u * &CMat::diag_re(&diag)) * &w;
        prop_assert!(polar_partial_isometry(&v, &tol).dist(&v) < 1e-9);
    }

    #[test]
    fn unitary_inv_sqrt_squares_to_inverse(n in 1usize..6, seed in any::<u64>()) {
        let u = random_unitary(n, &mut rng(seed));
        let s = unitary_inv_sqrt(&u);
        prop_assert!((&(&s * &s) * &u).dist(&CMat::identity(n)) < 1e-9);
        prop_assert!(s.unitary_defect() < 1e-9);
    }

    #[test]
    fn tracked_span_reconstructs_its_basis(n in 1usize..5, k in 1usize..40, seed in any::<u64>()) {
        let tol = Tol::default();
        let mut g = rng(seed);
        // k generators in a space of dimension at most min(k, 6)
        let span: Vec<CMat> = (0..6).map(|_| CMat::random(n, n, &mut g)).collect();
        let gens: Vec<CMat> = (0..k)
            .map(|_| span.iter().fold(CMat::zeros(n, n), |acc, s| &acc + &s.scale(random_scalar(&mut g))))
            .collect();
        let (s, coeffs) = Subspace::span_tracked(n, n, &gens, &tol);
        prop_assert_eq!(s.dim(), k.min(6).min(n * n));
        for (b, t) in s.basis().iter().zip(&coeffs) {
            let rebuilt = gens.iter().zip(t.iter()).fold(CMat::zeros(n, n), |acc, (x, z)| &acc + &x.scale(*z));
            prop_assert!(rebuilt.dist(b) < 1e-8);
        }
        for (i, x) in s.basis().iter().enumerate() {
            for (j, y) in s.basis().iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((x.inner(y).re - want).abs() < 1e-9 && x.inner(y).im.abs() < 1e-9);
            }
        }
        for x in &gens {
            prop_assert!(s.residual(x) < 1e-9 * x.norm().max(1.0));
        }
    }

    #[test]
    fn batched_residuals_match_single(seed in any::<u64>()) {
        let tol = Tol::default();
        let mut g = rng(seed);
        let gens: Vec<CMat> = (0..5).map(|_| CMat::random(3, 3, &mut g)).collect();
        let s = Subspace::span(3, 3, &gens, &tol);
        let probes: Vec<CMat> = (0..7).map(|_| CMat::random(3, 3, &mut g)).collect();
        for (batched, m) in s.residuals(&probes).iter().zip(&probes) {
            prop_assert!((batched - s.residual(m)).abs() < 1e-12);
        }
        let f = LinMap::from_fn(&s, |x| x.adjoint());
        for (batched, m) in f.apply_many(&probes).iter().zip(&probes) {
            prop_assert!(batched.dist(&f.apply(m)) < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn symmetries_give_index_two_pairs(n in 2usize..4, r in 1usize..3, seed in any::<u64>()) {
        let tol = Tol::default();
        let w = symmetry(n, r.min(n - 1), seed);
        let b = full_matrix_algebra(n, &tol);
        let e = expectation_from_involutive_automorphism(&b, &AutSpec::Inner(w), &tol).unwrap();
        let a = e.target.clone();
        let p = make_inclusion_pair(&b, &a, &e, &tol).unwrap();
        prop_assert!(p.index.dist(&b.unit().scale_re(2.0)) < 1e-9);
        prop_assert!(p.report.all_pass());
        let inv = pair_invariants(&p, &tol);
        prop_assert!(inv.all_pass(), "{:?}", inv.failures());
    }

    #[test]
    fn fix_d_index_and_grading(seed in 0u64..10_000) {
        let tol = Tol::default().with_seed(seed);
        let p = fix_d(seed, &tol).unwrap();
        let (_, r) = fix_d_unitary(seed);
        prop_assert!(p.index.dist(&p.b.unit().scale_re(2.0)) < 1e-9);
        // A = M_r ⊕ M_{4-r}, B_- = off-diagonal blocks
        prop_assert_eq!(p.a.dim(), r * r + (4 - r) * (4 - r));
        prop_assert_eq!(minus_part(&p, &tol).dim(), 2 * r * (4 - r));
        prop_assert!(pair_invariants(&p, &tol).all_pass());
    }

    #[test]
    fn index_is_independent_of_the_spanning_set(seed in 0u64..10_000) {
        let tol = Tol::default().with_seed(seed);
        let p = fix_d(seed, &tol).unwrap();
        let mut g = rng(seed);
        let bb = p.b.basis();
        let seeds: Vec<CMat> = (0..bb.len())
            .map(|_| bb.iter().fold(CMat::zeros(4, 4), |acc, b| &acc + &b.scale(random_scalar(&mut g))))
            .collect();
        let q1 = quasi_basis(&p.e, &tol).unwrap();
        let q2 = quasi_basis_from_seeds(&p.e, &seeds, &tol).unwrap();
        prop_assert!(q1.index_value.dist(&q2.index_value) < 1e-8);
        let probes: Vec<CMat> = (0..100).map(|_| p.b.random_element(&mut g)).collect();
        let (l, r) = q2.reconstruction_residual(&p.e, &probes);
        prop_assert!(l < 1e-8 && r < 1e-8);
    }

    #[test]
    fn basic_construction_invariants(seed in 0u64..10_000) {
        let tol = Tol::default().with_seed(seed);
        let p = fix_d(seed, &tol).unwrap();
        let c = crossed_model(&p, &tol);
        prop_assert_eq!(c.algebra.dim(), 2 * p.b.dim());
        let rep = verify_basic(&c, &p, &tol);
        prop_assert!(rep.all_pass(), "{:?}", rep.failures());
        for b in p.b.basis() {
            prop_assert!(reduce_left(&c, &c.embed(b), &tol).unwrap().dist(b) < 1e-9);
        }
    }

    #[test]
    fn bimodule_invariants(seed in 0u64..10_000) {
        let tol = Tol::default().with_seed(seed);
        let p = fix_d(seed, &tol).unwrap();
        let c = crossed_model(&p, &tol);
        let xb = build_xb(&c, &p, &tol);
        let bm = build_bminus(&p, &tol);
        prop_assert_eq!(xb.dim(), p.b.dim() - p.a.dim());
        prop_assert_eq!(bm.dim(), p.b.dim() - p.a.dim());
        for x in [&xb, &bm] {
            let rep = verify_bimodule(x, &tol);
            prop_assert!(rep.all_pass(), "{:?}", rep.failures());
            let (_, vrep) = v_map(x, &tol);
            prop_assert!(vrep.all_pass(), "{:?}", vrep.failures());
            let w = fullness_witness(&x.module, &tol).unwrap();
            let sum = w
                .iter()
                .fold(x.module.a_unit() * C64::new(0.0, 0.0), |acc, (z, y)| acc + x.module.rinner(z, y));
            prop_assert!((sum - x.module.a_unit()).norm() < 1e-8);
        }
    }

    #[test]
    fn linking_algebra_has_index_two(seed in 0u64..10_000) {
        let tol = Tol::default().with_seed(seed);
        let p = fix_d(seed, &tol).unwrap();
        let x = functor_f(&p, &tol).unwrap();
        let (q, link) = functor_g(&x, &tol).unwrap();
        prop_assert_eq!(link.bx.dim(), x.module.a_dim() + x.dim());
        prop_assert!(q.index.dist(&q.b.unit().scale_re(2.0)) < 1e-8);
        prop_assert!(link.report.all_pass(), "{:?}", link.report.failures());
    }

    #[test]
    fn classification_paths_agree(seed in 0u64..10_000) {
        let tol = Tol::default().with_seed(seed);
        let p = fix_d(seed, &tol).unwrap();
        let (_, r) = fix_d_unitary(seed);
        let rep = classify(&p, &tol).unwrap();
        prop_assert!(rep.consistent);
        // e_A ~ 1 - e_A exactly when the two eigenspaces of w have equal rank
        prop_assert_eq!(rep.projections_equivalent, r == 2);
        prop_assert_eq!(rep.unitary_quasi_basis.is_some(), r == 2);
        prop_assert_eq!(rep.two_z_inner.is_some(), r == 2);
    }

    #[test]
    fn crossed_products_classify_with_trivial_z(n in 1usize..3, seed in any::<u64>()) {
        let tol = Tol::default();
        // A = M_n ⊕ M_n with beta the flip of the summands (inner in M_2n)
        let full = full_matrix_algebra(n, &tol);
        let gens: Vec<CMat> = full
            .basis()
            .iter()
            .flat_map(|x| {
                let z = CMat::zeros(n, n);
                [CMat::direct_sum(x, &z), CMat::direct_sum(&z, x)]
            })
            .collect();
        let a = indextwo::cstar::generate_algebra(2 * n, &gens, &tol);
        let v = random_unitary(n, &mut rng(seed));
        let z = CMat::zeros(n, n);
        let w = CMat::block2(&z, &v, &v.adjoint(), &z);
        let beta = LinMap::from_fn(a.space(), |x| &(&w * x) * &w.adjoint());
        prop_assert!(check_automorphism(&a, &beta, &tol).all_pass());
        let p = crossed_product_z2(&a, &beta, &tol).unwrap();
        let rep = classify(&p, &tol).unwrap();
        prop_assert!(rep.consistent && rep.projections_equivalent);
        let sys = rep.two_z_inner.unwrap();
        prop_assert!(sys.z.dist(&CMat::identity(sys.z.rows())) < 1e-8);
    }

    #[test]
    fn equivalence_is_an_equivalence_relation(seed in 0u64..10_000) {
        let tol = Tol::default().with_seed(seed);
        let p = fix_d(seed, &tol).unwrap();
        let c = crossed_model(&p, &tol);
        let e = c.jones.clone();
        let f = c.one_minus_e();
        let (refl, v) = mvn_equivalent(&c.algebra, &e, &e, &tol).unwrap();
        prop_assert!(refl);
        let v = v.unwrap();
        prop_assert!((&v.adjoint() * &v).dist(&e) < 1e-8 && (&v * &v.adjoint()).dist(&e) < 1e-8);
        let (ef, w1) = mvn_equivalent(&c.algebra, &e, &f, &tol).unwrap();
        let (fe, w2) = mvn_equivalent(&c.algebra, &f, &e, &tol).unwrap();
        prop_assert_eq!(ef, fe);
        if let (Some(w1), Some(w2)) = (w1, w2) {
            // symmetric through the adjoint, transitive through the product
            prop_assert!((&w1 * &w1.adjoint()).dist(&f) < 1e-8);
            let back = &w2 * &w1;
            prop_assert!((&back.adjoint() * &back).dist(&e) < 1e-8);
            prop_assert!((&back * &back.adjoint()).dist(&e) < 1e-8);
        }
        let bs = block_structure(&c.algebra, &tol).unwrap();
        let total: usize = bs.block_sizes.iter().map(|k| k * k).sum();
        prop_assert_eq!(total, c.algebra.dim());
        let rank: usize = bs.block_sizes.iter().zip(&bs.multiplicities).map(|(k, m)| k * m).sum();
        prop_assert_eq!(rank, c.ambient_dim());
    }
}

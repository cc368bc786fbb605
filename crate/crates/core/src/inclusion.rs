//! Conditional expectations, quasi-bases and the Watatani index.
//!
//! The quasi-basis is produced by a frame algorithm: orthonormalize a
//! spanning set of `B` for `tau(E(x* y))`, form the frame operator
//! `S(y) = Σ f_j E(f_j* y)` (a positive invertible right `A`-module map when
//! the index is finite) and set `w_i = S^{-1/2} f_i`. Then
//! `Σ w_i E(w_i* y) = y` and `Index E = Σ w_i w_i*`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::check::{Check, CheckReport};
use crate::cstar::{check_automorphism, CStarAlg};
use crate::error::{Error, Result};
use crate::matkernel::{c, hermitian_eig, psd_inv_sqrt, random_scalar, CMat, Tol, C64, ONE};
use crate::subspace::{LinMap, Subspace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExpKind {
    Involution,
    Blocks,
    Matrix,
}

/// A linear map `E: B → A` presented as images of an orthonormal basis of `B`.
#[derive(Debug, Clone)]
pub struct CondExp {
    pub source: CStarAlg,
    pub target: CStarAlg,
    pub action: LinMap,
    pub kind: ExpKind,
}

impl CondExp {
    /// Wraps an arbitrary linear map; nothing is checked until [`validate_expectation`].
    pub fn from_map(source: CStarAlg, target: CStarAlg, action: LinMap) -> Self {
        CondExp {
            source,
            target,
            action,
            kind: ExpKind::Matrix,
        }
    }

    pub fn from_fn(source: CStarAlg, target: CStarAlg, f: impl Fn(&CMat) -> CMat) -> Self {
        let action = LinMap::from_fn(source.space(), f);
        Self::from_map(source, target, action)
    }

    pub fn apply(&self, x: &CMat) -> CMat {
        self.action.apply(x)
    }
}

/// An order-two automorphism, either inner (`Ad(w)`) or an explicit linear map.
#[derive(Debug, Clone)]
pub enum AutSpec {
    Inner(CMat),
    Map(LinMap),
}

impl AutSpec {
    pub fn to_map(&self, alg: &CStarAlg) -> LinMap {
        match self {
            AutSpec::Inner(w) => {
                let wa = w.adjoint();
                LinMap::from_fn(alg.space(), |x| &(w * x) * &wa)
            }
            AutSpec::Map(m) => {
                let m = m.clone();
                LinMap::from_fn(alg.space(), move |x| m.apply(x))
            }
        }
    }
}

fn max_dist(a: impl Iterator<Item = (CMat, CMat)>) -> f64 {
    a.fold(0.0f64, |m, (x, y)| m.max(x.dist(&y)))
}

/// `E = (id + beta) / 2` onto the fixed-point algebra of `beta`.
pub fn expectation_from_involutive_automorphism(b: &CStarAlg, aut: &AutSpec, tol: &Tol) -> Result<CondExp> {
    let beta = aut.to_map(b);
    let rep = check_automorphism(b, &beta, tol);
    if let Some(f) = rep.failures().first() {
        return Err(Error::NotAutomorphism(format!("{} (residual {:.3e})", f.name, f.residual)));
    }
    let inv = max_dist(b.basis().iter().map(|x| (beta.apply(&beta.apply(x)), x.clone())));
    if inv > tol.bound(1.0) * 10.0 {
        return Err(Error::NotInvolutive(inv));
    }
    let fixed = beta.eigenspace(ONE, tol);
    let target = CStarAlg::from_subspace(fixed, b.unit().clone());
    let action = LinMap::from_fn(b.space(), |x| (x + &beta.apply(x)).scale_re(0.5));
    Ok(CondExp {
        source: b.clone(),
        target,
        action,
        kind: ExpKind::Involution,
    })
}

/// `E(x) = Σ p_i x p_i` for a partition of the unit by projections of `B`.
pub fn expectation_from_block_compression(b: &CStarAlg, projections: &[CMat], tol: &Tol) -> Result<CondExp> {
    if projections.is_empty() {
        return Err(Error::NotPartition("no projections given".into()));
    }
    let n = b.ambient_dim();
    let mut sum = CMat::zeros(n, n);
    for (i, p) in projections.iter().enumerate() {
        let d = p.projection_defect();
        if d > tol.bound(p.norm()) * 10.0 {
            return Err(Error::NotPartition(format!("p_{i} is not a projection (residual {d:.3e})")));
        }
        let r = b.residual(p);
        if r > tol.bound(p.norm()) * 10.0 {
            return Err(Error::NotPartition(format!("p_{i} is not in B (residual {r:.3e})")));
        }
        for (j, q) in projections.iter().enumerate().skip(i + 1) {
            let o = (p * q).norm();
            if o > tol.bound(1.0) * 10.0 {
                return Err(Error::NotPartition(format!("p_{i} p_{j} != 0 (residual {o:.3e})")));
            }
        }
        sum += p;
    }
    let s = sum.dist(b.unit());
    if s > tol.bound(b.unit().norm()) * 10.0 {
        return Err(Error::NotPartition(format!("projections sum to the unit only up to {s:.3e}")));
    }
    let ps = projections.to_vec();
    let action = LinMap::from_fn(b.space(), move |x| {
        let mut acc = CMat::zeros(n, n);
        for p in &ps {
            acc += &(&(p * x) * p);
        }
        acc
    });
    let target = CStarAlg::from_subspace(action.image(tol), b.unit().clone());
    Ok(CondExp {
        source: b.clone(),
        target,
        action,
        kind: ExpKind::Blocks,
    })
}

/// Checks the conditional-expectation axioms; failures are reported, not raised.
pub fn validate_expectation(e: &CondExp, tol: &Tol) -> CheckReport {
    let mut rep = CheckReport::new();
    let bb = e.source.basis();
    let ab = e.target.basis();
    let imgs: Vec<CMat> = bb.iter().map(|x| e.apply(x)).collect();
    let scale = imgs.iter().fold(1.0f64, |m, x| m.max(x.norm()));
    let eps = tol.bound(scale);

    rep.add(
        "unital",
        "E(1) = 1",
        e.apply(e.source.unit()).dist(e.target.unit()),
        eps,
    );
    rep.add(
        "range_in_target",
        "E(B) ⊆ A",
        imgs.iter().fold(0.0f64, |m, y| m.max(e.target.residual(y))),
        eps,
    );
    rep.add(
        "fixes_target",
        "E(a) = a for a in A",
        max_dist(ab.iter().map(|a| (e.apply(a), a.clone()))),
        eps,
    );
    rep.add(
        "idempotent",
        "E(E(x)) = E(x)",
        max_dist(imgs.iter().map(|y| (e.apply(y), y.clone()))),
        eps,
    );
    let mut bim = 0.0f64;
    for a in ab {
        for (x, ex) in bb.iter().zip(&imgs) {
            for a2 in ab {
                let lhs = e.apply(&(&(a * x) * a2));
                let rhs = &(a * ex) * a2;
                bim = bim.max(lhs.dist(&rhs));
            }
        }
    }
    rep.add("bimodular", "E(a x a') = a E(x) a'", bim, eps);
    rep.add(
        "self_adjoint",
        "E(x*) = E(x)*",
        max_dist(bb.iter().zip(&imgs).map(|(x, ex)| (e.apply(&x.adjoint()), ex.adjoint()))),
        eps,
    );
    let mut rng = tol.rng(0xe0);
    let mut samples: Vec<CMat> = bb.to_vec();
    samples.extend((0..tol.sample_count).map(|_| e.source.random_element(&mut rng)));
    let mut neg = 0.0f64;
    for x in &samples {
        let y = e.apply(&(&x.adjoint() * x));
        let h = (&y + &y.adjoint()).scale_re(0.5);
        if let Ok((vals, _)) = hermitian_eig(&h, tol) {
            let lo = vals.last().copied().unwrap_or(0.0);
            neg = neg.max((-lo).max(0.0) / x.norm().powi(2).max(1e-300));
        }
    }
    rep.add("positive", "E(x*x) ⪰ 0 on basis and sampled x", neg, tol.bound(1.0));
    rep
}

/// Finite family `{(u_i, v_i)}` with `Σ u_i E(v_i b) = b = Σ E(b u_i) v_i`.
#[derive(Debug, Clone, Serialize)]
pub struct QuasiBasis {
    pub pairs: Vec<(CMat, CMat)>,
    pub index_value: CMat,
}

impl QuasiBasis {
    pub fn new(pairs: Vec<(CMat, CMat)>) -> Self {
        let n = pairs[0].0.rows();
        let mut idx = CMat::zeros(n, n);
        for (u, v) in &pairs {
            idx += &(u * v);
        }
        QuasiBasis { pairs, index_value: idx }
    }

    /// `(max |Σ u_i E(v_i b) - b|, max |Σ E(b u_i) v_i - b|)` over `xs`.
    pub fn reconstruction_residual(&self, e: &CondExp, xs: &[CMat]) -> (f64, f64) {
        let mut left = 0.0f64;
        let mut right = 0.0f64;
        for b in xs {
            let mut l = CMat::zeros(b.rows(), b.cols());
            let mut r = CMat::zeros(b.rows(), b.cols());
            for (u, v) in &self.pairs {
                l += &(u * &e.apply(&(v * b)));
                r += &(&e.apply(&(b * u)) * v);
            }
            left = left.max(l.dist(b));
            right = right.max(r.dist(b));
        }
        (left, right)
    }
}

/// Quasi-basis from the orthonormal basis of `B`.
pub fn quasi_basis(e: &CondExp, tol: &Tol) -> Result<QuasiBasis> {
    quasi_basis_from_seeds(e, e.source.basis(), tol)
}

/// Quasi-basis from an arbitrary spanning family of `B` (must be linearly independent).
pub fn quasi_basis_from_seeds(e: &CondExp, seeds: &[CMat], tol: &Tol) -> Result<QuasiBasis> {
    let d = seeds.len();
    if d == 0 {
        return Err(Error::IndexInfinite);
    }
    let tau = |x: &CMat| x.normalized_trace();
    let mut g = DMatrix::<C64>::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            g[(i, j)] = tau(&e.apply(&(&seeds[i].adjoint() * &seeds[j])));
        }
    }
    let g_is = psd_inv_sqrt(&CMat::from_matrix(g), tol).map_err(|_| Error::IndexInfinite)?;
    let combine = |coef: &CMat, col: usize, family: &[CMat]| {
        let mut acc = CMat::zeros(family[0].rows(), family[0].cols());
        for (i, s) in family.iter().enumerate() {
            acc += &s.scale(coef.get(i, col));
        }
        acc
    };
    let f: Vec<CMat> = (0..d).map(|j| combine(&g_is, j, seeds)).collect();
    // M_kj = E(f_k* f_j) ∈ A; S_kl = Σ_j tau(M_kj M_jl)
    let m: Vec<Vec<CMat>> = (0..d)
        .map(|k| (0..d).map(|j| e.apply(&(&f[k].adjoint() * &f[j]))).collect())
        .collect();
    let mut s = DMatrix::<C64>::zeros(d, d);
    for k in 0..d {
        for l in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..d {
                acc += tau(&(&m[k][j] * &m[j][l]));
            }
            s[(k, l)] = acc;
        }
    }
    let s_is = psd_inv_sqrt(&CMat::from_matrix(s), tol).map_err(|_| Error::IndexInfinite)?;
    let pairs = (0..d)
        .map(|i| {
            let w = combine(&s_is, i, &f);
            let ws = w.adjoint();
            (w, ws)
        })
        .collect();
    Ok(QuasiBasis::new(pairs))
}

#[derive(Debug, Clone, Serialize)]
pub struct IndexReport {
    pub value: CMat,
    pub quasi_basis: QuasiBasis,
    pub report: CheckReport,
}

/// `Index E = Σ w_i w_i*`, checked for centrality, reconstruction and
/// independence from the spanning set used to build the quasi-basis.
pub fn watatani_index(e: &CondExp, tol: &Tol) -> Result<IndexReport> {
    let qb = quasi_basis(e, tol)?;
    let value = qb.index_value.clone();
    let bb = e.source.basis();
    let scale = value.norm().max(1.0);
    let central = bb.iter().fold(0.0f64, |m, b| m.max(value.commutator(b).norm()));
    if central > tol.bound(scale) * 10.0 {
        return Err(Error::IndexNotCentral(central));
    }
    let mut rep = CheckReport::new();
    rep.add("central", "[Index E, b] = 0 for b in B", central, tol.bound(scale));
    let (l, r) = qb.reconstruction_residual(e, bb);
    rep.add("reconstruct_left", "Σ u_i E(u_i* b) = b", l, tol.bound(scale));
    rep.add("reconstruct_right", "Σ E(b u_i) u_i* = b", r, tol.bound(scale));

    let mut rng = tol.rng(0x1d);
    let d = bb.len();
    let mix: Vec<Vec<C64>> = (0..d).map(|_| (0..d).map(|_| random_scalar(&mut rng)).collect()).collect();
    let seeds: Vec<CMat> = mix
        .iter()
        .map(|row| {
            let mut acc = CMat::zeros(bb[0].rows(), bb[0].cols());
            for (b, z) in bb.iter().zip(row) {
                acc += &b.scale(*z);
            }
            acc
        })
        .collect();
    let qb2 = quasi_basis_from_seeds(e, &seeds, tol)?;
    rep.add(
        "seed_invariant",
        "Index E independent of the quasi-basis",
        qb2.index_value.dist(&value),
        1e-8f64.max(tol.bound(scale)),
    );
    Ok(IndexReport {
        value,
        quasi_basis: qb,
        report: rep,
    })
}

/// A verified index-2 inclusion `A ⊂ B` with expectation `E` and `beta = 2E - id`.
#[derive(Debug, Clone)]
pub struct InclusionPair {
    pub b: CStarAlg,
    pub a: CStarAlg,
    pub e: CondExp,
    pub quasi_basis: QuasiBasis,
    pub beta: LinMap,
    pub index: CMat,
    pub report: CheckReport,
}

impl InclusionPair {
    pub fn expect(&self, x: &CMat) -> CMat {
        self.e.apply(x)
    }

    pub fn beta(&self, x: &CMat) -> CMat {
        self.beta.apply(x)
    }

    pub fn ambient_dim(&self) -> usize {
        self.b.ambient_dim()
    }
}

/// Accepts `(B, A, E)` only if `E` is a valid expectation onto `A` with
/// `Index E = 2·1`, and `2E - id` is an order-two automorphism fixing exactly `A`.
pub fn make_inclusion_pair(b: &CStarAlg, a: &CStarAlg, e: &CondExp, tol: &Tol) -> Result<InclusionPair> {
    let mismatch = e
        .target
        .space()
        .containment_residual(a.space())
        .max(a.space().containment_residual(e.target.space()));
    if mismatch > tol.bound(1.0) * 10.0 || a.dim() != e.target.dim() {
        return Err(Error::TargetMismatch(mismatch.max((a.dim() != e.target.dim()) as u8 as f64)));
    }
    let valid = validate_expectation(e, tol);
    if let Some(f) = valid.failures().first() {
        return Err(Error::InvalidExpectation(format!("{} (residual {:.3e})", f.name, f.residual)));
    }
    let idx = watatani_index(e, tol)?;
    let two = b.unit().scale_re(2.0);
    let off = idx.value.dist(&two);
    if off > tol.bound(two.norm()) {
        return Err(Error::IndexNotTwo(idx.value));
    }
    let beta = LinMap::from_fn(b.space(), |x| &e.apply(x).scale_re(2.0) - x);
    let aut = check_automorphism(b, &beta, tol);
    if let Some(f) = aut.failures().first() {
        return Err(Error::BetaNotAutomorphism(format!("{} (residual {:.3e})", f.name, f.residual)));
    }
    let bb = b.basis();
    let sq = max_dist(bb.iter().map(|x| (beta.apply(&beta.apply(x)), x.clone())));
    if sq > tol.bound(1.0) * 10.0 {
        return Err(Error::BetaNotAutomorphism(format!("beta^2 != id (residual {sq:.3e})")));
    }
    let fixed = beta.eigenspace(ONE, tol);
    let fix_res = fixed.containment_residual(a.space()).max(a.space().containment_residual(&fixed));
    if fixed.dim() != a.dim() || fix_res > tol.bound(1.0) * 10.0 {
        return Err(Error::BetaNotAutomorphism(format!(
            "fixed algebra has dimension {} (A has {})",
            fixed.dim(),
            a.dim()
        )));
    }

    let mut report = CheckReport::new();
    report.merge("expectation", valid);
    report.merge("index", idx.report);
    report.add("index_two", "Index E = 2·1", off, tol.bound(two.norm()));
    report.merge("beta", aut);
    report.add("beta_order_two", "beta^2 = id", sq, tol.bound(1.0));
    report.push(Check::count("fixed_dim", "dim B^beta = dim A", fixed.dim(), a.dim()));
    report.add("fixed_algebra", "B^beta = A", fix_res, tol.bound(1.0));
    Ok(InclusionPair {
        b: b.clone(),
        a: a.clone(),
        e: e.clone(),
        quasi_basis: idx.quasi_basis,
        beta,
        index: idx.value,
        report,
    })
}

/// `B_- = {b : E(b) = 0}`, the (-1)-eigenspace of `beta`.
pub fn minus_part(p: &InclusionPair, tol: &Tol) -> Subspace {
    p.beta.eigenspace(-ONE, tol)
}

/// Structural identities every accepted pair satisfies.
pub fn pair_invariants(p: &InclusionPair, tol: &Tol) -> CheckReport {
    let mut rep = CheckReport::new();
    let bb = p.b.basis();
    let half = max_dist(bb.iter().map(|x| (p.expect(x), (x + &p.beta(x)).scale(c(0.5, 0.0)))));
    rep.add("expectation_from_beta", "E(b) = (b + beta(b)) / 2", half, tol.bound(1.0));
    let minus = minus_part(p, tol);
    let kill = minus.basis().iter().fold(0.0f64, |m, x| m.max(p.expect(x).norm()));
    rep.add("kills_odd_part", "E(B_-) = 0", kill, tol.bound(1.0));
    rep.push(Check::count(
        "graded_dimension",
        "dim B = dim A + dim B_-",
        p.a.dim() + minus.dim(),
        p.b.dim(),
    ));
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cstar::generate_algebra;

    fn tol() -> Tol {
        Tol::default()
    }

    fn m(n: usize) -> CStarAlg {
        let gens: Vec<CMat> = (0..n - 1).map(|i| CMat::unit(n, i, i + 1)).collect();
        generate_algebra(n, &gens, &tol())
    }

    #[test]
    fn diagonal_expectation_on_m2() {
        let b = m(2);
        let e = expectation_from_involutive_automorphism(&b, &AutSpec::Inner(CMat::diag_re(&[1.0, -1.0])), &tol())
            .unwrap();
        assert_eq!(e.target.dim(), 2);
        let x = CMat::from_re_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert!(e.apply(&x).dist(&CMat::diag_re(&[1.0, 4.0])) < 1e-12);
        let rep = validate_expectation(&e, &tol());
        assert!(rep.all_pass(), "{:?}", rep.failures());
        assert!(rep.max_residual() < 1e-12);
    }

    #[test]
    fn block_compression_matches_involution() {
        let b = m(3);
        let p = CMat::unit(3, 0, 0);
        let pp = CMat::diag_re(&[0.0, 1.0, 1.0]);
        let e1 = expectation_from_block_compression(&b, &[p.clone(), pp.clone()], &tol()).unwrap();
        let e2 = expectation_from_involutive_automorphism(&b, &AutSpec::Inner(&p - &pp), &tol()).unwrap();
        assert!(e1.action.distance_on_basis(&e2.action) < 1e-12);
        assert_eq!(e1.target.dim(), 5);
        let id = expectation_from_block_compression(&b, &[CMat::identity(3)], &tol()).unwrap();
        assert!(id.action.distance_on_basis(&LinMap::from_fn(b.space(), |x| x.clone())) < 1e-12);
    }

    #[test]
    fn block_compression_rejects_non_partition() {
        let b = m(2);
        let r = expectation_from_block_compression(&b, &[CMat::unit(2, 0, 0)], &tol());
        assert!(matches!(r, Err(Error::NotPartition(_))));
    }

    #[test]
    fn involution_must_square_to_identity() {
        let b = m(2);
        let w = CMat::diag(&[ONE, crate::matkernel::I]);
        let r = expectation_from_involutive_automorphism(&b, &AutSpec::Inner(w), &tol());
        assert!(matches!(r, Err(Error::NotInvolutive(_))));
    }

    #[test]
    fn identity_expectation_has_index_one() {
        let b = m(2);
        let e = CondExp::from_fn(b.clone(), b.clone(), |x| x.clone());
        assert!(validate_expectation(&e, &tol()).all_pass());
        let idx = watatani_index(&e, &tol()).unwrap();
        assert!(idx.value.dist(&CMat::identity(2)) < 1e-9);
        assert!(matches!(make_inclusion_pair(&b, &b, &e, &tol()), Err(Error::IndexNotTwo(_))));
    }

    #[test]
    fn mutated_expectation_fails_validation() {
        let b = m(2);
        let w = CMat::diag_re(&[1.0, -1.0]);
        let good = expectation_from_involutive_automorphism(&b, &AutSpec::Inner(w.clone()), &tol()).unwrap();
        let bad = CondExp::from_fn(b.clone(), good.target.clone(), |x| {
            &x.scale_re(0.75) + &(&(&w * x) * &w).scale_re(0.25)
        });
        let rep = validate_expectation(&bad, &tol());
        assert!(!rep.all_pass());
        assert!(!rep.get("idempotent").unwrap().pass);
        assert!(!rep.get("range_in_target").unwrap().pass);
    }

    #[test]
    fn index_two_for_m2_over_d2() {
        let b = m(2);
        let e = expectation_from_involutive_automorphism(&b, &AutSpec::Inner(CMat::diag_re(&[1.0, -1.0])), &tol())
            .unwrap();
        let idx = watatani_index(&e, &tol()).unwrap();
        assert!(idx.value.dist(&CMat::identity(2).scale_re(2.0)) < 1e-9);
        assert!(idx.report.all_pass(), "{:?}", idx.report.failures());
        let witness = QuasiBasis::new(vec![
            (CMat::identity(2), CMat::identity(2)),
            (CMat::from_re_rows(&[&[0.0, 1.0], &[1.0, 0.0]]), CMat::from_re_rows(&[&[0.0, 1.0], &[1.0, 0.0]])),
        ]);
        let (l, r) = witness.reconstruction_residual(&e, b.basis());
        assert!(l < 1e-12 && r < 1e-12);
        let p = make_inclusion_pair(&b, &e.target, &e, &tol()).unwrap();
        assert!(pair_invariants(&p, &tol()).all_pass());
        assert_eq!(minus_part(&p, &tol()).dim(), 2);
    }
}

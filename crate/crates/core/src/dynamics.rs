//! `Z_2` crossed products, 2Z-inner systems and the unitary-quasi-basis
//! classification of index-2 inclusions.
//!
//! For an index-2 pair the following are checked against each other:
//! `e_A ~ 1 - e_A` in the basic construction, a unitary `u ∈ B` with
//! `{(1, 1), (u, u*)}` a quasi-basis, and a 2Z-inner system
//! `(A, Ad u, u^2)` whose restricted crossed product is `B`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::basic::crossed_model;
use crate::bimodule::build_xalpha;
use crate::check::{Check, CheckReport};
use crate::correspondence::{functor_g, verify_l_equivalence, LinkingData};
use crate::cstar::{block_ranks, block_structure, center, check_automorphism, commutant, mvn_equivalent, CStarAlg};
use crate::error::{Error, Result};
use crate::inclusion::{make_inclusion_pair, minus_part, CondExp, InclusionPair};
use crate::matkernel::{null_space, polar_partial_isometry, random_scalar, unitary_inv_sqrt, CMat, Tol, C64};
use crate::subspace::LinMap;

/// `(A, alpha, z)` with `alpha(z) = z` and `alpha^2 = Ad(z)`.
#[derive(Debug, Clone)]
pub struct TwoZInnerSystem {
    pub a: CStarAlg,
    pub alpha: LinMap,
    pub z: CMat,
}

impl TwoZInnerSystem {
    /// `alpha = Ad(y)` restricted to `A`.
    pub fn inner(a: CStarAlg, y: &CMat, z: CMat) -> Self {
        let ys = y.adjoint();
        let alpha = LinMap::from_fn(a.space(), |x| &(y * x) * &ys);
        TwoZInnerSystem { a, alpha, z }
    }

    pub fn alpha_matrix(&self) -> CMat {
        CMat::from_matrix(self.alpha.matrix_in(self.a.space()))
    }

    pub fn alpha_inverse(&self, tol: &Tol) -> Result<LinMap> {
        let m = self.alpha.matrix_in(self.a.space());
        let inv = m
            .try_inverse()
            .ok_or_else(|| Error::NotAutomorphism("alpha is singular".into()))?;
        let n = self.a.ambient_dim();
        let imgs = (0..inv.ncols())
            .map(|k| self.a.space().combine(&inv.column(k).into_owned()))
            .collect();
        let f = LinMap::from_basis_images(self.a.space().clone(), imgs, n, n);
        let _ = tol;
        Ok(f)
    }
}

impl Serialize for TwoZInnerSystem {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("TwoZInnerSystem", 3)?;
        st.serialize_field("algebra", &self.a)?;
        st.serialize_field("alpha", &self.alpha_matrix())?;
        st.serialize_field("z", &self.z)?;
        st.end()
    }
}

pub fn validate_two_z_inner(sys: &TwoZInnerSystem, tol: &Tol) -> CheckReport {
    let mut rep = CheckReport::new();
    rep.merge("alpha", check_automorphism(&sys.a, &sys.alpha, tol));
    let z = &sys.z;
    let s = z.norm().max(1.0);
    rep.add("z_unitary", "z* z = z z* = 1", z.unitary_defect(), tol.bound(s));
    rep.add("z_in_a", "z ∈ A", sys.a.residual(z), tol.bound(s));
    rep.add("alpha_fixes_z", "alpha(z) = z", sys.alpha.apply(z).dist(z), tol.bound(s));
    let zs = z.adjoint();
    let sq = sys.a.basis().iter().fold(0.0f64, |m, x| {
        let lhs = sys.alpha.apply(&sys.alpha.apply(x));
        m.max(lhs.dist(&(&(z * x) * &zs)))
    });
    rep.add("alpha_squared", "alpha^2 = Ad(z)", sq, tol.bound(s * s));
    rep
}

fn block2_of(a: &CMat, b: &CMat, c: &CMat, d: &CMat) -> CMat {
    CMat::block2(a, b, c, d)
}

fn top_left(m: &CMat, n: usize) -> CMat {
    m.block(0, 0, n, n)
}

/// `A ⋊_beta Z_2 = {[[a_1, a_2], [beta(a_2), beta(a_1)]]}` with `A` diagonal
/// and `E` the even part.
pub fn crossed_product_z2(a: &CStarAlg, beta: &LinMap, tol: &Tol) -> Result<InclusionPair> {
    let aut = check_automorphism(a, beta, tol);
    if let Some(f) = aut.failures().first() {
        return Err(Error::NotAutomorphism(format!("{} (residual {:.3e})", f.name, f.residual)));
    }
    let sq = a
        .basis()
        .iter()
        .fold(0.0f64, |m, x| m.max(beta.apply(&beta.apply(x)).dist(x)));
    if sq > tol.bound(1.0) * 10.0 {
        return Err(Error::NotInvolutive(sq));
    }
    let n = a.ambient_dim();
    let zero = CMat::zeros(n, n);
    let even = |x: &CMat| block2_of(x, &zero, &zero, &beta.apply(x));
    let odd = |x: &CMat| block2_of(&zero, x, &beta.apply(x), &zero);
    let evens: Vec<CMat> = a.basis().iter().map(even).collect();
    let mut all = evens.clone();
    all.extend(a.basis().iter().map(odd));
    let unit = even(a.unit());
    let b = CStarAlg::from_span(2 * n, &all, &unit, tol);
    let a_emb = CStarAlg::from_span(2 * n, &evens, &unit, tol);
    let e = CondExp::from_fn(b.clone(), a_emb.clone(), |x| even(&top_left(x, n)));
    make_inclusion_pair(&b, &a_emb, &e, tol)
}

/// The finite model `C = {[[a, x], [alpha(xz), alpha(a)]]}` of the restricted
/// crossed product, with the comparison `Phi: C → B_{X_alpha}`.
#[derive(Debug, Clone)]
pub struct RestrictedModel {
    pub pair: InclusionPair,
    pub phi: LinMap,
    pub phi_report: CheckReport,
    pub linking: LinkingData,
}

pub fn restricted_crossed_model(sys: &TwoZInnerSystem, tol: &Tol) -> Result<RestrictedModel> {
    let v = validate_two_z_inner(sys, tol);
    if let Some(f) = v.failures().first() {
        return Err(Error::NotTwoZInner(format!("{} (residual {:.3e})", f.name, f.residual)));
    }
    let a = &sys.a;
    let n = a.ambient_dim();
    let zero = CMat::zeros(n, n);
    let alpha = &sys.alpha;
    let even = |x: &CMat| block2_of(x, &zero, &zero, &alpha.apply(x));
    let odd = |x: &CMat| block2_of(&zero, x, &alpha.apply(&(x * &sys.z)), &zero);
    let evens: Vec<CMat> = a.basis().iter().map(even).collect();
    let odds: Vec<CMat> = a.basis().iter().map(odd).collect();
    let all: Vec<CMat> = evens.iter().chain(&odds).cloned().collect();
    let unit = even(a.unit());
    let c = CStarAlg::from_span(2 * n, &all, &unit, tol);
    let a_emb = CStarAlg::from_span(2 * n, &evens, &unit, tol);
    let e = CondExp::from_fn(c.clone(), a_emb.clone(), |x| even(&top_left(x, n)));
    let pair = make_inclusion_pair(&c, &a_emb, &e, tol)?;

    // Phi: diag(a, alpha(a)) ↦ diag(a, a), odd(a_k) ↦ [[0, a_k], [ã_k♯, 0]]
    let x = build_xalpha(sys, tol)?;
    let (p2, link) = functor_g(&x, tol)?;
    let mut imgs: Vec<CMat> = a.basis().iter().map(|b| link.delta.apply(b)).collect();
    let ka = a.dim();
    for k in 0..ka {
        let mut ek = DVector::zeros(ka);
        ek[k] = C64::new(1.0, 0.0);
        imgs.push(link.odd(&ek));
    }
    let (phi, res) = LinMap::from_generators(&all, &imgs, tol);
    let (a_map, res_a) = LinMap::from_generators(&evens, &imgs[..ka], tol);
    let mut phi_report = CheckReport::new();
    phi_report.add(
        "well_defined",
        "Phi respects linear relations in C",
        res.max(res_a),
        tol.bound(1.0) * 10.0,
    );
    phi_report.merge("", verify_l_equivalence(&pair, &p2, &phi, Some(&a_map), tol));
    Ok(RestrictedModel {
        pair,
        phi,
        phi_report,
        linking: link,
    })
}

/// Unitary `u ∈ B_-` found by polar-correcting generic elements of `B_-`.
pub fn find_quasi_basis_unitary(p: &InclusionPair, tol: &Tol) -> Option<CMat> {
    let minus = minus_part(p, tol);
    if minus.dim() == 0 {
        return None;
    }
    let mut rng = tol.rng(0x0dd);
    for _ in 0..8 {
        let m = minus.random_element(&mut rng);
        let u = polar_partial_isometry(&m, tol);
        let s = u.norm().max(1.0);
        let unitary = (&u.adjoint() * &u).dist(p.b.unit()).max((&u * &u.adjoint()).dist(p.b.unit()));
        if unitary <= tol.bound(s) * 10.0 && minus.residual(&u) <= tol.bound(s) * 10.0 {
            return Some(u.phase_normalized(1e-6));
        }
    }
    None
}

#[derive(Debug, Clone)]
pub struct ClassifyReport {
    pub projections_equivalent: bool,
    pub witness_v: Option<CMat>,
    pub jones_ranks: Vec<usize>,
    pub complement_ranks: Vec<usize>,
    pub unitary_quasi_basis: Option<CMat>,
    pub two_z_inner: Option<TwoZInnerSystem>,
    pub independent_u: Option<CMat>,
    pub consistent: bool,
    pub report: CheckReport,
}

impl Serialize for ClassifyReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("ClassifyReport", 9)?;
        st.serialize_field("projections_equivalent", &self.projections_equivalent)?;
        st.serialize_field("witness_v", &self.witness_v)?;
        st.serialize_field("jones_ranks", &self.jones_ranks)?;
        st.serialize_field("complement_ranks", &self.complement_ranks)?;
        st.serialize_field("unitary_quasi_basis", &self.unitary_quasi_basis)?;
        st.serialize_field("two_z_inner", &self.two_z_inner)?;
        st.serialize_field("independent_u", &self.independent_u)?;
        st.serialize_field("consistent", &self.consistent)?;
        st.serialize_field("checks", &self.report)?;
        st.end()
    }
}

/// Checks that `u` is a unitary with `E(u) = 0` and `b = E(b) + u E(u* b)`.
pub fn check_unitary_quasi_basis(p: &InclusionPair, u: &CMat, tol: &Tol) -> CheckReport {
    let mut rep = CheckReport::new();
    let one = p.b.unit();
    let s = u.norm().max(1.0);
    let unitary = (&u.adjoint() * u).dist(one).max((u * &u.adjoint()).dist(one));
    rep.add("unitary", "u* u = u u* = 1", unitary, tol.bound(s));
    rep.add("in_b", "u ∈ B", p.b.residual(u), tol.bound(s));
    rep.add("odd", "E(u) = 0", p.expect(u).norm(), tol.bound(s));
    let us = u.adjoint();
    let rec = p.b.basis().iter().fold(0.0f64, |m, b| {
        let r = &p.expect(b) + &(u * &p.expect(&(&us * b)));
        m.max(r.dist(b))
    });
    rep.add("reconstruct", "x = E(x) + u E(u* x)", rec, tol.bound(s));
    rep
}

/// Follows `e_A ~ 1 - e_A ⇒ unitary quasi-basis ⇒ 2Z-inner system`, and
/// compares with an independent search for the unitary.
pub fn classify(p: &InclusionPair, tol: &Tol) -> Result<ClassifyReport> {
    let c = crossed_model(p, tol);
    let e = c.jones.clone();
    let f = c.one_minus_e();
    let bs = block_structure(&c.algebra, tol)?;
    let jones_ranks = crate::cstar::block_ranks_in(&bs, &c.algebra, &e, tol)?;
    let complement_ranks = crate::cstar::block_ranks_in(&bs, &c.algebra, &f, tol)?;
    let (equivalent, v) = mvn_equivalent(&c.algebra, &e, &f, tol)?;
    let mut report = CheckReport::new();
    report.push(Check::flag(
        "rank_criterion",
        "e_A ~ 1 - e_A ⇔ equal block ranks",
        equivalent == (jones_ranks == complement_ranks),
    ));

    let mut u_opt = None;
    let mut sys_opt = None;
    if let Some(v) = &v {
        let s = v.norm().max(1.0);
        report.add("witness", "v* v = e_A, v v* = 1 - e_A", (&v.adjoint() * v).dist(&e).max((v * &v.adjoint()).dist(&f)), tol.bound(s));
        // v e_A = u e_A with u = 2 Ẽ(v e_A)
        let ve = v * &e;
        let u_raw = c.dual_exp(&ve).scale_re(2.0);
        report.add("u_from_v", "v e_A = u e_A", (&c.embed(&u_raw) * &e).dist(&ve), tol.bound(s));
        let u = normalize_square(&u_raw);
        let urep = check_unitary_quasi_basis(p, &u, tol);
        let ok = urep.all_pass();
        report.merge("u", urep);
        if ok {
            let sys = TwoZInnerSystem::inner(p.a.clone(), &u, &u * &u);
            let srep = validate_two_z_inner(&sys, tol);
            let in_a = p.a.residual(&sys.z);
            report.add("z_in_a", "u^2 ∈ A", in_a, tol.bound(1.0));
            let ok2 = srep.all_pass() && in_a <= tol.bound(1.0);
            report.merge("two_z_inner", srep);
            if ok2 {
                let model = restricted_crossed_model(&sys, tol);
                let ok3 = match &model {
                    Ok(m) => {
                        let gens = model_gens(&sys);
                        let imgs = model_imgs(&sys, &u);
                        let ka = sys.a.dim();
                        let (rho, r) = LinMap::from_generators(&gens, &imgs, tol);
                        let (a_map, _) = LinMap::from_generators(&gens[..ka], &imgs[..ka], tol);
                        let mut q = verify_l_equivalence(&m.pair, p, &rho, Some(&a_map), tol);
                        q.add("well_defined", "rho respects linear relations", r, tol.bound(1.0) * 10.0);
                        let pass = q.all_pass();
                        report.merge("restricted_model", q);
                        pass
                    }
                    Err(_) => false,
                };
                if ok3 {
                    sys_opt = Some(sys);
                }
            }
            u_opt = Some(u);
        }
    }
    let independent = find_quasi_basis_unitary(p, tol);
    if let Some(w) = &independent {
        report.merge("independent", check_unitary_quasi_basis(p, w, tol));
    }
    let flags = [equivalent, u_opt.is_some(), sys_opt.is_some(), independent.is_some()];
    let consistent = flags.iter().all(|&b| b) || flags.iter().all(|&b| !b);
    report.push(Check::flag("consistent", "(1) ⇔ (2) ⇔ (3), and the direct search agrees", consistent));
    Ok(ClassifyReport {
        projections_equivalent: equivalent,
        witness_v: v,
        jones_ranks,
        complement_ranks,
        unitary_quasi_basis: u_opt,
        two_z_inner: sys_opt,
        independent_u: independent,
        consistent,
        report,
    })
}

/// `u ↦ ±u z^{-1/2}` with `z = u^2`. Since `z^{-1/2}` is a function of `z`
/// it lies in `A`, is fixed by `Ad(u)`, and the new square is `1`; the sign
/// makes the first significant entry have positive real part.
pub fn normalize_square(u: &CMat) -> CMat {
    let z = u * u;
    let w = u * &unitary_inv_sqrt(&z);
    for i in 0..w.rows() {
        for j in 0..w.cols() {
            let x = w.get(i, j);
            if x.norm() > 1e-6 {
                let flip = x.re < -1e-9 || (x.re.abs() <= 1e-9 && x.im < 0.0);
                return if flip { w.scale_re(-1.0) } else { w };
            }
        }
    }
    w
}

fn model_gens(sys: &TwoZInnerSystem) -> Vec<CMat> {
    let n = sys.a.ambient_dim();
    let zero = CMat::zeros(n, n);
    let mut out: Vec<CMat> = sys
        .a
        .basis()
        .iter()
        .map(|x| block2_of(x, &zero, &zero, &sys.alpha.apply(x)))
        .collect();
    out.extend(
        sys.a
            .basis()
            .iter()
            .map(|x| block2_of(&zero, x, &sys.alpha.apply(&(x * &sys.z)), &zero)),
    );
    out
}

// [[a, x], [alpha(xz), alpha(a)]] ↦ a + x u
fn model_imgs(sys: &TwoZInnerSystem, u: &CMat) -> Vec<CMat> {
    let mut out: Vec<CMat> = sys.a.basis().to_vec();
    out.extend(sys.a.basis().iter().map(|x| x * u));
    out
}

/// The four conditions of the simplicity criterion for `B_{X_alpha}`.
#[derive(Debug, Clone, Serialize)]
pub struct SimplicityReport {
    pub a_simple: bool,
    pub informational: bool,
    pub bx_simple: bool,
    pub relative_commutant_trivial: bool,
    pub basic_commutant_trivial: bool,
    pub alpha_outer: bool,
    pub intertwiner: Option<CMat>,
    pub consistent: Option<bool>,
    pub report: CheckReport,
}

/// Solves `alpha(a) w = w a` over `A` and returns a unitary solution if one exists.
pub fn inner_implementer(sys: &TwoZInnerSystem, tol: &Tol) -> Option<CMat> {
    let a = &sys.a;
    let basis = a.basis();
    let k = basis.len();
    let n = a.ambient_dim();
    let mut rows = Vec::new();
    for x in basis {
        let ax = sys.alpha.apply(x);
        let blocks: Vec<CMat> = basis.iter().map(|w| &(&ax * w) - &(w * x)).collect();
        for r in 0..n * n {
            rows.push(DVector::from_iterator(k, blocks.iter().map(|b| b.as_matrix()[r])));
        }
    }
    let m = DMatrix::from_columns(&rows).transpose();
    let ns = null_space(&m, tol);
    if ns.ncols() == 0 {
        return None;
    }
    let mut rng = tol.rng(0x1a);
    for _ in 0..8 {
        let coeffs: DVector<C64> = DVector::from_fn(ns.ncols(), |_, _| random_scalar(&mut rng));
        let w = a.space().combine(&(&ns * coeffs));
        let u = polar_partial_isometry(&w, tol);
        let one = a.unit();
        let unitary = (&u.adjoint() * &u).dist(one).max((&u * &u.adjoint()).dist(one));
        let implements = basis.iter().fold(0.0f64, |acc, x| {
            acc.max(sys.alpha.apply(x).dist(&(&(&u * x) * &u.adjoint())))
        });
        if unitary < tol.bound(1.0) * 10.0 && implements < tol.bound(1.0) * 10.0 {
            return Some(u.phase_normalized(1e-6));
        }
        let _: f64 = rng.gen();
    }
    None
}

pub fn simplicity_conditions(sys: &TwoZInnerSystem, tol: &Tol) -> Result<SimplicityReport> {
    let a_blocks = block_structure(&sys.a, tol)?;
    let a_simple = a_blocks.central_projections.len() == 1;
    let x = build_xalpha(sys, tol)?;
    let (p, link) = functor_g(&x, tol)?;
    let bx_center = center(&p.b, tol).dim();
    let rel = commutant(&p.a, &p.b, tol)?.dim();
    let basic = commutant(&p.b, &link.l, tol)?.dim();
    let w = inner_implementer(sys, tol);
    let conds = [bx_center == 1, rel == 1, basic == 1, w.is_none()];
    let mut report = CheckReport::new();
    report.push(Check::count("center_dim", "dim Z(B_X)", bx_center, bx_center));
    report.push(Check::count("relative_commutant_dim", "dim A' ∩ B_X", rel, rel));
    report.push(Check::count("basic_commutant_dim", "dim B_X' ∩ C*<B_X, e_A>", basic, basic));
    if let Some(w) = &w {
        let imp = sys
            .a
            .basis()
            .iter()
            .fold(0.0f64, |acc, y| acc.max(sys.alpha.apply(y).dist(&(&(w * y) * &w.adjoint()))));
        report.add("intertwiner", "alpha = Ad(w)", imp, tol.bound(1.0));
    }
    let consistent = if a_simple {
        let c = conds.iter().all(|&b| b) || conds.iter().all(|&b| !b);
        report.push(Check::flag("equivalent", "simple ⇔ A' ∩ B_X = C ⇔ B_X' ∩ L = C ⇔ alpha outer", c));
        Some(c)
    } else {
        None
    };
    Ok(SimplicityReport {
        a_simple,
        informational: !a_simple,
        bx_simple: conds[0],
        relative_commutant_trivial: conds[1],
        basic_commutant_trivial: conds[2],
        alpha_outer: conds[3],
        intertwiner: w,
        consistent,
        report,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CommutantReport {
    pub relative_dim: usize,
    pub basic_dim: usize,
    pub report: CheckReport,
}

/// `dim A' ∩ B = dim B' ∩ C*<B, e_A>`.
pub fn commutant_anti_isomorphism_check(p: &InclusionPair, tol: &Tol) -> Result<CommutantReport> {
    let rel = commutant(&p.a, &p.b, tol)?.dim();
    let c = crossed_model(p, tol);
    let eb: Vec<CMat> = p.b.basis().iter().map(|b| c.embed(b)).collect();
    let b_emb = CStarAlg::from_span(c.ambient_dim(), &eb, c.unit(), tol);
    let basic = commutant(&b_emb, &c.algebra, tol)?.dim();
    let mut report = CheckReport::new();
    report.push(Check::count("dims_equal", "A' ∩ B anti-isomorphic to B' ∩ C*<B, e_A>", rel, basic));
    Ok(CommutantReport {
        relative_dim: rel,
        basic_dim: basic,
        report,
    })
}

/// `block_ranks` of `e_A` and `1 - e_A` in the crossed model.
pub fn jones_block_ranks(p: &InclusionPair, tol: &Tol) -> Result<(Vec<usize>, Vec<usize>)> {
    let c = crossed_model(p, tol);
    Ok((
        block_ranks(&c.algebra, &c.jones, tol)?,
        block_ranks(&c.algebra, &c.one_minus_e(), tol)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::matkernel::{I, ONE};

    fn tol() -> Tol {
        Tol::default()
    }

    #[test]
    fn fix_e_is_two_z_inner() {
        assert!(validate_two_z_inner(&fixtures::fix_e(&tol()), &tol()).all_pass());
        let a = fixtures::full_matrix_algebra(2, &tol());
        let bad = TwoZInnerSystem::inner(a.clone(), &CMat::diag(&[ONE, I]), CMat::identity(2));
        let rep = validate_two_z_inner(&bad, &tol());
        assert!(!rep.get("alpha_squared").unwrap().pass);
        let trivial = TwoZInnerSystem::inner(a, &CMat::identity(2), CMat::identity(2));
        assert!(validate_two_z_inner(&trivial, &tol()).all_pass());
    }

    #[test]
    fn restricted_model_fix_e() {
        let m = restricted_crossed_model(&fixtures::fix_e(&tol()), &tol()).unwrap();
        assert_eq!(m.pair.b.dim(), 8);
        assert!(m.phi_report.all_pass(), "{:?}", m.phi_report.failures());
    }

    #[test]
    fn crossed_products() {
        let c = fixtures::diagonal_algebra(2, &tol());
        let swap = LinMap::from_fn(c.space(), |x| CMat::diag(&[x.get(1, 1), x.get(0, 0)]));
        let p = crossed_product_z2(&c, &swap, &tol()).unwrap();
        assert_eq!(p.b.dim(), 4);
        assert_eq!(center(&p.b, &tol()).dim(), 1);
        let r = classify(&p, &tol()).unwrap();
        assert!(r.consistent && r.two_z_inner.is_some());
        let z = &r.two_z_inner.unwrap().z;
        assert!(z.dist(p.b.unit()) < 1e-9);

        let m2 = fixtures::full_matrix_algebra(2, &tol());
        let w = CMat::diag_re(&[1.0, -1.0]);
        let ad = LinMap::from_fn(m2.space(), |x| &(&w * x) * &w);
        let q = crossed_product_z2(&m2, &ad, &tol()).unwrap();
        assert_eq!(q.b.dim(), 8);
        assert_eq!(center(&q.b, &tol()).dim(), 2);
    }

    #[test]
    fn classify_small_fixtures() {
        for p in [fixtures::fix_a(&tol()).unwrap(), fixtures::fix_b(&tol()).unwrap()] {
            let r = classify(&p, &tol()).unwrap();
            assert!(r.projections_equivalent && r.consistent, "{:?}", r.report.failures());
            assert!(r.unitary_quasi_basis.is_some() && r.two_z_inner.is_some() && r.independent_u.is_some());
        }
        let r = classify(&fixtures::fix_c(&tol()).unwrap(), &tol()).unwrap();
        assert!(!r.projections_equivalent && r.consistent);
        assert!(r.unitary_quasi_basis.is_none() && r.two_z_inner.is_none() && r.independent_u.is_none());
        assert_eq!(r.jones_ranks, vec![1, 2]);
        assert_eq!(r.complement_ranks, vec![2, 1]);
    }

    #[test]
    fn classify_fix_b_unitary_is_an_off_diagonal_symmetry() {
        let p = fixtures::fix_b(&tol()).unwrap();
        let r = classify(&p, &tol()).unwrap();
        let u = r.unitary_quasi_basis.unwrap();
        assert!(u.get(0, 0).norm() < 1e-9 && u.get(1, 1).norm() < 1e-9);
        assert!((u.get(0, 1).norm() - 1.0).abs() < 1e-9);
        assert!((&u * &u).dist(&CMat::identity(2)) < 1e-9);
        let sys = r.two_z_inner.unwrap();
        let x = CMat::diag_re(&[3.0, 5.0]);
        assert!(sys.alpha.apply(&x).dist(&CMat::diag_re(&[5.0, 3.0])) < 1e-9);
    }

    #[test]
    fn classify_seeded_fix_d() {
        for seed in 0..6 {
            let p = fixtures::fix_d(seed, &tol()).unwrap();
            let r = classify(&p, &tol()).unwrap();
            assert!(r.consistent, "seed {seed}: {:?}", r.report.failures());
            let (_, rank) = fixtures::fix_d_unitary(seed);
            assert_eq!(r.projections_equivalent, rank == 2, "seed {seed}");
        }
    }

    #[test]
    fn simplicity_examples() {
        let r = simplicity_conditions(&fixtures::fix_e(&tol()), &tol()).unwrap();
        assert!(r.a_simple && !r.alpha_outer && !r.bx_simple);
        assert_eq!(r.consistent, Some(true));
        let w = r.intertwiner.unwrap();
        assert!((&w.adjoint() * &CMat::diag(&[ONE, I])).dist(&CMat::identity(2)) < 1e-9
            || (&w * &CMat::diag(&[ONE, I]).adjoint()).max_abs() > 0.0);

        let a = fixtures::full_matrix_algebra(2, &tol());
        let triv = TwoZInnerSystem::inner(a, &CMat::identity(2), CMat::identity(2));
        let r = simplicity_conditions(&triv, &tol()).unwrap();
        assert!(!r.bx_simple && !r.alpha_outer);

        let d2 = fixtures::diagonal_algebra(2, &tol());
        let sw = TwoZInnerSystem::inner(d2, &CMat::from_re_rows(&[&[0.0, 1.0], &[1.0, 0.0]]), CMat::identity(2));
        let r = simplicity_conditions(&sw, &tol()).unwrap();
        assert!(r.informational && r.consistent.is_none());
    }

    #[test]
    fn commutant_dimensions_match() {
        for (p, d) in [
            (fixtures::fix_a(&tol()).unwrap(), 2),
            (fixtures::fix_b(&tol()).unwrap(), 2),
            (fixtures::fix_c(&tol()).unwrap(), 2),
        ] {
            let r = commutant_anti_isomorphism_check(&p, &tol()).unwrap();
            assert_eq!(r.relative_dim, r.basic_dim);
            assert_eq!(r.relative_dim, d);
        }
    }
}

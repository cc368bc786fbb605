//! Inclusions ↔ involutive bimodules.
//!
//! `functor_f` sends `A ⊂ B` to `X_B`; `functor_g` sends `X` to `A ⊂ B_X`,
//! where `B_X = {[[a, x], [x̃♯, a]]}` sits in the linking algebra acting on
//! `X ⊕ A`. The module `X ⊕ A` is scalarized by `tau(<ξ, η>_A)` with `tau`
//! the normalized trace of the ambient matrices of `A`; operators are then
//! conjugated by `G^{1/2}` (`G` the Gram matrix) so the module adjoint is the
//! matrix adjoint.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::basic::crossed_model;
use crate::bimodule::{
    build_bminus, build_bminus_over, build_xb, canonical_xb_to_bminus, fullness_witness, verify_bimodule, verify_iso,
    Bimodule, CoeffEmbedding, Coords, InvolutiveBimodule,
};
use crate::check::{Check, CheckReport};
use crate::cstar::{generate_algebra, star_iso_from_generators, verify_star_iso, CStarAlg};
use crate::error::{Error, Result};
use crate::inclusion::{make_inclusion_pair, minus_part, CondExp, InclusionPair, QuasiBasis};
use crate::matkernel::{psd_inv_sqrt, rank_tol, CMat, Tol, C64, ONE};
use crate::subspace::LinMap;

type Mat = DMatrix<C64>;

/// The linking algebra of `X` together with `A ⊂ B_X ⊂ L`.
#[derive(Debug, Clone)]
pub struct LinkingData {
    pub l: CStarAlg,
    pub corner: CMat,
    pub bx: CStarAlg,
    pub ex: CondExp,
    /// `tau(<ξ_i, ξ_j>_A)` on the coordinate basis of `X ⊕ A`.
    pub trace_on_a: CMat,
    /// `a ↦ diag(a, a)` from the coefficient algebra into `B_X`.
    pub delta: LinMap,
    pub quasi_basis: QuasiBasis,
    pub report: CheckReport,
    module: InvolutiveBimodule,
    g_half: Mat,
    g_inv_half: Mat,
}

struct Raw<'a> {
    x: &'a Bimodule,
    d: usize,
    n: usize,
}

impl Raw<'_> {
    fn tl(&self, a: &Coords) -> Mat {
        let mut m = Mat::zeros(self.n, self.n);
        m.view_mut((0, 0), (self.d, self.d)).copy_from(&self.x.left_op(a));
        m
    }

    fn br(&self, a: &Coords) -> Mat {
        let ka = self.x.a_dim();
        let mut m = Mat::zeros(self.n, self.n);
        for l in 0..ka {
            let mut el = DVector::zeros(ka);
            el[l] = ONE;
            let col = self.x.a_mul(a, &el);
            m.view_mut((self.d, self.d + l), (ka, 1)).copy_from(&col);
        }
        m
    }

    /// `η ↦ x·η`
    fn tr(&self, v: &Coords) -> Mat {
        let mut m = Mat::zeros(self.n, self.n);
        for (k, r) in self.x.right.iter().enumerate() {
            m.view_mut((0, self.d + k), (self.d, 1)).copy_from(&(r * v));
        }
        m
    }

    /// `ξ ↦ <y, ξ>_A`
    fn bl(&self, y: &Coords) -> Mat {
        let mut m = Mat::zeros(self.n, self.n);
        for (k, ri) in self.x.right_inner.iter().enumerate() {
            let row = y.adjoint() * ri;
            m.view_mut((self.d + k, 0), (1, self.d)).copy_from(&row);
        }
        m
    }
}

impl LinkingData {
    fn conj(&self, m: &Mat) -> CMat {
        CMat::from_matrix(&self.g_half * m * &self.g_inv_half)
    }

    fn raw(&self) -> Raw<'_> {
        let d = self.module.dim();
        Raw {
            x: &self.module.module,
            d,
            n: d + self.module.module.a_dim(),
        }
    }

    pub fn module(&self) -> &InvolutiveBimodule {
        &self.module
    }

    pub fn delta_coords(&self, a: &Coords) -> CMat {
        self.delta.apply_coords(a)
    }

    /// `[[0, x], [x̃♯, 0]]`
    pub fn odd(&self, x: &Coords) -> CMat {
        let r = self.raw();
        self.conj(&(r.tr(x) + r.bl(&self.module.sharp(x))))
    }

    /// `[[a, x], [ỹ, b]]` for arbitrary components.
    pub fn linking_element(&self, a: &Coords, x: &Coords, y: &Coords, b: &Coords) -> CMat {
        let r = self.raw();
        self.conj(&(r.tl(a) + r.tr(x) + r.bl(y) + r.br(b)))
    }
}

/// `A ⊂ B` ↦ `X_B` (crossed model), verified.
pub fn functor_f(p: &InclusionPair, tol: &Tol) -> Result<InvolutiveBimodule> {
    let c = crossed_model(p, tol);
    let x = build_xb(&c, p, tol);
    let rep = verify_bimodule(&x, tol);
    if let Some(f) = rep.failures().first() {
        return Err(Error::ResidualExceeded {
            what: format!("X_B axiom {}", f.name),
            residual: f.residual,
        });
    }
    Ok(x)
}

/// `X` ↦ `(A ⊂ B_X, E_X)` with its linking algebra.
pub fn functor_g(x: &InvolutiveBimodule, tol: &Tol) -> Result<(InclusionPair, LinkingData)> {
    let m = &x.module;
    let d = m.dim();
    let ka = m.a_dim();
    let n = d + ka;
    let taus: Vec<C64> = m.a.basis().iter().map(|a| a.normalized_trace()).collect();
    let mut gx = Mat::zeros(d, d);
    for (t, ri) in taus.iter().zip(&m.right_inner) {
        gx += ri * *t;
    }
    let mut g = Mat::identity(n, n);
    g.view_mut((0, 0), (d, d)).copy_from(&gx);
    let g = CMat::from_matrix(g);
    let g_inv_half = psd_inv_sqrt(&g, tol).map_err(|_| Error::TraceNotFaithful)?;
    let g_half = &g * &g_inv_half;

    let mut link = LinkingData {
        l: generate_algebra(1, &[], tol),
        corner: CMat::zeros(n, n),
        bx: generate_algebra(1, &[], tol),
        ex: CondExp::from_fn(generate_algebra(1, &[], tol), generate_algebra(1, &[], tol), |b| b.clone()),
        trace_on_a: g.clone(),
        delta: LinMap::from_fn(m.a.space(), |a| a.clone()),
        quasi_basis: QuasiBasis::new(vec![(CMat::identity(1), CMat::identity(1))]),
        report: CheckReport::new(),
        module: x.clone(),
        g_half: g_half.into_matrix(),
        g_inv_half: g_inv_half.into_matrix(),
    };
    let unit_n = CMat::identity(n);
    let e_k = |k: usize, len: usize| {
        let mut v = DVector::zeros(len);
        v[k] = ONE;
        v
    };
    let delta_imgs: Vec<CMat> = (0..ka)
        .map(|k| {
            let r = link.raw();
            link.conj(&(r.tl(&e_k(k, ka)) + r.br(&e_k(k, ka))))
        })
        .collect();
    let odd_imgs: Vec<CMat> = (0..d).map(|j| link.odd(&e_k(j, d))).collect();
    link.delta = LinMap::from_basis_images(m.a.space().clone(), delta_imgs.clone(), n, n);
    let all: Vec<CMat> = delta_imgs.iter().chain(&odd_imgs).cloned().collect();
    let bx = CStarAlg::from_span(n, &all, &unit_n, tol);
    let a_emb = CStarAlg::from_span(n, &delta_imgs, &unit_n, tol);
    let one = m.a_unit();
    let corner = link.conj(&link.raw().tl(&one));

    // E_X reads the A-component off the bottom-right block, which G leaves untouched.
    let delta_map = link.delta.clone();
    let ex = CondExp::from_fn(bx.clone(), a_emb.clone(), move |b| {
        let br = b.as_matrix().view((d, d), (ka, ka)).into_owned();
        delta_map.apply_coords(&(br * &one))
    });
    let pair = make_inclusion_pair(&bx, &a_emb, &ex, tol)?;

    let mut rep = CheckReport::new();
    rep.push(Check::count("dim_bx", "dim B_X = dim A + dim X", bx.dim(), ka + d));
    rep.add("closed", "B_X is a *-algebra", bx.closure_residual(), tol.bound(1.0));
    rep.merge("delta", verify_star_iso(&m.a, &a_emb, &link.delta, tol));
    let iso = m
        .a
        .basis()
        .iter()
        .fold(0.0f64, |acc, a| acc.max((link.delta.apply(a).op_norm() - a.op_norm()).abs()));
    rep.add("delta_isometric", "‖diag(a, a)‖ = ‖a‖", iso, tol.bound(1.0));

    // explicit quasi-basis {(1, 1)} ∪ {(odd(z_i♯), odd(y_i))}
    let witness = fullness_witness(m, tol)?;
    let mut pairs = vec![(unit_n.clone(), unit_n.clone())];
    for (z, y) in &witness {
        pairs.push((link.odd(&x.sharp(z)), link.odd(y)));
    }
    let qb = QuasiBasis::new(pairs);
    let two = unit_n.scale_re(2.0);
    let off = qb.index_value.dist(&two);
    if off > tol.bound(two.norm()) * 10.0 {
        return Err(Error::IndexNotTwo(qb.index_value.clone()));
    }
    rep.add("index_two", "Index E_X = 1 + Σ odd(z_i♯) odd(y_i) = 2", off, tol.bound(two.norm()));
    let (lres, rres) = qb.reconstruction_residual(&ex, bx.basis());
    let s = qb.pairs.iter().fold(1.0f64, |acc, (u, v)| acc.max(u.norm() * v.norm()));
    rep.add("reconstruct_left", "b = E_X(b) + Σ odd(z_i♯) E_X(odd(y_i) b)", lres, tol.bound(s));
    rep.add("reconstruct_right", "b = E_X(b) + Σ E_X(b odd(z_i♯)) odd(y_i)", rres, tol.bound(s));

    let ebe = bx
        .basis()
        .iter()
        .fold(0.0f64, |acc, b| acc.max((&(&corner * b) * &corner).dist(&(&ex.apply(b) * &corner))));
    rep.add("ebe", "e b e = E_X(b) e", ebe, tol.bound(1.0));

    let mut lgens = bx.basis().to_vec();
    lgens.push(corner.clone());
    let l = generate_algebra(n, &lgens, tol);
    rep.push(Check::count("dim_l", "dim L = 2 dim A + 2 dim X", l.dim(), 2 * ka + 2 * d));
    rep.push(Check::count(
        "linking_faithful",
        "[[a, x], [ỹ, b]] = 0 only for zero components",
        linking_rank(&link, ka, d, tol),
        2 * ka + 2 * d,
    ));

    // L is the basic construction of A ⊂ B_X: crossed model → L
    let c = crossed_model(&pair, tol);
    let bb = pair.b.basis();
    let mut imgs: Vec<CMat> = bb.to_vec();
    for bi in bb {
        let be = bi * &corner;
        for bj in bb {
            imgs.push(&be * bj);
        }
    }
    let (_, brep) = star_iso_from_generators(&c.algebra, &l, &c.generators, &imgs, tol);
    rep.merge("basic_construction", brep);

    link.l = l;
    link.corner = corner;
    link.bx = bx;
    link.ex = ex;
    link.quasi_basis = qb;
    link.report = rep;
    Ok((pair, link))
}

fn linking_rank(link: &LinkingData, ka: usize, d: usize, tol: &Tol) -> usize {
    let r = link.raw();
    let e = |k: usize, len: usize| {
        let mut v = DVector::zeros(len);
        v[k] = ONE;
        v
    };
    let mut cols = Vec::new();
    let mut push = |m: Mat| cols.push(DVector::from_column_slice(m.as_slice()));
    for k in 0..ka {
        push(r.tl(&e(k, ka)));
        push(r.br(&e(k, ka)));
    }
    for j in 0..d {
        push(r.tr(&e(j, d)));
        push(r.bl(&e(j, d)));
    }
    rank_tol(&CMat::from_matrix(DMatrix::from_columns(&cols)), tol)
}

/// `pi: B1 → B2` is a *-isomorphism with `pi(a) = a` and `E_2 ∘ pi = pi ∘ E_1`.
/// `a_map` identifies `A_1` with `A_2` when they are realized differently.
pub fn verify_l_equivalence(
    p1: &InclusionPair,
    p2: &InclusionPair,
    pi: &LinMap,
    a_map: Option<&LinMap>,
    tol: &Tol,
) -> CheckReport {
    let mut rep = verify_star_iso(&p1.b, &p2.b, pi, tol);
    let scale = p1.b.basis().iter().fold(1.0f64, |m, b| m.max(pi.apply(b).norm()));
    let fix = p1.a.basis().iter().fold(0.0f64, |m, a| {
        let want = a_map.map_or_else(|| a.clone(), |f| f.apply(a));
        m.max(pi.apply(a).dist(&want))
    });
    rep.add("fixes_a", "pi(a) = a for a in A", fix, tol.bound(scale));
    let inter = p1
        .b
        .basis()
        .iter()
        .fold(0.0f64, |m, b| m.max(p2.expect(&pi.apply(b)).dist(&pi.apply(&p1.expect(b)))));
    rep.add("intertwines", "E_1 ∘ pi = E", inter, tol.bound(scale));
    rep
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundTrip {
    pub report: CheckReport,
    pub dim_source: usize,
    pub dim_target: usize,
}

impl RoundTrip {
    pub fn pass(&self) -> bool {
        self.report.all_pass()
    }
}

/// `G ∘ F = id`: `b ↦ [[E(b), m], [m̃♯, E(b)]]` with `m = b - E(b)` read in `X_B`.
pub fn roundtrip_gf(p: &InclusionPair, tol: &Tol) -> Result<RoundTrip> {
    let c = crossed_model(p, tol);
    let xb = build_xb(&c, p, tol);
    let bm = build_bminus(p, tol);
    let (t, trep) = canonical_xb_to_bminus(&c, p, &xb, &bm, tol)?;
    let t_inv = t
        .clone()
        .try_inverse()
        .ok_or(Error::IsoResidualExceeded(f64::INFINITY))?;
    let (p2, link) = functor_g(&xb, tol)?;
    let pi = LinMap::from_fn(p.b.space(), |b| {
        let eb = p.expect(b);
        let mcoords = bm.module.carrier.coords(&(b - &eb));
        &link.delta.apply(&eb) + &link.odd(&(&t_inv * mcoords))
    });
    let mut rep = CheckReport::new();
    rep.merge("xb_to_bminus", trep);
    rep.merge("linking", link.report.clone());
    rep.merge("", verify_l_equivalence(p, &p2, &pi, Some(&link.delta), tol));
    if !rep.all_pass() {
        return Err(Error::IsoResidualExceeded(rep.max_residual()));
    }
    Ok(RoundTrip {
        report: rep,
        dim_source: p.b.dim(),
        dim_target: p2.b.dim(),
    })
}

/// `F ∘ G = id`: `x ↦ [[0, x], [x̃♯, 0]]` onto `(B_X)_-`, an isomorphism of
/// involutive bimodules over the coefficient algebra of `X`.
pub fn roundtrip_fg(x: &InvolutiveBimodule, tol: &Tol) -> Result<RoundTrip> {
    let (p, link) = functor_g(x, tol)?;
    let emb = CoeffEmbedding::from_map(x.module.a.clone(), &link.delta);
    let bm = build_bminus_over(&p, &emb, tol);
    let d = x.dim();
    let mut t = Mat::zeros(bm.dim(), d);
    let mut into = 0.0f64;
    for j in 0..d {
        let mut v = DVector::zeros(d);
        v[j] = ONE;
        let o = link.odd(&v);
        into = into.max(bm.module.carrier.residual(&o));
        t.set_column(j, &bm.module.carrier.coords(&o));
    }
    let mut rep = CheckReport::new();
    rep.merge("linking", link.report.clone());
    rep.add("into_minus", "[[0, x], [x̃♯, 0]] ∈ (B_X)_-", into, tol.bound(1.0));
    rep.push(Check::count(
        "minus_dim",
        "dim (B_X)_- = dim X",
        minus_part(&p, tol).dim(),
        d,
    ));
    rep.merge(
        "",
        verify_iso(&x.module, &bm.module, &t, Some((&x.involution, &bm.involution)), tol),
    );
    if !rep.all_pass() {
        return Err(Error::IsoResidualExceeded(rep.max_residual()));
    }
    Ok(RoundTrip {
        report: rep,
        dim_source: d,
        dim_target: bm.dim(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn tol() -> Tol {
        Tol::default()
    }

    #[test]
    fn functor_f_dimensions() {
        assert_eq!(functor_f(&fixtures::fix_a(&tol()).unwrap(), &tol()).unwrap().dim(), 1);
        assert_eq!(functor_f(&fixtures::fix_b(&tol()).unwrap(), &tol()).unwrap().dim(), 2);
        assert_eq!(functor_f(&fixtures::fix_c(&tol()).unwrap(), &tol()).unwrap().dim(), 4);
    }

    #[test]
    fn functor_g_of_bminus_c_is_m3() {
        let p = fixtures::fix_c(&tol()).unwrap();
        let (q, link) = functor_g(&build_bminus(&p, &tol()), &tol()).unwrap();
        assert_eq!(q.b.dim(), 9);
        assert_eq!(q.a.dim(), 5);
        assert!(link.report.all_pass(), "{:?}", link.report.failures());
    }

    #[test]
    fn functor_g_of_scalar_module_is_c2() {
        let p = fixtures::fix_a(&tol()).unwrap();
        let x = functor_f(&p, &tol()).unwrap();
        let (q, link) = functor_g(&x, &tol()).unwrap();
        assert_eq!(q.b.dim(), 2);
        assert!(link.report.all_pass(), "{:?}", link.report.failures());
        // E_X is the midpoint of the two characters
        let u = link.odd(&DVector::from_element(1, ONE));
        assert!(q.expect(&u).norm() < 1e-12);
    }

    #[test]
    fn round_trips_on_small_fixtures() {
        for p in [fixtures::fix_a(&tol()), fixtures::fix_b(&tol()), fixtures::fix_c(&tol())] {
            let p = p.unwrap();
            assert!(roundtrip_gf(&p, &tol()).unwrap().pass());
            assert!(roundtrip_fg(&build_bminus(&p, &tol()), &tol()).unwrap().pass());
        }
    }

    #[test]
    fn l_equivalence_examples() {
        let p = fixtures::fix_b(&tol()).unwrap();
        let id = LinMap::from_fn(p.b.space(), |b| b.clone());
        assert!(verify_l_equivalence(&p, &p, &id, None, &tol()).all_pass());
        let w = CMat::diag_re(&[1.0, -1.0]);
        let ad = LinMap::from_fn(p.b.space(), |b| &(&w * b) * &w);
        assert!(verify_l_equivalence(&p, &p, &ad, None, &tol()).all_pass());
        let tr = LinMap::from_fn(p.b.space(), |b| b.transpose());
        let rep = verify_l_equivalence(&p, &p, &tr, None, &tol());
        assert!(!rep.get("multiplicative").unwrap().pass);
    }
}

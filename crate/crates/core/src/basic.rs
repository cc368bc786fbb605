//! The basic construction `C*<B, e_A>` for an index-2 inclusion.
//!
//! Two independent concrete models are provided:
//!
//! * crossed: inside `M_2(M_n)`, `b ↦ diag(b, beta(b))`, `W = [[0,1],[1,0]]`,
//!   `e_A = (1 + W)/2`;
//! * q-model: inside `M_m(M_n)` for a quasi-basis `{(x_i, x_i*)}` of size `m`,
//!   `pi(b) = [E(x_i* b x_j)]`, `e_A ↦ [E(x_i*) E(x_j)]`, unit `q = [E(x_i* x_j)]`.
//!
//! Both are spanned by `{b, b e_A b'}`; the dual expectation and the flip are
//! defined on that spanning set (`Ẽ(b) = b`, `Ẽ(b e_A b') = bb'/2`;
//! `flip(b) = b`, `flip(b e_A b') = b(1 - e_A)b'`) and the consistency of
//! those assignments is itself checked.

use serde::Serialize;

use crate::check::{Check, CheckReport};
use crate::cstar::{star_iso_from_generators, CStarAlg};
use crate::error::{Error, Result};
use crate::inclusion::InclusionPair;
use crate::matkernel::{rank_tol, CMat, Tol};
use crate::subspace::{LinMap, Subspace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Crossed,
    Qmat,
}

#[derive(Debug, Clone)]
pub struct BasicConstruction {
    pub kind: ModelKind,
    pub algebra: CStarAlg,
    pub jones: CMat,
    pub embed_b: LinMap,
    pub dual_expectation: LinMap,
    pub flip: LinMap,
    pub unitary_u: CMat,
    /// `[b_1..b_d, b_i e b_j ...]` in a fixed order shared by both models.
    pub generators: Vec<CMat>,
    /// Consistency residual of the generator-defined maps (0 when well defined).
    pub well_defined: f64,
    /// Whether `b ↦ e_A b` is injective, i.e. left reduction is unique.
    pub left_injective: bool,
}

impl BasicConstruction {
    pub fn embed(&self, b: &CMat) -> CMat {
        self.embed_b.apply(b)
    }

    pub fn dual_exp(&self, x: &CMat) -> CMat {
        self.dual_expectation.apply(x)
    }

    pub fn flip(&self, x: &CMat) -> CMat {
        self.flip.apply(x)
    }

    pub fn unit(&self) -> &CMat {
        self.algebra.unit()
    }

    pub fn one_minus_e(&self) -> CMat {
        self.unit() - &self.jones
    }

    pub fn ambient_dim(&self) -> usize {
        self.algebra.ambient_dim()
    }
}

fn assemble(
    kind: ModelKind,
    p: &InclusionPair,
    embed: impl Fn(&CMat) -> CMat,
    jones: CMat,
    unit: CMat,
    tol: &Tol,
) -> BasicConstruction {
    let big = unit.rows();
    let bb = p.b.basis();
    let embed_b = LinMap::from_fn(p.b.space(), &embed);
    let eb: Vec<CMat> = bb.iter().map(|b| embed_b.apply(b)).collect();
    let one_minus = &unit - &jones;

    let mut gens = eb.clone();
    let mut dual_imgs: Vec<CMat> = bb.to_vec();
    let mut flip_imgs = eb.clone();
    for (i, x) in eb.iter().enumerate() {
        let xe = x * &jones;
        let xf = x * &one_minus;
        for (j, y) in eb.iter().enumerate() {
            gens.push(&xe * y);
            dual_imgs.push((&bb[i] * &bb[j]).scale_re(0.5));
            flip_imgs.push(&xf * y);
        }
    }
    let (span, coeffs) = Subspace::span_tracked(big, big, &gens, tol);
    let (dual_expectation, r1) = LinMap::from_tracked(span.clone(), &coeffs, &gens, &dual_imgs);
    let (flip, r2) = LinMap::from_tracked(span, &coeffs, &gens, &flip_imgs);
    let algebra = CStarAlg::from_subspace(flip.domain().clone(), unit.clone());

    let left: Vec<CMat> = eb.iter().map(|x| &jones * x).collect();
    let left_injective = Subspace::span(big, big, &left, tol).dim() == bb.len();
    let unitary_u = &jones.scale_re(2.0) - &unit;
    BasicConstruction {
        kind,
        algebra,
        jones,
        embed_b,
        dual_expectation,
        flip,
        unitary_u,
        generators: gens,
        well_defined: r1.max(r2),
        left_injective,
    }
}

/// `C*<B, e_A> ≅ B ⋊_beta Z_2` realized in `M_2(M_n)`.
pub fn crossed_model(p: &InclusionPair, tol: &Tol) -> BasicConstruction {
    let n = p.ambient_dim();
    let id = CMat::identity(n);
    let z = CMat::zeros(n, n);
    let w = CMat::block2(&z, &id, &id, &z);
    let unit = CMat::identity(2 * n);
    let jones = (&unit + &w).scale_re(0.5);
    let beta = p.beta.clone();
    assemble(
        ModelKind::Crossed,
        p,
        move |b| CMat::direct_sum(b, &beta.apply(b)),
        jones,
        unit,
        tol,
    )
}

fn block_matrix(m: usize, n: usize, f: impl Fn(usize, usize) -> CMat) -> CMat {
    let mut out = CMat::zeros(m * n, m * n);
    for i in 0..m {
        for j in 0..m {
            let blk = f(i, j);
            out = place(out, &blk, i * n, j * n);
        }
    }
    out
}

fn place(target: CMat, blk: &CMat, r0: usize, c0: usize) -> CMat {
    let mut m = target.into_matrix();
    m.view_mut((r0, c0), (blk.rows(), blk.cols())).copy_from(blk.as_matrix());
    CMat::from_matrix(m)
}

/// The q-model built from the pair's own quasi-basis.
pub fn q_model(p: &InclusionPair, tol: &Tol) -> Result<BasicConstruction> {
    let xs: Vec<CMat> = p.quasi_basis.pairs.iter().map(|(u, _)| u.clone()).collect();
    q_model_with(p, &xs, tol)
}

/// The q-model for a quasi-basis `{(x_i, x_i*)}` given by its `x_i`.
pub fn q_model_with(p: &InclusionPair, xs: &[CMat], tol: &Tol) -> Result<BasicConstruction> {
    let n = p.ambient_dim();
    let m = xs.len();
    let xa: Vec<CMat> = xs.iter().map(|x| x.adjoint()).collect();
    let e = p.e.clone();
    let xs_owned = xs.to_vec();
    let pi = move |b: &CMat| block_matrix(m, n, |i, j| e.apply(&(&(&xa[i] * b) * &xs_owned[j])));
    let q = pi(p.b.unit());
    let defect = q.projection_defect();
    if defect > tol.bound(q.norm()) * 10.0 {
        return Err(Error::QNotProjection(defect));
    }
    let ex: Vec<CMat> = xs.iter().map(|x| p.expect(x)).collect();
    let exs: Vec<CMat> = xs.iter().map(|x| p.expect(&x.adjoint())).collect();
    let jones = block_matrix(m, n, |i, j| &exs[i] * &ex[j]);
    Ok(assemble(ModelKind::Qmat, p, pi, jones, q, tol))
}

/// The *-isomorphism fixing `B` and `e_A` between two models of the same pair.
pub fn models_isomorphic(c1: &BasicConstruction, c2: &BasicConstruction, tol: &Tol) -> Result<(LinMap, CheckReport)> {
    let (f, mut rep) = star_iso_from_generators(&c1.algebra, &c2.algebra, &c1.generators, &c2.generators, tol);
    let scale = c2.jones.norm().max(1.0);
    rep.add("jones", "f(e_A) = e_A", f.apply(&c1.jones).dist(&c2.jones), tol.bound(scale));
    let fix_b = c1
        .embed_b
        .domain()
        .basis()
        .iter()
        .fold(0.0f64, |m, b| m.max(f.apply(&c1.embed(b)).dist(&c2.embed(b))));
    rep.add("fixes_b", "f(b) = b for b in B", fix_b, tol.bound(scale));
    if !rep.all_pass() {
        let worst = rep.failures().iter().fold(0.0f64, |m, c| m.max(c.residual));
        return Err(Error::IsoResidualExceeded(worst));
    }
    Ok((f, rep))
}

/// `Ẽ(x)` for `x` in the basic construction.
pub fn dual_expectation_apply(c: &BasicConstruction, x: &CMat, tol: &Tol) -> Result<CMat> {
    let r = c.algebra.residual(x);
    if r > tol.bound(x.norm()) * 10.0 {
        return Err(Error::NotInAlgebra(r));
    }
    Ok(c.dual_exp(x))
}

/// The cut-down expectation `F = 2 (E ∘ Ẽ)(·)(1 - e_A)` on the corner
/// `(1 - e_A) C*<B, e_A> (1 - e_A)`, with its explicit quasi-basis.
#[derive(Debug, Clone)]
pub struct CutExpectation {
    pub corner: Subspace,
    pub map: LinMap,
    pub pairs: Vec<(CMat, CMat)>,
    pub index: CMat,
    pub report: CheckReport,
}

pub fn cut_expectation_f(c: &BasicConstruction, p: &InclusionPair, tol: &Tol) -> CutExpectation {
    let f1 = c.one_minus_e();
    let big = c.ambient_dim();
    let cut: Vec<CMat> = c.algebra.basis().iter().map(|x| &(&f1 * x) * &f1).collect();
    let corner = Subspace::span(big, big, &cut, tol);
    let f_of = |y: &CMat| &c.embed(&p.expect(&c.dual_exp(y))).scale_re(2.0) * &f1;
    let map = LinMap::from_fn(&corner, f_of);

    let xs: Vec<CMat> = p.quasi_basis.pairs.iter().map(|(u, _)| c.embed(u)).collect();
    let mut pairs = Vec::new();
    for xi in &xs {
        for xj in &xs {
            let u = &(&(&(&f1 * xj) * &c.jones) * xi) * &f1;
            let v = u.adjoint();
            pairs.push((u, v));
        }
    }
    let mut index = CMat::zeros(big, big);
    for (u, v) in &pairs {
        index += &(u * v);
    }

    let mut rep = CheckReport::new();
    let scale = f1.norm().max(1.0);
    let eps = tol.bound(scale);
    let (mut left, mut right) = (0.0f64, 0.0f64);
    for y in corner.basis() {
        let mut l = CMat::zeros(big, big);
        let mut r = CMat::zeros(big, big);
        for (u, v) in &pairs {
            l += &(u * &map.apply(&(v * y)));
            r += &(&map.apply(&(y * u)) * v);
        }
        left = left.max(l.dist(y));
        right = right.max(r.dist(y));
    }
    rep.add("reconstruct_left", "Σ u_i F(u_i* y) = y on the corner", left, eps);
    rep.add("reconstruct_right", "Σ F(y u_i) u_i* = y on the corner", right, eps);
    rep.add("index", "Index F = (t-1)^2 (1 - e_A) at t = 2", index.dist(&f1), eps);
    let mut cutdown = 0.0f64;
    let mut f_on_cut = 0.0f64;
    for b in p.b.basis() {
        let eb = c.embed(b);
        let lhs = &(&f1 * &eb) * &f1;
        let rhs = &c.embed(&p.expect(b)) * &f1;
        cutdown = cutdown.max(lhs.dist(&rhs));
        f_on_cut = f_on_cut.max(map.apply(&lhs).dist(&rhs));
    }
    rep.add("cut_down", "(1 - e_A) b (1 - e_A) = E(b)(1 - e_A)", cutdown, eps);
    rep.add("f_on_cut", "F((1 - e_A) b (1 - e_A)) = E(b)(1 - e_A)", f_on_cut, eps);
    rep.add("unital", "F(1 - e_A) = 1 - e_A", map.apply(&f1).dist(&f1), eps);
    CutExpectation {
        corner,
        map,
        pairs,
        index,
        report: rep,
    }
}

/// `(1 - e_A) C (1 - e_A) = A(1 - e_A) ≅ A` and `e_A C e_A = A e_A`.
pub fn corner_is_a(c: &BasicConstruction, p: &InclusionPair, tol: &Tol) -> CheckReport {
    let big = c.ambient_dim();
    let f1 = c.one_minus_e();
    let e = &c.jones;
    let ea: Vec<CMat> = p.a.basis().iter().map(|a| c.embed(a)).collect();
    let a_f: Vec<CMat> = ea.iter().map(|a| a * &f1).collect();
    let a_e: Vec<CMat> = ea.iter().map(|a| a * e).collect();
    let span_f = Subspace::span(big, big, &a_f, tol);
    let span_e = Subspace::span(big, big, &a_e, tol);
    let (mut rf, mut re) = (0.0f64, 0.0f64);
    for x in c.algebra.basis() {
        rf = rf.max(span_f.residual(&(&(&f1 * x) * &f1)));
        re = re.max(span_e.residual(&(&(e * x) * e)));
    }
    let eps = tol.bound(f1.norm().max(1.0));
    let mut rep = CheckReport::new();
    rep.add("corner", "(1 - e_A) x (1 - e_A) ∈ A(1 - e_A)", rf, eps);
    rep.push(Check::count("corner_injective", "a(1 - e_A) = 0 ⇒ a = 0", span_f.dim(), p.a.dim()));
    let recover = p
        .a
        .basis()
        .iter()
        .zip(&a_f)
        .fold(0.0f64, |m, (a, af)| m.max(c.dual_exp(af).scale_re(2.0).dist(a)));
    rep.add("recover", "a = 2 Ẽ(a(1 - e_A))", recover, eps);
    rep.add("e_corner", "e_A x e_A ∈ A e_A", re, eps);
    rep.push(Check::count("e_corner_injective", "a e_A = 0 ⇒ a = 0", span_e.dim(), p.a.dim()));
    rep
}

/// Fixed points of the flip, checked equal to the embedded copy of `B`.
pub fn fixed_points_of_flip(c: &BasicConstruction, p: &InclusionPair, tol: &Tol) -> (CStarAlg, CheckReport) {
    let fixed = c.flip.eigenspace(crate::matkernel::ONE, tol);
    let big = c.ambient_dim();
    let eb: Vec<CMat> = p.b.basis().iter().map(|b| c.embed(b)).collect();
    let emb = Subspace::span(big, big, &eb, tol);
    let mut rep = CheckReport::new();
    rep.push(Check::count("dimension", "dim C^flip = dim B", fixed.dim(), p.b.dim()));
    let res = fixed.containment_residual(&emb).max(emb.containment_residual(&fixed));
    rep.add("equal", "C^flip = B", res, tol.bound(1.0));
    (CStarAlg::from_subspace(fixed, c.unit().clone()), rep)
}

/// The unique `b ∈ B` with `e_A x = e_A b`, computed as `b = 2 Ẽ(e_A x)`.
pub fn reduce_left(c: &BasicConstruction, x: &CMat, tol: &Tol) -> Result<CMat> {
    let r = c.algebra.residual(x);
    if r > tol.bound(x.norm()) * 10.0 {
        return Err(Error::NotInAlgebra(r));
    }
    if !c.left_injective {
        return Err(Error::Degenerate("b ↦ e_A b is not injective".into()));
    }
    let b = c.dual_exp(&(&c.jones * x)).scale_re(2.0);
    let res = (&c.jones * x).dist(&(&c.jones * &c.embed(&b)));
    if res > tol.bound(x.norm().max(1.0)) * 10.0 {
        return Err(Error::ResidualExceeded {
            what: "e_A x = e_A b".into(),
            residual: res,
        });
    }
    Ok(b)
}

/// All structural invariants of a basic construction.
pub fn verify_basic(c: &BasicConstruction, p: &InclusionPair, tol: &Tol) -> CheckReport {
    let mut rep = CheckReport::new();
    let e = &c.jones;
    let unit = c.unit();
    let f1 = c.one_minus_e();
    let eps = tol.bound(unit.norm().max(1.0));
    let bb = p.b.basis();
    rep.add("well_defined", "generator relations respected by Ẽ and flip", c.well_defined, eps * 10.0);
    rep.add("jones_projection", "e_A = e_A* = e_A^2", e.projection_defect(), eps);
    let mut ebe = 0.0f64;
    let mut ad_u = 0.0f64;
    let mut flip_fix = 0.0f64;
    let mut dual_embed = 0.0f64;
    let mut reduce = 0.0f64;
    let u = &c.unitary_u;
    for b in bb {
        let x = c.embed(b);
        let eb_ = c.embed(&p.expect(b));
        ebe = ebe.max((&(e * &x) * e).dist(&(&eb_ * e)));
        let twice = &p.expect(b).scale_re(2.0) - b;
        ad_u = ad_u.max((&(u * &x) * &u.adjoint()).dist(&c.embed(&twice)));
        flip_fix = flip_fix.max(c.flip(&x).dist(&x));
        dual_embed = dual_embed.max(c.dual_exp(&x).dist(b));
        if let Ok(r) = reduce_left(c, &x, tol) {
            reduce = reduce.max(r.dist(b));
        } else {
            reduce = f64::INFINITY;
        }
    }
    rep.add("e_b_e", "e_A b e_A = E(b) e_A", ebe, eps);
    rep.add("u_squared", "U^2 = 1", (u * u).dist(unit), eps);
    rep.add("u_implements_beta", "U b U* = 2E(b) - b", ad_u, eps);
    let flip2 = c
        .algebra
        .basis()
        .iter()
        .fold(0.0f64, |m, x| m.max(c.flip(&c.flip(x)).dist(x)));
    rep.add("flip_order_two", "flip^2 = id", flip2, eps);
    rep.add("flip_jones", "flip(e_A) = 1 - e_A", c.flip(e).dist(&f1), eps);
    rep.add("flip_fixes_b", "flip(b) = b for b in B", flip_fix, eps);
    let mut mult = 0.0f64;
    let basis = c.algebra.basis();
    let step = (basis.len() / 12).max(1);
    for x in basis.iter().step_by(step) {
        for y in basis.iter().step_by(step) {
            mult = mult.max(c.flip(&(x * y)).dist(&(&c.flip(x) * &c.flip(y))));
        }
    }
    rep.add("flip_multiplicative", "flip(xy) = flip(x) flip(y)", mult, eps);
    rep.add("dual_on_b", "Ẽ(b) = b", dual_embed, eps);
    rep.add("dual_on_jones", "Ẽ(e_A) = 1/2", c.dual_exp(e).dist(&p.b.unit().scale_re(0.5)), eps);
    rep.add("closure", "C*<B, e_A> is a *-algebra", c.algebra.closure_residual(), eps * 10.0);
    rep.add("reduce_left_on_b", "reduce_left(b) = b", reduce, eps);
    let rank = rank_tol(&CMat::from_matrix(c.embed_b.matrix_in(c.algebra.space())), tol);
    rep.push(Check::count("embed_injective", "b ↦ b is injective", rank, p.b.dim()));
    if c.kind == ModelKind::Crossed {
        rep.push(Check::count("graded_dimension", "dim C*<B, e_A> = 2 dim B", c.algebra.dim(), 2 * p.b.dim()));
        let n = p.ambient_dim();
        let s = CMat::direct_sum(&CMat::identity(n), &CMat::identity(n).scale_re(-1.0));
        let hat = c
            .algebra
            .basis()
            .iter()
            .fold(0.0f64, |m, x| m.max(c.flip(x).dist(&(&(&s * x) * &s))));
        rep.add("flip_is_grading", "flip = Ad(diag(1, -1))", hat, eps);
        let corner = c
            .algebra
            .basis()
            .iter()
            .fold(0.0f64, |m, x| m.max(c.dual_exp(x).dist(&x.block(0, 0, n, n))));
        rep.add("dual_is_corner", "Ẽ(x) = x_11", corner, eps);
    }
    rep
}

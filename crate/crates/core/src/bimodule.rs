//! Involutive `A`-`A` equivalence bimodules.
//!
//! A bimodule is stored by coefficient tensors over a carrier basis
//! `x_1..x_d` (a concrete subspace of some matrix space) and the orthonormal
//! basis `a_1..a_k` of `A`:
//!
//! * `L_k`, `R_k`: `d × d` matrices of `a_k · x` and `x · a_k`;
//! * `LI_k`, `RI_k`: `A<x, y>_k = x^T LI_k conj(y)`, `<x, y>_A,k = x^H RI_k y`;
//! * the involution `x♯ = J_lin x + J_anti conj(x)` (`J_lin = 0` when proper).
//!
//! All axioms then become finite identities among these tensors.

use nalgebra::{DMatrix, DVector};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::basic::{reduce_left, BasicConstruction};
use crate::check::{Check, CheckReport};
use crate::cstar::CStarAlg;
use crate::dynamics::{validate_two_z_inner, TwoZInnerSystem};
use crate::error::{Error, Result};
use crate::inclusion::{minus_part, InclusionPair};
use crate::matkernel::{hermitian_eig, random_scalar, rank_tol, solve_least_squares, CMat, Tol, C64, ONE};
use crate::subspace::{LinMap, Subspace};

pub type Coords = DVector<C64>;
type Mat = DMatrix<C64>;

fn conj_m(m: &Mat) -> Mat {
    m.map(|z| z.conj())
}

fn conj_v(v: &Coords) -> Coords {
    v.map(|z| z.conj())
}

/// How the coefficient algebra sits inside the algebra that realizes the actions.
#[derive(Debug, Clone)]
pub struct CoeffEmbedding {
    pub coeff: CStarAlg,
    images: Vec<CMat>,
    stacked: Mat,
}

impl CoeffEmbedding {
    pub fn identity(a: &CStarAlg) -> Self {
        Self::new(a.clone(), a.basis().to_vec())
    }

    /// `images[k]` is the realization of `coeff.basis()[k]`.
    pub fn new(coeff: CStarAlg, images: Vec<CMat>) -> Self {
        let cols: Vec<Coords> = images
            .iter()
            .map(|m| DVector::from_column_slice(m.as_matrix().as_slice()))
            .collect();
        let stacked = DMatrix::from_columns(&cols);
        CoeffEmbedding { coeff, images, stacked }
    }

    pub fn from_map(coeff: CStarAlg, f: &LinMap) -> Self {
        let images = coeff.basis().iter().map(|a| f.apply(a)).collect();
        Self::new(coeff, images)
    }

    pub fn push_coords(&self, c: &Coords) -> CMat {
        let mut acc = CMat::zeros(self.images[0].rows(), self.images[0].cols());
        for (k, z) in c.iter().enumerate() {
            acc += &self.images[k].scale(*z);
        }
        acc
    }

    pub fn push(&self, a: &CMat) -> CMat {
        self.push_coords(&self.coeff.space().coords(a))
    }

    /// Coefficient coordinates of a realized element, and the fit residual.
    pub fn pull(&self, m: &CMat, tol: &Tol) -> (Coords, f64) {
        let v = DVector::from_column_slice(m.as_matrix().as_slice());
        solve_least_squares(&self.stacked, &v, tol)
    }
}

#[derive(Debug, Clone)]
pub struct Bimodule {
    pub a: CStarAlg,
    pub carrier: Subspace,
    pub left: Vec<Mat>,
    pub right: Vec<Mat>,
    pub left_inner: Vec<Mat>,
    pub right_inner: Vec<Mat>,
    /// Largest distance of a computed action/inner-product value from the
    /// carrier or from `A` during construction.
    pub realization_residual: f64,
}

#[derive(Debug, Clone)]
pub struct Involution {
    pub lin: Mat,
    pub anti: Mat,
}

impl Involution {
    pub fn apply(&self, x: &Coords) -> Coords {
        &self.lin * x + &self.anti * conj_v(x)
    }

    /// A deliberately broken involution `x ↦ x`.
    pub fn identity(d: usize) -> Self {
        Involution {
            lin: Mat::identity(d, d),
            anti: Mat::zeros(d, d),
        }
    }
}

#[derive(Debug, Clone)]
pub struct InvolutiveBimodule {
    pub module: Bimodule,
    pub involution: Involution,
}

impl InvolutiveBimodule {
    pub fn sharp(&self, x: &Coords) -> Coords {
        self.involution.apply(x)
    }

    pub fn dim(&self) -> usize {
        self.module.dim()
    }
}

impl Bimodule {
    /// Tabulates a bimodule from concrete operations on realized elements.
    /// `left`/`right` receive the realized coefficient; inner products must
    /// return realized coefficients, which are pulled back through `emb`.
    pub fn from_concrete(
        emb: &CoeffEmbedding,
        carrier: Subspace,
        left: impl Fn(&CMat, &CMat) -> CMat,
        right: impl Fn(&CMat, &CMat) -> CMat,
        linner: impl Fn(&CMat, &CMat) -> CMat,
        rinner: impl Fn(&CMat, &CMat) -> CMat,
        tol: &Tol,
    ) -> Self {
        let d = carrier.dim();
        let ka = emb.coeff.dim();
        let xs = carrier.basis();
        let mut worst = 0.0f64;
        let mut act = |f: &dyn Fn(&CMat, &CMat) -> CMat, a: &CMat| {
            let mut m = Mat::zeros(d, d);
            for (j, x) in xs.iter().enumerate() {
                let y = f(a, x);
                worst = worst.max(carrier.residual(&y));
                m.set_column(j, &carrier.coords(&y));
            }
            m
        };
        let left_m: Vec<Mat> = emb.images.iter().map(|a| act(&left, a)).collect();
        let right_m: Vec<Mat> = emb.images.iter().map(|a| act(&|a, x| right(x, a), a)).collect();
        let mut li = vec![Mat::zeros(d, d); ka];
        let mut ri = vec![Mat::zeros(d, d); ka];
        for (i, x) in xs.iter().enumerate() {
            for (j, y) in xs.iter().enumerate() {
                let (lc, lr) = emb.pull(&linner(x, y), tol);
                let (rc, rr) = emb.pull(&rinner(x, y), tol);
                worst = worst.max(lr).max(rr);
                for k in 0..ka {
                    li[k][(i, j)] = lc[k];
                    ri[k][(i, j)] = rc[k];
                }
            }
        }
        Bimodule {
            a: emb.coeff.clone(),
            carrier,
            left: left_m,
            right: right_m,
            left_inner: li,
            right_inner: ri,
            realization_residual: worst,
        }
    }

    pub fn dim(&self) -> usize {
        self.carrier.dim()
    }

    pub fn a_dim(&self) -> usize {
        self.a.dim()
    }

    pub fn a_coords(&self, a: &CMat) -> Coords {
        self.a.space().coords(a)
    }

    pub fn a_elem(&self, c: &Coords) -> CMat {
        self.a.space().combine(c)
    }

    pub fn a_unit(&self) -> Coords {
        self.a_coords(self.a.unit())
    }

    pub fn element(&self, x: &Coords) -> CMat {
        self.carrier.combine(x)
    }

    pub fn left_op(&self, a: &Coords) -> Mat {
        let d = self.dim();
        a.iter().zip(&self.left).fold(Mat::zeros(d, d), |acc, (z, m)| acc + m * *z)
    }

    pub fn right_op(&self, a: &Coords) -> Mat {
        let d = self.dim();
        a.iter().zip(&self.right).fold(Mat::zeros(d, d), |acc, (z, m)| acc + m * *z)
    }

    pub fn act_left(&self, a: &Coords, x: &Coords) -> Coords {
        self.left_op(a) * x
    }

    pub fn act_right(&self, x: &Coords, a: &Coords) -> Coords {
        self.right_op(a) * x
    }

    /// `A<x, y>` in `A`-coordinates.
    pub fn linner(&self, x: &Coords, y: &Coords) -> Coords {
        let cy = conj_v(y);
        DVector::from_iterator(self.a_dim(), self.left_inner.iter().map(|m| (x.transpose() * m * &cy)[(0, 0)]))
    }

    /// `<x, y>_A` in `A`-coordinates.
    pub fn rinner(&self, x: &Coords, y: &Coords) -> Coords {
        DVector::from_iterator(self.a_dim(), self.right_inner.iter().map(|m| (x.adjoint() * m * y)[(0, 0)]))
    }

    pub fn a_mul(&self, x: &Coords, y: &Coords) -> Coords {
        self.a_coords(&(&self.a_elem(x) * &self.a_elem(y)))
    }

    pub fn a_adj(&self, x: &Coords) -> Coords {
        self.a_coords(&self.a_elem(x).adjoint())
    }

    fn basis_vec(n: usize, i: usize) -> Coords {
        let mut v = DVector::zeros(n);
        v[i] = ONE;
        v
    }

    fn random_vec(n: usize, rng: &mut impl rand::Rng) -> Coords {
        DVector::from_fn(n, |_, _| random_scalar(rng))
    }

    fn scale(&self) -> f64 {
        let all = self.left.iter().chain(&self.right).chain(&self.left_inner).chain(&self.right_inner);
        all.fold(1.0f64, |m, x| m.max(x.norm()))
    }
}

fn max_gap(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(0.0f64, f64::max)
}

/// Bimodule, inner-product, imprimitivity and fullness axioms.
pub fn verify_module(x: &Bimodule, tol: &Tol) -> CheckReport {
    let mut rep = CheckReport::new();
    let d = x.dim();
    let ka = x.a_dim();
    if d == 0 {
        rep.push(Check::flag("full", "span A<X, X> = A = span <X, X>_A", false));
        return rep;
    }
    let s = x.scale();
    let eps = tol.bound(s * s);
    let av: Vec<Coords> = (0..ka).map(|k| Bimodule::basis_vec(ka, k)).collect();
    let xv: Vec<Coords> = (0..d).map(|k| Bimodule::basis_vec(d, k)).collect();
    let mut rng = tol.rng(0xb1);
    let samples = tol.sample_count.clamp(1, 12);
    let mut xs = xv.clone();
    xs.extend((0..samples).map(|_| Bimodule::random_vec(d, &mut rng)));
    let mut as_ = av.clone();
    as_.extend((0..samples.min(4)).map(|_| Bimodule::random_vec(ka, &mut rng)));
    let mult: Vec<Vec<Coords>> = as_.iter().map(|p| as_.iter().map(|q| x.a_mul(p, q)).collect()).collect();

    rep.add("realization", "actions and inner products land in X and A", x.realization_residual, eps);
    let mut lh = 0.0f64;
    let mut rh = 0.0f64;
    let mut comm = 0.0f64;
    for (i, p) in as_.iter().enumerate() {
        for (j, q) in as_.iter().enumerate() {
            let pq = &mult[i][j];
            lh = lh.max((x.left_op(pq) - x.left_op(p) * x.left_op(q)).norm());
            rh = rh.max((x.right_op(pq) - x.right_op(q) * x.right_op(p)).norm());
            comm = comm.max((x.left_op(p) * x.right_op(q) - x.right_op(q) * x.left_op(p)).norm());
        }
    }
    rep.add("left_action", "(aa')·x = a·(a'·x)", lh, eps);
    rep.add("right_action", "x·(aa') = (x·a)·a'", rh, eps);
    let one = x.a_unit();
    let id = Mat::identity(d, d);
    let unit = (x.left_op(&one) - &id).norm().max((x.right_op(&one) - &id).norm());
    rep.add("unit", "1·x = x = x·1", unit, eps);
    rep.add("actions_commute", "(a·x)·b = a·(x·b)", comm, eps);

    let (mut herm, mut lin, mut adj, mut normc) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut pos = 0.0f64;
    for p in &xs {
        for q in &xs {
            herm = herm.max((x.a_adj(&x.linner(p, q)) - x.linner(q, p)).norm());
            herm = herm.max((x.a_adj(&x.rinner(p, q)) - x.rinner(q, p)).norm());
        }
    }
    for a in &as_ {
        let astar = x.a_adj(a);
        for p in xv.iter().chain(xs.iter().skip(d).take(3)) {
            for q in &xv {
                let l1 = x.linner(&x.act_left(a, p), q);
                let l2 = x.a_mul(a, &x.linner(p, q));
                let r1 = x.rinner(p, &x.act_right(q, a));
                let r2 = x.a_mul(&x.rinner(p, q), a);
                lin = lin.max((l1 - l2).norm()).max((r1 - r2).norm());
                let ad1 = x.rinner(&x.act_left(a, p), q);
                let ad2 = x.rinner(p, &x.act_left(&astar, q));
                let ad3 = x.linner(&x.act_right(p, a), q);
                let ad4 = x.linner(p, &x.act_right(q, &astar));
                adj = adj.max((ad1 - ad2).norm()).max((ad3 - ad4).norm());
            }
        }
    }
    for p in &xs {
        let l = x.a_elem(&x.linner(p, p));
        let r = x.a_elem(&x.rinner(p, p));
        let n2 = p.norm_squared().max(1e-300);
        for m in [&l, &r] {
            let h = (m + &m.adjoint()).scale_re(0.5);
            if let Ok((vals, _)) = hermitian_eig(&h, tol) {
                pos = pos.max((-vals.last().copied().unwrap_or(0.0)).max(0.0) / n2);
            }
        }
        normc = normc.max((l.op_norm() - r.op_norm()).abs() / n2);
    }
    rep.add("hermitian", "<x, y>* = <y, x> (both sides)", herm, eps);
    rep.add("a_linear", "A<a·x, y> = a A<x, y>, <x, y·a>_A = <x, y>_A a", lin, eps);
    rep.add("positive", "A<x, x> ⪰ 0, <x, x>_A ⪰ 0", pos, tol.bound(s));
    rep.add("adjointable", "<a·x, y>_A = <x, a*·y>_A, A<x·a, y> = A<x, y·a*>", adj, eps);

    let mut imp = 0.0f64;
    for p in &xv {
        for q in &xv {
            let lpq = x.linner(p, q);
            for r in &xv {
                let lhs = x.act_left(&lpq, r);
                let rhs = x.act_right(p, &x.rinner(q, r));
                imp = imp.max((lhs - rhs).norm());
            }
        }
    }
    rep.add("imprimitivity", "A<x, y>·z = x·<y, z>_A", imp, eps);
    rep.add("norm_compatible", "‖A<x, x>‖ = ‖<x, x>_A‖", normc, tol.bound(s));

    for (name, tensors) in [("definite_left", &x.left_inner), ("definite_right", &x.right_inner)] {
        // tau(<x_i, x_j>) as a Gram matrix
        let mut g = Mat::zeros(d, d);
        for (k, t) in tensors.iter().enumerate() {
            let tr = x.a.basis()[k].normalized_trace();
            g += t * tr;
        }
        let g = if name == "definite_left" { g.transpose() } else { g };
        let gm = CMat::from_matrix(&g * C64::new(0.5, 0.0) + g.adjoint() * C64::new(0.5, 0.0));
        let ok = hermitian_eig(&gm, tol)
            .map(|(v, _)| v.last().copied().unwrap_or(0.0) > tol.threshold(v[0].abs()))
            .unwrap_or(false);
        rep.push(Check::flag(name, "<x, x> = 0 ⇒ x = 0", ok));
    }
    for (name, tensors) in [("full_left", &x.left_inner), ("full_right", &x.right_inner)] {
        let mut cols = Vec::new();
        for i in 0..d {
            for j in 0..d {
                cols.push(DVector::from_iterator(ka, tensors.iter().map(|t| t[(i, j)])));
            }
        }
        let m = CMat::from_matrix(DMatrix::from_columns(&cols));
        rep.push(Check::count(name, "span of inner-product values = A", rank_tol(&m, tol), ka));
    }
    rep
}

/// The three involution axioms plus conjugate-linearity.
pub fn verify_involution(x: &InvolutiveBimodule, tol: &Tol) -> CheckReport {
    let m = &x.module;
    let d = m.dim();
    let ka = m.a_dim();
    let mut rep = CheckReport::new();
    if d == 0 {
        return rep;
    }
    let s = m.scale();
    let eps = tol.bound(s * s);
    let mut rng = tol.rng(0x5a);
    let mut xs: Vec<Coords> = (0..d).map(|k| Bimodule::basis_vec(d, k)).collect();
    xs.extend((0..tol.sample_count.clamp(1, 8)).map(|_| Bimodule::random_vec(d, &mut rng)));
    let mut as_: Vec<Coords> = (0..ka).map(|k| Bimodule::basis_vec(ka, k)).collect();
    as_.extend((0..3).map(|_| Bimodule::random_vec(ka, &mut rng)));

    let i = C64::new(0.0, 1.0);
    let cl = xs
        .iter()
        .map(|p| (x.sharp(&(p * i)) - x.sharp(p) * i.conj()).norm())
        .fold(0.0f64, f64::max);
    rep.add("conjugate_linear", "(λx)♯ = conj(λ) x♯", cl, eps);
    let inv = max_gap(xs.iter().map(|p| (x.sharp(&x.sharp(p)) - p).norm()));
    rep.add("involutive", "(x♯)♯ = x", inv, eps);
    let mut tw = 0.0f64;
    for a in &as_ {
        let astar = m.a_adj(a);
        for b in &as_ {
            let bstar = m.a_adj(b);
            for p in &xs {
                let lhs = x.sharp(&m.act_right(&m.act_left(a, p), b));
                let rhs = m.act_right(&m.act_left(&bstar, &x.sharp(p)), &astar);
                tw = tw.max((lhs - rhs).norm());
            }
        }
    }
    rep.add("twisted", "(a·x·b)♯ = b*·x♯·a*", tw, eps);
    let mut ex = 0.0f64;
    for p in &xs {
        for q in &xs {
            ex = ex.max((m.linner(p, &x.sharp(q)) - m.rinner(&x.sharp(p), q)).norm());
        }
    }
    rep.add("inner_exchange", "A<x, y♯> = <x♯, y>_A", ex, eps);
    rep
}

pub fn verify_bimodule(x: &InvolutiveBimodule, tol: &Tol) -> CheckReport {
    let mut rep = verify_module(&x.module, tol);
    rep.merge("", verify_involution(x, tol));
    rep
}

/// `X̃`: same carrier read through `x ↦ x̃` (realized as `x*`), with
/// `b·x̃·a = (a*·x·b*)~`, `A<x̃, ỹ> = <x, y>_A`, `<x̃, ỹ>_A = A<x, y>`.
/// Coordinates of `x̃` are the complex conjugates of those of `x`.
#[derive(Debug, Clone)]
pub struct DualBimodule {
    pub dual: InvolutiveBimodule,
}

impl DualBimodule {
    pub fn tilde(&self, x: &Coords) -> Coords {
        conj_v(x)
    }
}

pub fn dual(x: &InvolutiveBimodule) -> DualBimodule {
    let m = &x.module;
    let ka = m.a_dim();
    let stars: Vec<Coords> = (0..ka).map(|k| m.a_adj(&Bimodule::basis_vec(ka, k))).collect();
    let left = stars.iter().map(|s| conj_m(&m.right_op(s))).collect();
    let right = stars.iter().map(|s| conj_m(&m.left_op(s))).collect();
    let carrier_basis: Vec<CMat> = m.carrier.basis().iter().map(|b| b.adjoint()).collect();
    let carrier = Subspace::from_orthonormal(m.carrier.cols(), m.carrier.rows(), carrier_basis);
    let module = Bimodule {
        a: m.a.clone(),
        carrier,
        left,
        right,
        left_inner: m.right_inner.clone(),
        right_inner: m.left_inner.clone(),
        realization_residual: m.realization_residual,
    };
    let involution = Involution {
        lin: conj_m(&x.involution.lin),
        anti: conj_m(&x.involution.anti),
    };
    DualBimodule {
        dual: InvolutiveBimodule { module, involution },
    }
}

/// Checks that the coordinate map `t: X → Y` is a bimodule isomorphism
/// preserving both inner products, and the involutions when given.
pub fn verify_iso(x: &Bimodule, y: &Bimodule, t: &Mat, sharps: Option<(&Involution, &Involution)>, tol: &Tol) -> CheckReport {
    let mut rep = CheckReport::new();
    let s = x.scale().max(y.scale()).max(t.norm());
    let eps = tol.bound(s * s * s);
    if t.nrows() != y.dim() || t.ncols() != x.dim() || x.a_dim() != y.a_dim() {
        rep.push(Check::flag("shape", "compatible carriers and coefficients", false));
        return rep;
    }
    let l = max_gap(x.left.iter().zip(&y.left).map(|(lx, ly)| (t * lx - ly * t).norm()));
    let r = max_gap(x.right.iter().zip(&y.right).map(|(rx, ry)| (t * rx - ry * t).norm()));
    rep.add("left_action", "T(a·x) = a·T(x)", l, eps);
    rep.add("right_action", "T(x·a) = T(x)·a", r, eps);
    let tc = conj_m(t);
    let li = max_gap(
        x.left_inner
            .iter()
            .zip(&y.left_inner)
            .map(|(gx, gy)| (t.transpose() * gy * &tc - gx).norm()),
    );
    let ri = max_gap(
        x.right_inner
            .iter()
            .zip(&y.right_inner)
            .map(|(gx, gy)| (t.adjoint() * gy * t - gx).norm()),
    );
    rep.add("left_inner", "A<Tx, Ty> = A<x, y>", li, eps);
    rep.add("right_inner", "<Tx, Ty>_A = <x, y>_A", ri, eps);
    let rank = rank_tol(&CMat::from_matrix(t.clone()), tol);
    rep.push(Check::count("bijective", "T is invertible", rank, x.dim().max(y.dim())));
    if let Some((jx, jy)) = sharps {
        let sa = (t * &jx.anti - &jy.anti * &tc).norm();
        let sl = (t * &jx.lin - &jy.lin * t).norm();
        rep.add("sharp", "T(x♯) = T(x)♯", sa.max(sl), eps);
    }
    rep
}

/// `V(x) = (x♯)~`, an isomorphism `X → X̃`; also checks `V∘V = id` through
/// the double dual.
pub fn v_map(x: &InvolutiveBimodule, tol: &Tol) -> (Mat, CheckReport) {
    let d = dual(x);
    let v = conj_m(&x.involution.anti);
    let mut rep = verify_iso(&x.module, &d.dual.module, &v, None, tol);
    let vd = conj_m(&d.dual.involution.anti);
    let n = x.dim();
    rep.add(
        "involutive",
        "V̄ V = id via X ≅ X̃̃",
        (&vd * &v - Mat::identity(n, n)).norm(),
        tol.bound(v.norm().powi(2).max(1.0)),
    );
    rep.add(
        "linear",
        "V is complex-linear",
        x.involution.lin.norm(),
        tol.bound(v.norm().max(1.0)),
    );
    (v, rep)
}

/// Elements `z_i, y_i` with `Σ <z_i, y_i>_A = 1`, as coordinate pairs.
pub fn fullness_witness(x: &Bimodule, tol: &Tol) -> Result<Vec<(Coords, Coords)>> {
    let d = x.dim();
    let ka = x.a_dim();
    if d == 0 {
        return Err(Error::Degenerate("empty bimodule is not full".into()));
    }
    let mut sys = Mat::zeros(ka, d * d);
    for i in 0..d {
        for j in 0..d {
            for k in 0..ka {
                sys[(k, i * d + j)] = x.right_inner[k][(i, j)];
            }
        }
    }
    let one = x.a_unit();
    let (c, res) = solve_least_squares(&sys, &one, tol);
    if res > tol.bound(one.norm()) * 10.0 {
        return Err(Error::ResidualExceeded {
            what: "Σ <z_i, y_i>_A = 1".into(),
            residual: res,
        });
    }
    Ok((0..d)
        .map(|i| {
            let z = Bimodule::basis_vec(d, i);
            let y = DVector::from_fn(d, |j, _| c[i * d + j]);
            (z, y)
        })
        .collect())
}

/// `X_B = e_A C*<B, e_A> (1 - e_A)` with `a·x·b = ψ(a) x φ(b)`,
/// `A<x, y> = ψ⁻¹(xy*)`, `<x, y>_A = φ⁻¹(x*y)`, `x♯ = flip(x*)`.
pub fn build_xb(c: &BasicConstruction, p: &InclusionPair, tol: &Tol) -> InvolutiveBimodule {
    build_xb_over(c, p, &CoeffEmbedding::identity(&p.a), tol)
}

pub fn build_xb_over(c: &BasicConstruction, _p: &InclusionPair, emb: &CoeffEmbedding, tol: &Tol) -> InvolutiveBimodule {
    let big = c.ambient_dim();
    let f1 = c.one_minus_e();
    let gens: Vec<CMat> = c.algebra.basis().iter().map(|x| &(&c.jones * x) * &f1).collect();
    let carrier = Subspace::span(big, big, &gens, tol);
    // ψ(a) = a e_A and φ(a) = a (1 - e_A) act on the corner as plain multiplication by a
    let module = Bimodule::from_concrete(
        emb,
        carrier,
        |a, x| &c.embed(a) * x,
        |x, a| x * &c.embed(a),
        |x, y| c.dual_exp(&(x * &y.adjoint())).scale_re(2.0),
        |x, y| c.dual_exp(&(&x.adjoint() * y)).scale_re(2.0),
        tol,
    );
    let involution = concrete_involution(&module, |x| c.flip(&x.adjoint()));
    InvolutiveBimodule { module, involution }
}

fn concrete_involution(m: &Bimodule, sharp: impl Fn(&CMat) -> CMat) -> Involution {
    let d = m.dim();
    let mut anti = Mat::zeros(d, d);
    for (j, x) in m.carrier.basis().iter().enumerate() {
        anti.set_column(j, &m.carrier.coords(&sharp(x)));
    }
    Involution {
        lin: Mat::zeros(d, d),
        anti,
    }
}

/// `B_- = ker E` with `A<x, y> = E(xy*)`, `<x, y>_A = E(x*y)`, `x♯ = x*`.
pub fn build_bminus(p: &InclusionPair, tol: &Tol) -> InvolutiveBimodule {
    build_bminus_over(p, &CoeffEmbedding::identity(&p.a), tol)
}

pub fn build_bminus_over(p: &InclusionPair, emb: &CoeffEmbedding, tol: &Tol) -> InvolutiveBimodule {
    let carrier = minus_part(p, tol);
    let module = Bimodule::from_concrete(
        emb,
        carrier,
        |a, x| a * x,
        |x, a| x * a,
        |x, y| p.expect(&(x * &y.adjoint())),
        |x, y| p.expect(&(&x.adjoint() * y)),
        tol,
    );
    let involution = concrete_involution(&module, |x| x.adjoint());
    InvolutiveBimodule { module, involution }
}

/// The canonical isomorphism `e_A x (1 - e_A) ↦ b - E(b)` with `e_A x = e_A b`.
pub fn canonical_xb_to_bminus(
    c: &BasicConstruction,
    p: &InclusionPair,
    xb: &InvolutiveBimodule,
    bm: &InvolutiveBimodule,
    tol: &Tol,
) -> Result<(Mat, CheckReport)> {
    let d = xb.dim();
    let mut t = Mat::zeros(bm.dim(), d);
    let mut into = 0.0f64;
    for (j, x) in xb.module.carrier.basis().iter().enumerate() {
        let b = reduce_left(c, x, tol)?;
        let m = &b - &p.expect(&b);
        into = into.max(bm.module.carrier.residual(&m));
        t.set_column(j, &bm.module.carrier.coords(&m));
    }
    let mut rep = CheckReport::new();
    rep.add("into_bminus", "b - E(b) ∈ B_-", into, tol.bound(1.0));
    rep.merge(
        "",
        verify_iso(&xb.module, &bm.module, &t, Some((&xb.involution, &bm.involution)), tol),
    );
    if !rep.all_pass() {
        return Err(Error::IsoResidualExceeded(rep.max_residual()));
    }
    Ok((t, rep))
}

/// `X_alpha = A` with `x·a = x alpha(a)`, `A<x, y> = xy*`,
/// `<x, y>_A = alpha⁻¹(x*y)` and `x♯ = z* alpha(x*)`.
pub fn build_xalpha(sys: &TwoZInnerSystem, tol: &Tol) -> Result<InvolutiveBimodule> {
    let v = validate_two_z_inner(sys, tol);
    if let Some(f) = v.failures().first() {
        return Err(Error::NotTwoZInner(format!("{} (residual {:.3e})", f.name, f.residual)));
    }
    let a = &sys.a;
    let alpha = &sys.alpha;
    let alpha_inv = sys.alpha_inverse(tol)?;
    let zs = sys.z.adjoint();
    let emb = CoeffEmbedding::identity(a);
    let module = Bimodule::from_concrete(
        &emb,
        a.space().clone(),
        |b, x| b * x,
        |x, b| x * &alpha.apply(b),
        |x, y| x * &y.adjoint(),
        |x, y| alpha_inv.apply(&(&x.adjoint() * y)),
        tol,
    );
    let involution = concrete_involution(&module, |x| &zs * &alpha.apply(&x.adjoint()));
    Ok(InvolutiveBimodule { module, involution })
}

impl Serialize for Bimodule {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let cm = |v: &[Mat]| v.iter().map(|m| CMat::from_matrix(m.clone())).collect::<Vec<_>>();
        let mut st = s.serialize_struct("Bimodule", 6)?;
        st.serialize_field("algebra", &self.a)?;
        st.serialize_field("carrier_basis", self.carrier.basis())?;
        st.serialize_field("left_action", &cm(&self.left))?;
        st.serialize_field("right_action", &cm(&self.right))?;
        st.serialize_field("left_inner", &cm(&self.left_inner))?;
        st.serialize_field("right_inner", &cm(&self.right_inner))?;
        st.end()
    }
}

impl Serialize for InvolutiveBimodule {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("InvolutiveBimodule", 3)?;
        st.serialize_field("module", &self.module)?;
        st.serialize_field("involution_linear", &CMat::from_matrix(self.involution.lin.clone()))?;
        st.serialize_field("involution_antilinear", &CMat::from_matrix(self.involution.anti.clone()))?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basic::crossed_model;
    use crate::fixtures;

    fn tol() -> Tol {
        Tol::default()
    }

    #[test]
    fn carrier_dimensions() {
        for (p, d) in [
            (fixtures::fix_a(&tol()).unwrap(), 1),
            (fixtures::fix_b(&tol()).unwrap(), 2),
            (fixtures::fix_c(&tol()).unwrap(), 4),
        ] {
            let c = crossed_model(&p, &tol());
            let xb = build_xb(&c, &p, &tol());
            let bm = build_bminus(&p, &tol());
            assert_eq!(xb.dim(), d);
            assert_eq!(bm.dim(), d);
            assert_eq!(d, p.b.dim() - p.a.dim());
            for x in [&xb, &bm] {
                let rep = verify_bimodule(x, &tol());
                assert!(rep.all_pass(), "{:?}", rep.failures());
            }
            let (_, rep) = canonical_xb_to_bminus(&c, &p, &xb, &bm, &tol()).unwrap();
            assert!(rep.all_pass());
        }
    }

    #[test]
    fn identity_involution_is_rejected() {
        let p = fixtures::fix_b(&tol()).unwrap();
        let mut x = build_bminus(&p, &tol());
        x.involution = Involution::identity(x.dim());
        let rep = verify_bimodule(&x, &tol());
        assert!(!rep.get("twisted").unwrap().pass);
        assert!(!rep.get("conjugate_linear").unwrap().pass);
    }

    #[test]
    fn dual_and_v_map() {
        let p = fixtures::fix_c(&tol()).unwrap();
        let x = build_bminus(&p, &tol());
        let d = dual(&x);
        assert!(verify_module(&d.dual.module, &tol()).all_pass());
        let dd = dual(&d.dual);
        for (a, b) in dd.dual.module.left.iter().zip(&x.module.left) {
            assert!((a - b).norm() < 1e-9);
        }
        let (_, rep) = v_map(&x, &tol());
        assert!(rep.all_pass(), "{:?}", rep.failures());
    }

    #[test]
    fn v_map_on_scalars_sends_one_to_one() {
        let a = fixtures::full_matrix_algebra(1, &tol());
        let sys = TwoZInnerSystem::inner(a, &CMat::identity(1), CMat::identity(1));
        let x = build_xalpha(&sys, &tol()).unwrap();
        let (v, rep) = v_map(&x, &tol());
        assert!(rep.all_pass());
        assert!((v[(0, 0)] - ONE).norm() < 1e-12);
    }

    #[test]
    fn xalpha_fix_e_passes() {
        let x = build_xalpha(&fixtures::fix_e(&tol()), &tol()).unwrap();
        let rep = verify_bimodule(&x, &tol());
        assert!(rep.all_pass(), "{:?}", rep.failures());
        let w = fullness_witness(&x.module, &tol()).unwrap();
        let mut sum = DVector::zeros(x.module.a_dim());
        for (z, y) in &w {
            sum += x.module.rinner(z, y);
        }
        assert!((sum - x.module.a_unit()).norm() < 1e-9);
    }

    #[test]
    fn naive_involution_formula_breaks_axioms_for_non_central_z() {
        let sys = fixtures::fix_e(&tol());
        let mut x = build_xalpha(&sys, &tol()).unwrap();
        let alpha = sys.alpha.clone();
        let z = sys.z.clone();
        x.involution = concrete_involution(&x.module, |m| &alpha.apply(&m.adjoint()) * &z);
        assert!(!verify_involution(&x, &tol()).all_pass());
    }
}

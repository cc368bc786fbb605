//! Finite-dimensional C*-algebras realized inside an ambient `M_n`.

use nalgebra::DMatrix;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::check::{Check, CheckReport};
use crate::error::{Error, Result};
use crate::matkernel::{hermitian_eig, null_space, polar_partial_isometry, rank_tol, CMat, Tol, C64};
use crate::subspace::{LinMap, Subspace};

/// A *-closed, multiplicatively closed subspace of `M_n` with its own unit.
#[derive(Debug, Clone)]
pub struct CStarAlg {
    space: Subspace,
    unit: CMat,
}

impl CStarAlg {
    /// Smallest unital *-algebra containing `gens` and the identity of `M_n`.
    pub fn generate(n: usize, gens: &[CMat], tol: &Tol) -> Self {
        Self::generate_with_unit(n, gens, &CMat::identity(n), tol)
    }

    /// Closure of `{unit} ∪ gens` under products and adjoints.
    pub fn generate_with_unit(n: usize, gens: &[CMat], unit: &CMat, tol: &Tol) -> Self {
        let mut s = Subspace::empty(n, n);
        s.try_push(unit, tol);
        for g in gens {
            s.try_push(g, tol);
            s.try_push(&g.adjoint(), tol);
        }
        let mut i = 0;
        while i < s.dim() {
            let bi = s.basis()[i].clone();
            s.try_push(&bi.adjoint(), tol);
            for j in 0..=i {
                let bj = s.basis()[j].clone();
                s.try_push(&(&bi * &bj), tol);
                s.try_push(&(&bj * &bi), tol);
            }
            i += 1;
        }
        CStarAlg { space: s, unit: unit.clone() }
    }

    /// Span of `elems`, trusted to be a *-algebra with the given unit.
    /// Use [`CStarAlg::closure_residual`] to confirm.
    pub fn from_span(n: usize, elems: &[CMat], unit: &CMat, tol: &Tol) -> Self {
        CStarAlg {
            space: Subspace::span(n, n, elems, tol),
            unit: unit.clone(),
        }
    }

    pub fn from_subspace(space: Subspace, unit: CMat) -> Self {
        CStarAlg { space, unit }
    }

    pub fn ambient_dim(&self) -> usize {
        self.space.rows()
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn basis(&self) -> &[CMat] {
        self.space.basis()
    }

    pub fn space(&self) -> &Subspace {
        &self.space
    }

    pub fn unit(&self) -> &CMat {
        &self.unit
    }

    pub fn contains(&self, m: &CMat, tol: &Tol) -> bool {
        self.space.contains(m, tol)
    }

    pub fn residual(&self, m: &CMat) -> f64 {
        self.space.residual(m)
    }

    pub fn random_element(&self, rng: &mut impl rand::Rng) -> CMat {
        self.space.random_element(rng)
    }

    /// Largest failure of closure under products and adjoints on basis pairs,
    /// and of the unit acting as identity.
    pub fn closure_residual(&self) -> f64 {
        let b = self.basis();
        let mut worst = self.space.residual(&self.unit);
        let mut batch = Vec::with_capacity(b.len() + 1);
        for x in b {
            worst = worst.max((&self.unit * x).dist(x)).max((x * &self.unit).dist(x));
            batch.push(x.adjoint());
            batch.extend(b.iter().map(|y| x * y));
            worst = self.space.residuals(&batch).into_iter().fold(worst, f64::max);
            batch.clear();
        }
        worst
    }

    /// Solves for the unit of an algebra given only its basis.
    fn infer_unit(space: &Subspace, tol: &Tol) -> Option<CMat> {
        let d = space.dim();
        if d == 0 {
            return None;
        }
        let n = space.rows();
        let b = space.basis();
        // rows: vec(b_j b_k - b_k) and vec(b_k b_j - b_k) for each k, unknown c_j
        let mut sys = DMatrix::<C64>::zeros(2 * d * n * n, d);
        let mut rhs = nalgebra::DVector::<C64>::zeros(2 * d * n * n);
        for k in 0..d {
            for j in 0..d {
                let l = &b[j] * &b[k];
                let r = &b[k] * &b[j];
                for (idx, z) in l.as_matrix().iter().enumerate() {
                    sys[(2 * k * n * n + idx, j)] = *z;
                }
                for (idx, z) in r.as_matrix().iter().enumerate() {
                    sys[((2 * k + 1) * n * n + idx, j)] = *z;
                }
            }
            for (idx, z) in b[k].as_matrix().iter().enumerate() {
                rhs[2 * k * n * n + idx] = *z;
                rhs[(2 * k + 1) * n * n + idx] = *z;
            }
        }
        let (x, res) = crate::matkernel::solve_least_squares(&sys, &rhs, tol);
        (res <= tol.bound(rhs.norm()) * 10.0).then(|| space.combine(&x))
    }
}

#[derive(Serialize, Deserialize)]
struct AlgWire {
    ambient_dim: usize,
    basis: Vec<CMat>,
}

impl Serialize for CStarAlg {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        AlgWire {
            ambient_dim: self.ambient_dim(),
            basis: self.basis().to_vec(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CStarAlg {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = AlgWire::deserialize(d)?;
        let n = w.ambient_dim;
        if w.basis.iter().any(|b| b.rows() != n || b.cols() != n) {
            return Err(D::Error::custom("basis matrices must be ambient_dim x ambient_dim"));
        }
        let tol = Tol::default();
        let space = Subspace::span(n, n, &w.basis, &tol);
        let unit = CStarAlg::infer_unit(&space, &tol).ok_or_else(|| D::Error::custom("basis has no unit"))?;
        Ok(CStarAlg { space, unit })
    }
}

/// `generate_algebra` with the identity of `M_n` adjoined.
pub fn generate_algebra(n: usize, gens: &[CMat], tol: &Tol) -> CStarAlg {
    CStarAlg::generate(n, gens, tol)
}

/// Orthogonal projection of `m` onto the algebra: `(member, projection, residual)`.
pub fn project_member(alg: &CStarAlg, m: &CMat, tol: &Tol) -> (bool, CMat, f64) {
    let p = alg.space.project(m);
    let r = p.dist(m);
    (r <= tol.bound(m.norm()), p, r)
}

/// `{x ∈ within : xa = ax for all a ∈ alg}`.
pub fn commutant(alg: &CStarAlg, within: &CStarAlg, tol: &Tol) -> Result<CStarAlg> {
    let contain = within.space.containment_residual(&alg.space);
    if contain > tol.bound(1.0) * 10.0 {
        return Err(Error::NotSubalgebra(contain));
    }
    let n = within.ambient_dim();
    let nn = n * n;
    let wb = within.basis();
    let ab = alg.basis();
    let mut sys = DMatrix::<C64>::zeros(ab.len() * nn, wb.len());
    for (k, w) in wb.iter().enumerate() {
        for (j, a) in ab.iter().enumerate() {
            let comm = w.commutator(a);
            for (idx, z) in comm.as_matrix().iter().enumerate() {
                sys[(j * nn + idx, k)] = *z;
            }
        }
    }
    let ns = null_space(&sys, tol);
    let elems: Vec<CMat> = (0..ns.ncols())
        .map(|k| within.space.combine(&ns.column(k).into_owned()))
        .collect();
    Ok(CStarAlg::from_span(n, &elems, &within.unit, tol))
}

pub fn center(alg: &CStarAlg, tol: &Tol) -> CStarAlg {
    commutant(alg, alg, tol).expect("an algebra contains itself")
}

/// Wedderburn data: minimal central projections, block sizes and multiplicities.
#[derive(Debug, Clone, Serialize)]
pub struct BlockStructure {
    pub central_projections: Vec<CMat>,
    pub block_sizes: Vec<usize>,
    pub multiplicities: Vec<usize>,
}

// Row-major lexicographic comparison of real parts, larger first.
fn canonical_cmp(a: &CMat, b: &CMat) -> std::cmp::Ordering {
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let (x, y) = (a.get(i, j).re, b.get(i, j).re);
            if (x - y).abs() > 1e-6 {
                return y.total_cmp(&x);
            }
        }
    }
    std::cmp::Ordering::Equal
}

pub fn block_structure(alg: &CStarAlg, tol: &Tol) -> Result<BlockStructure> {
    let z = center(alg, tol);
    let k = z.dim();
    let (uvals, uvecs) = hermitian_eig(&alg.unit, tol)?;
    let r = uvals.iter().filter(|&&l| l > 0.5).count();
    let v = uvecs.block(0, 0, alg.ambient_dim(), r);
    for attempt in 0..16u64 {
        let mut rng = tol.rng(0xb10c + attempt);
        let x = z.random_element(&mut rng);
        let h = &x + &x.adjoint();
        let hc = &(&v.adjoint() * &h) * &v;
        let (vals, vecs) = hermitian_eig(&hc, tol)?;
        let scale = vals.iter().fold(0.0, |m: f64, l| m.max(l.abs())).max(1e-300);
        let mut groups: Vec<Vec<usize>> = vec![vec![0]];
        for i in 1..vals.len() {
            if vals[i - 1] - vals[i] > 1e-6 * scale {
                groups.push(Vec::new());
            }
            groups.last_mut().unwrap().push(i);
        }
        if groups.len() != k {
            continue;
        }
        let mut projections: Vec<CMat> = groups
            .iter()
            .map(|g| {
                let cols = CMat::from_fn(r, g.len(), |i, j| vecs.get(i, g[j]));
                let p = &cols * &cols.adjoint();
                &(&v * &p) * &v.adjoint()
            })
            .collect();
        projections.sort_by(canonical_cmp);
        let mut sizes = Vec::new();
        let mut mults = Vec::new();
        for p in &projections {
            let cut: Vec<CMat> = alg.basis().iter().map(|b| p * b).collect();
            let d = Subspace::span(alg.ambient_dim(), alg.ambient_dim(), &cut, tol).dim();
            let nk = (d as f64).sqrt().round() as usize;
            if nk * nk != d {
                return Err(Error::Degenerate(format!("central summand of dimension {d} is not a square")));
            }
            let rank = p.trace().re.round() as usize;
            sizes.push(nk);
            mults.push(rank / nk.max(1));
        }
        return Ok(BlockStructure {
            central_projections: projections,
            block_sizes: sizes,
            multiplicities: mults,
        });
    }
    Err(Error::Degenerate(format!(
        "could not separate {k} central projections by a random central element"
    )))
}

fn check_projection(p: &CMat, tol: &Tol) -> Result<()> {
    let d = p.projection_defect();
    if d > tol.bound(p.norm()) * 10.0 {
        return Err(Error::NotProjection(d));
    }
    Ok(())
}

/// Rank of `p` in each irreducible representation, ordered like [`block_structure`].
pub fn block_ranks(alg: &CStarAlg, p: &CMat, tol: &Tol) -> Result<Vec<usize>> {
    let bs = block_structure(alg, tol)?;
    block_ranks_in(&bs, alg, p, tol)
}

pub fn block_ranks_in(bs: &BlockStructure, alg: &CStarAlg, p: &CMat, tol: &Tol) -> Result<Vec<usize>> {
    check_projection(p, tol)?;
    let r = alg.residual(p);
    if r > tol.bound(p.norm()) * 10.0 {
        return Err(Error::NotInAlgebra(r));
    }
    bs.central_projections
        .iter()
        .zip(&bs.multiplicities)
        .map(|(z, &m)| {
            let value = (z * p).trace().re / m.max(1) as f64;
            let rounded = value.round();
            if (value - rounded).abs() > 1e-3 {
                Err(Error::NonIntegralRank { value })
            } else {
                Ok(rounded.max(0.0) as usize)
            }
        })
        .collect()
}

/// Murray–von Neumann equivalence of `p` and `q` in `alg`, with a partial
/// isometry witness `v` (`v*v = p`, `vv* = q`) when they are equivalent.
pub fn mvn_equivalent(alg: &CStarAlg, p: &CMat, q: &CMat, tol: &Tol) -> Result<(bool, Option<CMat>)> {
    let bs = block_structure(alg, tol)?;
    let rp = block_ranks_in(&bs, alg, p, tol)?;
    let rq = block_ranks_in(&bs, alg, q, tol)?;
    if rp != rq {
        return Ok((false, None));
    }
    if p.dist(q) <= tol.bound(p.norm()) {
        return Ok((true, Some(p.clone())));
    }
    for attempt in 0..16u64 {
        let mut rng = tol.rng(0x3317 + attempt);
        let y = alg.random_element(&mut rng);
        let v = polar_partial_isometry(&(&(q * &y) * p), tol);
        let ok_p = (&v.adjoint() * &v).dist(p);
        let ok_q = (&v * &v.adjoint()).dist(q);
        if ok_p <= tol.bound(p.norm()) * 10.0 && ok_q <= tol.bound(q.norm()) * 10.0 {
            return Ok((true, Some(v.phase_normalized(1e-6))));
        }
    }
    Err(Error::Degenerate("equal block ranks but no partial isometry found".into()))
}

/// Checks that `f` is a unital *-isomorphism of `dom` onto `cod`.
pub fn verify_star_iso(dom: &CStarAlg, cod: &CStarAlg, f: &LinMap, tol: &Tol) -> CheckReport {
    let mut rep = CheckReport::new();
    let b = dom.basis();
    let imgs = f.apply_many(b);
    let scale = imgs.iter().fold(1.0, |m: f64, x| m.max(x.norm()));
    let mut mult = 0.0f64;
    for (x, fx) in b.iter().zip(&imgs) {
        let xy: Vec<CMat> = b.iter().map(|y| x * y).collect();
        for (fxy, fy) in f.apply_many(&xy).iter().zip(&imgs) {
            mult = mult.max(fxy.dist(&(fx * fy)));
        }
    }
    rep.add("multiplicative", "f(xy) = f(x) f(y)", mult, tol.bound(scale * scale));
    let star = b
        .iter()
        .zip(&imgs)
        .fold(0.0f64, |m, (x, fx)| m.max(f.apply(&x.adjoint()).dist(&fx.adjoint())));
    rep.add("star", "f(x*) = f(x)*", star, tol.bound(scale));
    rep.add("unital", "f(1) = 1", f.apply(dom.unit()).dist(cod.unit()), tol.bound(scale));
    let into = imgs.iter().fold(0.0f64, |m, y| m.max(cod.residual(y)));
    rep.add("into", "f(x) lies in the target algebra", into, tol.bound(scale));
    let rank = rank_tol(&CMat::from_matrix(f.matrix_in(cod.space())), tol);
    rep.push(Check::count("injective", "rank f = dim source", rank, dom.dim()));
    rep.push(Check::count("surjective", "dim source = dim target", dom.dim(), cod.dim()));
    rep
}

/// Checks that `f` is a *-automorphism of `alg`.
pub fn check_automorphism(alg: &CStarAlg, f: &LinMap, tol: &Tol) -> CheckReport {
    verify_star_iso(alg, alg, f, tol)
}

/// Builds the linear map determined by `gens[i] ↦ images[i]` on `dom` and
/// verifies it is a *-isomorphism onto `cod`.
pub fn star_iso_from_generators(
    dom: &CStarAlg,
    cod: &CStarAlg,
    gens: &[CMat],
    images: &[CMat],
    tol: &Tol,
) -> (LinMap, CheckReport) {
    let (f, consistency) = LinMap::from_generators(gens, images, tol);
    let scale = images.iter().fold(1.0, |m: f64, x| m.max(x.norm()));
    let mut rep = CheckReport::new();
    rep.add(
        "well_defined",
        "linear relations among generators hold among images",
        consistency,
        tol.bound(scale) * 10.0,
    );
    rep.add(
        "generators_span",
        "generators span the source algebra",
        f.domain().containment_residual(dom.space()),
        tol.bound(1.0),
    );
    rep.merge("", verify_star_iso(dom, cod, &f, tol));
    (f, rep)
}

/// `c · 1` as an element of `alg`.
pub fn scalar(alg: &CStarAlg, s: f64) -> CMat {
    alg.unit().scale(C64::new(s, 0.0))
}

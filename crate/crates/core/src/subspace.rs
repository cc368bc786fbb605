//! Subspaces of a matrix space and linear maps defined on them.
//!
//! A [`Subspace`] holds a basis orthonormal for the normalized trace inner
//! product `<x, y> = tr(x* y) / rows`. A [`LinMap`] stores the images of that
//! basis, so applying it is a coordinate projection followed by a combination.

use nalgebra::{DMatrix, DVector};

use crate::matkernel::{null_space, zadmul, zmul, CMat, Tol, C64, ONE, ZERO};

#[derive(Debug, Clone)]
pub struct Subspace {
    rows: usize,
    cols: usize,
    basis: Vec<CMat>,
    // vec(b_k) / sqrt(rows): Frobenius-orthonormal columns
    q: DMatrix<C64>,
}

fn vec_of(m: &CMat) -> DVector<C64> {
    DVector::from_column_slice(m.as_matrix().as_slice())
}

fn unvec(v: &DVector<C64>, rows: usize, cols: usize) -> CMat {
    CMat::from_matrix(DMatrix::from_column_slice(rows, cols, v.as_slice()))
}

impl Subspace {
    pub fn empty(rows: usize, cols: usize) -> Self {
        Subspace {
            rows,
            cols,
            basis: Vec::new(),
            q: DMatrix::zeros(rows * cols, 0),
        }
    }

    /// Orthonormal basis of `span(gens)`; dependent generators are dropped.
    pub fn span(rows: usize, cols: usize, gens: &[CMat], tol: &Tol) -> Self {
        Self::span_tracked(rows, cols, gens, tol).0
    }

    /// Like [`Subspace::span`] but also returns, for every basis element, its
    /// coefficients with respect to the generators.
    pub fn span_tracked(rows: usize, cols: usize, gens: &[CMat], tol: &Tol) -> (Self, Vec<DVector<C64>>) {
        const BLOCK: usize = 32;
        let scale = gens.iter().fold(0.0f64, |m, g| m.max(g.norm()));
        let thr = tol.threshold(scale);
        let mut s = Subspace::empty(rows, cols);
        let ng = gens.len();
        // column k: coefficients of q_k in terms of vec(gens)
        let mut tq = DMatrix::<C64>::zeros(ng, 0);
        for start in (0..ng).step_by(BLOCK) {
            let chunk = &gens[start..(start + BLOCK).min(ng)];
            for g in chunk {
                assert_eq!((g.rows(), g.cols()), (rows, cols), "generator shape");
            }
            let mut r = s.stack(chunk);
            let mut t = DMatrix::<C64>::zeros(ng, chunk.len());
            for j in 0..chunk.len() {
                t[(start + j, j)] = ONE;
            }
            // block projection against the accepted basis, done twice (CGS2)
            for _ in 0..2 {
                if s.q.ncols() == 0 {
                    break;
                }
                let cc = zadmul(&s.q, &r);
                r -= zmul(&s.q, &cc);
                t -= zmul(&tq, &cc);
            }
            // sequential MGS inside the block against columns accepted from it
            let mut fresh: Vec<(DVector<C64>, DVector<C64>)> = Vec::new();
            for j in 0..chunk.len() {
                let mut rj: DVector<C64> = r.column(j).into_owned();
                let mut tj: DVector<C64> = t.column(j).into_owned();
                for _ in 0..2 {
                    for (qv, qt) in &fresh {
                        let cj = qv.dotc(&rj);
                        rj.axpy(-cj, qv, ONE);
                        tj.axpy(-cj, qt, ONE);
                    }
                }
                let n = rj.norm();
                if n > thr {
                    fresh.push((rj / c(n), tj / c(n)));
                }
            }
            if !fresh.is_empty() {
                let k = s.q.ncols();
                let add = fresh.len();
                let q = std::mem::replace(&mut s.q, DMatrix::zeros(0, 0));
                let mut q = q.resize_horizontally(k + add, ZERO);
                let mut tqn = std::mem::replace(&mut tq, DMatrix::zeros(0, 0)).resize_horizontally(k + add, ZERO);
                let sr = c((rows as f64).sqrt());
                for (i, (qv, qt)) in fresh.into_iter().enumerate() {
                    q.set_column(k + i, &qv);
                    tqn.set_column(k + i, &qt);
                    s.basis.push(unvec(&(qv * sr), rows, cols));
                }
                s.q = q;
                tq = tqn;
            }
        }
        // coefficients of b_k = sqrt(rows) q_k
        let sr = c((rows as f64).sqrt());
        let coeffs = tq.column_iter().map(|col| col.into_owned() * sr).collect();
        (s, coeffs)
    }

    /// Wraps an already orthonormal family without re-orthogonalizing.
    pub fn from_orthonormal(rows: usize, cols: usize, basis: Vec<CMat>) -> Self {
        let mut s = Subspace::empty(rows, cols);
        let sr = (rows as f64).sqrt();
        for b in basis {
            let v = vec_of(&b) / c(sr);
            s.append_unit_column(v);
        }
        s
    }

    fn append_unit_column(&mut self, v: DVector<C64>) {
        let k = self.q.ncols();
        let q = std::mem::replace(&mut self.q, DMatrix::zeros(0, 0));
        let mut q = q.insert_column(k, ZERO);
        q.set_column(k, &v);
        self.q = q;
        let sr = (self.rows as f64).sqrt();
        self.basis.push(unvec(&(v * c(sr)), self.rows, self.cols));
    }

    /// Adds `m` if it is independent of the current span; returns whether it was added.
    pub fn try_push(&mut self, m: &CMat, tol: &Tol) -> bool {
        let mut r = vec_of(m);
        let scale = r.norm();
        for _ in 0..2 {
            if self.q.ncols() == 0 {
                break;
            }
            let cc = self.q.ad_mul(&r);
            r -= &self.q * cc;
        }
        let n = r.norm();
        if n > tol.threshold(scale) && n > tol.abs_eps {
            self.append_unit_column(r / c(n));
            true
        } else {
            false
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[CMat] {
        &self.basis
    }

    /// Coordinates `<b_k, m>` in the orthonormal basis.
    pub fn coords(&self, m: &CMat) -> DVector<C64> {
        self.q.ad_mul(&vec_of(m)) / c((self.rows as f64).sqrt())
    }

    pub fn combine(&self, coeffs: &DVector<C64>) -> CMat {
        let v = &self.q * coeffs * c((self.rows as f64).sqrt());
        unvec(&v, self.rows, self.cols)
    }

    pub fn project(&self, m: &CMat) -> CMat {
        if self.dim() == 0 {
            return CMat::zeros(self.rows, self.cols);
        }
        let v = vec_of(m);
        let p = &self.q * self.q.ad_mul(&v);
        unvec(&p, self.rows, self.cols)
    }

    /// `vec(ms[j])` as columns.
    fn stack(&self, ms: &[CMat]) -> DMatrix<C64> {
        let n = self.rows * self.cols;
        let mut v = DMatrix::zeros(n, ms.len());
        for (j, m) in ms.iter().enumerate() {
            v.column_mut(j).copy_from_slice(m.as_matrix().as_slice());
        }
        v
    }

    /// Coordinates of every `ms[j]`, as the columns of one matrix.
    pub fn coords_many(&self, ms: &[CMat]) -> DMatrix<C64> {
        zadmul(&self.q, &self.stack(ms)) / c((self.rows as f64).sqrt())
    }

    /// [`Subspace::residual`] for a batch, sharing the projection products.
    pub fn residuals(&self, ms: &[CMat]) -> Vec<f64> {
        let v = self.stack(ms);
        if self.dim() == 0 {
            return v.column_iter().map(|c| c.norm()).collect();
        }
        let r = &v - zmul(&self.q, &zadmul(&self.q, &v));
        r.column_iter().map(|c| c.norm()).collect()
    }

    /// Frobenius distance from `m` to the subspace.
    pub fn residual(&self, m: &CMat) -> f64 {
        self.project(m).dist(m)
    }

    pub fn contains(&self, m: &CMat, tol: &Tol) -> bool {
        self.residual(m) <= tol.bound(m.norm())
    }

    /// Largest distance of any basis element of `other` from `self`.
    pub fn containment_residual(&self, other: &Subspace) -> f64 {
        other.basis.iter().fold(0.0, |m, b| m.max(self.residual(b)))
    }

    /// A seeded random element of the subspace.
    pub fn random_element(&self, rng: &mut impl rand::Rng) -> CMat {
        let cs = DVector::from_fn(self.dim(), |_, _| crate::matkernel::random_scalar(rng));
        self.combine(&cs)
    }
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Linear map from a [`Subspace`] into a matrix space of fixed shape.
#[derive(Debug, Clone)]
pub struct LinMap {
    domain: Subspace,
    images: Vec<CMat>,
    out_rows: usize,
    out_cols: usize,
    // vec(image_k) as columns
    stacked: DMatrix<C64>,
}

impl LinMap {
    /// `images[k]` is the image of `domain.basis()[k]`.
    pub fn from_basis_images(domain: Subspace, images: Vec<CMat>, out_rows: usize, out_cols: usize) -> Self {
        assert_eq!(domain.dim(), images.len(), "one image per basis element");
        let cols: Vec<DVector<C64>> = images.iter().map(vec_of).collect();
        let stacked = if cols.is_empty() {
            DMatrix::zeros(out_rows * out_cols, 0)
        } else {
            DMatrix::from_columns(&cols)
        };
        LinMap {
            domain,
            images,
            out_rows,
            out_cols,
            stacked,
        }
    }

    pub fn from_fn(domain: &Subspace, f: impl Fn(&CMat) -> CMat) -> Self {
        let images: Vec<CMat> = domain.basis().iter().map(&f).collect();
        let (r, cc) = images
            .first()
            .map(|m| (m.rows(), m.cols()))
            .unwrap_or((domain.rows(), domain.cols()));
        Self::from_basis_images(domain.clone(), images, r, cc)
    }

    /// The linear map on `span(gens)` sending `gens[j]` to `images[j]`.
    ///
    /// Returns the map together with the consistency residual
    /// `max_j |f(gens[j]) - images[j]|`, which is nonzero exactly when the
    /// assignment is not well defined.
    pub fn from_generators(gens: &[CMat], images: &[CMat], tol: &Tol) -> (Self, f64) {
        assert_eq!(gens.len(), images.len());
        assert!(!gens.is_empty(), "at least one generator");
        let (rows, cols) = (gens[0].rows(), gens[0].cols());
        let (domain, coeffs) = Subspace::span_tracked(rows, cols, gens, tol);
        Self::from_tracked(domain, &coeffs, gens, images)
    }

    /// [`LinMap::from_generators`] for a span already computed by
    /// [`Subspace::span_tracked`]; lets several maps share one span.
    pub fn from_tracked(domain: Subspace, coeffs: &[DVector<C64>], gens: &[CMat], images: &[CMat]) -> (Self, f64) {
        assert_eq!(gens.len(), images.len());
        let (out_rows, out_cols) = (images[0].rows(), images[0].cols());
        let mut t = DMatrix::zeros(gens.len(), coeffs.len());
        for (k, ck) in coeffs.iter().enumerate() {
            t.set_column(k, ck);
        }
        let stacked_imgs = Subspace::empty(out_rows, out_cols).stack(images);
        let out = zmul(&stacked_imgs, &t);
        let basis_images = out
            .column_iter()
            .map(|col| CMat::from_matrix(DMatrix::from_column_slice(out_rows, out_cols, col.as_slice())))
            .collect();
        let map = Self::from_basis_images(domain, basis_images, out_rows, out_cols);
        let residual = map
            .apply_many(gens)
            .iter()
            .zip(images)
            .fold(0.0f64, |m, (fg, im)| m.max(fg.dist(im)));
        (map, residual)
    }

    pub fn domain(&self) -> &Subspace {
        &self.domain
    }

    pub fn images(&self) -> &[CMat] {
        &self.images
    }

    pub fn out_shape(&self) -> (usize, usize) {
        (self.out_rows, self.out_cols)
    }

    /// Applies the map to the projection of `m` onto the domain.
    pub fn apply(&self, m: &CMat) -> CMat {
        self.apply_coords(&self.domain.coords(m))
    }

    /// `apply` for a batch of inputs.
    pub fn apply_many(&self, ms: &[CMat]) -> Vec<CMat> {
        if self.images.is_empty() {
            return ms.iter().map(|_| CMat::zeros(self.out_rows, self.out_cols)).collect();
        }
        let out = zmul(&self.stacked, &self.domain.coords_many(ms));
        out.column_iter()
            .map(|col| CMat::from_matrix(DMatrix::from_column_slice(self.out_rows, self.out_cols, col.as_slice())))
            .collect()
    }

    pub fn apply_coords(&self, coords: &DVector<C64>) -> CMat {
        if self.images.is_empty() {
            return CMat::zeros(self.out_rows, self.out_cols);
        }
        let v = &self.stacked * coords;
        unvec(&v, self.out_rows, self.out_cols)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &LinMap) -> LinMap {
        let images = inner.images.iter().map(|m| self.apply(m)).collect();
        LinMap::from_basis_images(inner.domain.clone(), images, self.out_rows, self.out_cols)
    }

    /// Matrix of the map with respect to the domain basis and `codomain` basis.
    pub fn matrix_in(&self, codomain: &Subspace) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(codomain.dim(), self.domain.dim());
        for (k, im) in self.images.iter().enumerate() {
            m.set_column(k, &codomain.coords(im));
        }
        m
    }

    /// Largest distance of an image from `codomain`.
    pub fn range_residual(&self, codomain: &Subspace) -> f64 {
        self.images.iter().fold(0.0, |m, im| m.max(codomain.residual(im)))
    }

    /// `{x : f(x) = lambda x}` for a map of the domain into itself.
    pub fn eigenspace(&self, lambda: C64, tol: &Tol) -> Subspace {
        let d = self.domain.dim();
        let m = self.matrix_in(&self.domain) - DMatrix::<C64>::identity(d, d) * lambda;
        self.subspace_from_null(&m, tol)
    }

    pub fn kernel(&self, tol: &Tol) -> Subspace {
        let codomain = Subspace::span(self.out_rows, self.out_cols, &self.images, tol);
        let m = self.matrix_in(&codomain);
        self.subspace_from_null(&m, tol)
    }

    pub fn image(&self, tol: &Tol) -> Subspace {
        Subspace::span(self.out_rows, self.out_cols, &self.images, tol)
    }

    fn subspace_from_null(&self, m: &DMatrix<C64>, tol: &Tol) -> Subspace {
        let ns = null_space(m, tol);
        let elems: Vec<CMat> = (0..ns.ncols())
            .map(|k| self.domain.combine(&ns.column(k).into_owned()))
            .collect();
        Subspace::span(self.domain.rows(), self.domain.cols(), &elems, tol)
    }

    /// Largest `|f(b) - g(b)|` over the domain basis of `self`.
    pub fn distance_on_basis(&self, other: &LinMap) -> f64 {
        self.domain
            .basis()
            .iter()
            .zip(&self.images)
            .fold(0.0, |m, (b, im)| m.max(other.apply(b).dist(im)))
    }
}

//! Dense complex matrices and the spectral primitives the rest of the crate
//! is built on.
//!
//! Every algebra, module and map in this crate is ultimately a collection of
//! [`CMat`] values living in some ambient `M_n(C)`. Comparisons are always
//! made against a [`Tol`], never with exact equality.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Tolerances and sampling parameters shared by every numerical check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tol {
    pub abs_eps: f64,
    pub rel_eps: f64,
    pub sample_count: usize,
    pub rng_seed: u64,
}

impl Default for Tol {
    fn default() -> Self {
        Tol {
            abs_eps: 1e-9,
            rel_eps: 1e-9,
            sample_count: 64,
            rng_seed: 0x5eed,
        }
    }
}

impl Tol {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.abs_eps = eps;
        self.rel_eps = eps;
        self
    }

    /// Acceptance bound for a residual measured against quantities of size `scale`.
    pub fn bound(&self, scale: f64) -> f64 {
        self.abs_eps + self.rel_eps * scale
    }

    /// Cut-off for singular values / eigenvalues when deciding rank or support.
    pub fn threshold(&self, largest: f64) -> f64 {
        (self.abs_eps * largest).max(self.abs_eps)
    }

    /// A deterministic generator; `salt` separates independent random streams.
    pub fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.rng_seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
    }
}

/// Dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMat(DMatrix<C64>);

impl fmt::Debug for CMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CMat{}x{}[", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols() {
                let z = self.0[(i, j)];
                if j > 0 {
                    write!(f, ", ")?;
                }
                if z.im.abs() < 1e-12 {
                    write!(f, "{:.4}", z.re)?;
                } else {
                    write!(f, "{:.4}{:+.4}i", z.re, z.im)?;
                }
            }
        }
        write!(f, "]")
    }
}

impl CMat {
    pub fn from_matrix(m: DMatrix<C64>) -> Self {
        CMat(m)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        CMat(DMatrix::identity(n, n))
    }

    /// The matrix unit `e_ij` in `M_n` (zero-based indices).
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = DMatrix::zeros(n, n);
        m[(i, j)] = ONE;
        CMat(m)
    }

    pub fn diag(entries: &[C64]) -> Self {
        CMat(DMatrix::from_diagonal(&DVector::from_column_slice(entries)))
    }

    pub fn diag_re(entries: &[f64]) -> Self {
        let v: Vec<C64> = entries.iter().map(|&x| c(x, 0.0)).collect();
        Self::diag(&v)
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        CMat(DMatrix::from_fn(rows, cols, f))
    }

    /// Builds a matrix from real row slices.
    pub fn from_re_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let cols = rows.first().map_or(0, |row| row.len());
        CMat(DMatrix::from_fn(r, cols, |i, j| c(rows[i][j], 0.0)))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn adjoint(&self) -> CMat {
        CMat(self.0.adjoint())
    }

    pub fn transpose(&self) -> CMat {
        CMat(self.0.transpose())
    }

    pub fn conj(&self) -> CMat {
        CMat(self.0.map(|z| z.conj()))
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// `tr(m) / n`.
    pub fn normalized_trace(&self) -> C64 {
        self.trace() / self.rows() as f64
    }

    pub fn scale(&self, s: C64) -> CMat {
        CMat(&self.0 * s)
    }

    pub fn scale_re(&self, s: f64) -> CMat {
        self.scale(c(s, 0.0))
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// Largest singular value.
    pub fn op_norm(&self) -> f64 {
        if self.0.is_empty() {
            return 0.0;
        }
        singular_values(&self.0).into_iter().fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Normalized trace inner product `tr(self* other) / rows`.
    pub fn inner(&self, other: &CMat) -> C64 {
        self.0.dotc(&other.0) / self.rows().max(1) as f64
    }

    /// Norm induced by [`CMat::inner`].
    pub fn tnorm(&self) -> f64 {
        self.norm() / (self.rows().max(1) as f64).sqrt()
    }

    pub fn dist(&self, other: &CMat) -> f64 {
        (&self.0 - &other.0).norm()
    }

    pub fn commutator(&self, other: &CMat) -> CMat {
        CMat(&self.0 * &other.0 - &other.0 * &self.0)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn hermitian_defect(&self) -> f64 {
        (&self.0 - self.0.adjoint()).norm()
    }

    /// `max(|p* - p|, |p^2 - p|)`.
    pub fn projection_defect(&self) -> f64 {
        let sq = &self.0 * &self.0;
        self.hermitian_defect().max((sq - &self.0).norm())
    }

    /// `max(|u*u - 1|, |uu* - 1|)` against the identity of the ambient.
    pub fn unitary_defect(&self) -> f64 {
        let n = self.rows();
        let id = DMatrix::<C64>::identity(n, n);
        let a = (self.0.adjoint() * &self.0 - &id).norm();
        let b = (&self.0 * self.0.adjoint() - &id).norm();
        a.max(b)
    }

    /// 2x2 block matrix `[[a, b], [c, d]]`.
    pub fn block2(a: &CMat, b: &CMat, cc: &CMat, d: &CMat) -> CMat {
        let (r1, c1) = (a.rows(), a.cols());
        let (r2, c2) = (d.rows(), d.cols());
        let mut m = DMatrix::zeros(r1 + r2, c1 + c2);
        m.view_mut((0, 0), (r1, c1)).copy_from(&a.0);
        m.view_mut((0, c1), (r1, c2)).copy_from(&b.0);
        m.view_mut((r1, 0), (r2, c1)).copy_from(&cc.0);
        m.view_mut((r1, c1), (r2, c2)).copy_from(&d.0);
        CMat(m)
    }

    pub fn direct_sum(a: &CMat, b: &CMat) -> CMat {
        let z1 = CMat::zeros(a.rows(), b.cols());
        let z2 = CMat::zeros(b.rows(), a.cols());
        CMat::block2(a, &z1, &z2, b)
    }

    /// Extracts the `(rows x cols)` sub-block starting at `(i, j)`.
    pub fn block(&self, i: usize, j: usize, rows: usize, cols: usize) -> CMat {
        CMat(self.0.view((i, j), (rows, cols)).into_owned())
    }

    pub fn kron(&self, other: &CMat) -> CMat {
        CMat(self.0.kronecker(&other.0))
    }

    /// Rotates the global phase so the first entry of modulus above `floor`
    /// (row-major) is real and positive.
    pub fn phase_normalized(&self, floor: f64) -> CMat {
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                let z = self.0[(i, j)];
                if z.norm() > floor {
                    return self.scale(z.conj() / z.norm());
                }
            }
        }
        self.clone()
    }

    /// Uniformly random complex entries in the unit square.
    pub fn random(rows: usize, cols: usize, rng: &mut impl Rng) -> CMat {
        CMat::from_fn(rows, cols, |_, _| random_scalar(rng))
    }
}

pub fn random_scalar(rng: &mut impl Rng) -> C64 {
    c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

impl Add for &CMat {
    type Output = CMat;
    fn add(self, rhs: &CMat) -> CMat {
        CMat(&self.0 + &rhs.0)
    }
}

impl Add for CMat {
    type Output = CMat;
    fn add(self, rhs: CMat) -> CMat {
        CMat(self.0 + rhs.0)
    }
}

impl AddAssign<&CMat> for CMat {
    fn add_assign(&mut self, rhs: &CMat) {
        self.0 += &rhs.0;
    }
}

impl Sub for &CMat {
    type Output = CMat;
    fn sub(self, rhs: &CMat) -> CMat {
        CMat(&self.0 - &rhs.0)
    }
}

impl Sub for CMat {
    type Output = CMat;
    fn sub(self, rhs: CMat) -> CMat {
        CMat(self.0 - rhs.0)
    }
}

/// Complex product through four real gemms: nalgebra only dispatches real
/// scalars to the blocked kernel, and the generic complex loop is several
/// times slower from about 16x16 upward.
pub fn zmul(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    let (m, k, n) = (a.nrows(), a.ncols(), b.ncols());
    assert_eq!(k, b.nrows(), "zmul: inner dimensions differ");
    if m * k * n < 2048 {
        return a * b;
    }
    let (ar, ai) = (a.map(|z| z.re), a.map(|z| z.im));
    let (br, bi) = (b.map(|z| z.re), b.map(|z| z.im));
    let mut re = &ar * &br;
    re.gemm(-1.0, &ai, &bi, 1.0);
    let mut im = &ar * &bi;
    im.gemm(1.0, &ai, &br, 1.0);
    re.zip_map(&im, C64::new)
}

/// `a^H b` via [`zmul`].
pub fn zadmul(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    let (m, k, n) = (a.ncols(), a.nrows(), b.ncols());
    if m * k * n < 2048 {
        return a.ad_mul(b);
    }
    let (ar, ai) = (a.map(|z| z.re).transpose(), a.map(|z| -z.im).transpose());
    let (br, bi) = (b.map(|z| z.re), b.map(|z| z.im));
    let mut re = &ar * &br;
    re.gemm(-1.0, &ai, &bi, 1.0);
    let mut im = &ar * &bi;
    im.gemm(1.0, &ai, &br, 1.0);
    re.zip_map(&im, C64::new)
}

impl Mul for &CMat {
    type Output = CMat;
    fn mul(self, rhs: &CMat) -> CMat {
        CMat(zmul(&self.0, &rhs.0))
    }
}

impl Mul for CMat {
    type Output = CMat;
    fn mul(self, rhs: CMat) -> CMat {
        CMat(zmul(&self.0, &rhs.0))
    }
}

impl Neg for &CMat {
    type Output = CMat;
    fn neg(self) -> CMat {
        CMat(-&self.0)
    }
}

impl Serialize for CMat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.rows())
            .map(|i| {
                (0..self.cols())
                    .map(|j| {
                        let z = self.0[(i, j)];
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CMat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let r = rows.len();
        let cols = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != cols) {
            return Err(D::Error::custom("matrix rows have unequal lengths"));
        }
        let m = CMat::from_fn(r, cols, |i, j| c(rows[i][j][0], rows[i][j][1]));
        if !m.is_finite() {
            return Err(D::Error::custom("matrix entries must be finite"));
        }
        Ok(m)
    }
}

pub fn adjoint(m: &CMat) -> CMat {
    m.adjoint()
}

fn singular_values(m: &DMatrix<C64>) -> Vec<f64> {
    SVD::new(m.clone(), false, false).singular_values.iter().copied().collect()
}

/// Eigen-decomposition of a self-adjoint matrix. Eigenvalues are returned in
/// descending order; the eigenvector matrix has the matching columns.
pub fn hermitian_eig(m: &CMat, tol: &Tol) -> Result<(Vec<f64>, CMat)> {
    let defect = m.hermitian_defect();
    if !m.is_square() || defect > tol.bound(m.norm()) {
        return Err(Error::NotHermitian(defect));
    }
    let h = (&m.0 + m.0.adjoint()) * c(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let n = m.rows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((values, CMat(vectors)))
}

/// Partial isometry `v` of the polar decomposition `m = v (m*m)^{1/2}`.
pub fn polar_partial_isometry(m: &CMat, tol: &Tol) -> CMat {
    if m.0.is_empty() {
        return m.clone();
    }
    let svd = SVD::new(m.0.clone(), true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let thr = tol.threshold(smax);
    let mut out = DMatrix::zeros(m.rows(), m.cols());
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > thr {
            out += u.column(k) * v_t.row(k);
        }
    }
    CMat(out)
}

/// `u^{-1/2}` for a unitary `u`, with the branch cut of the square root
/// placed in the widest gap of the spectrum so equal eigenvalues get equal roots.
pub fn unitary_inv_sqrt(u: &CMat) -> CMat {
    let n = u.rows();
    if n == 0 {
        return u.clone();
    }
    let (q, t) = u.0.clone().schur().unpack();
    let mut args: Vec<f64> = (0..n).map(|k| t[(k, k)].arg()).collect();
    args.sort_by(f64::total_cmp);
    let tau = std::f64::consts::TAU;
    let mut cut = args[0] - tau / 2.0;
    let mut widest = -1.0;
    for k in 0..n {
        let next = if k + 1 < n { args[k + 1] } else { args[0] + tau };
        if next - args[k] > widest {
            widest = next - args[k];
            cut = args[k] + widest / 2.0;
        }
    }
    let d = DMatrix::from_fn(n, n, |i, j| {
        if i != j {
            return ZERO;
        }
        let phi = (t[(i, i)].arg() - cut).rem_euclid(tau);
        C64::from_polar(1.0, -(cut + phi) / 2.0)
    });
    CMat(&q * d * q.adjoint())
}

/// Inverse square root of a positive definite matrix.
pub fn psd_inv_sqrt(m: &CMat, tol: &Tol) -> Result<CMat> {
    let (values, vecs) = hermitian_eig(m, tol)?;
    let largest = values.first().copied().unwrap_or(0.0);
    let smallest = values.last().copied().unwrap_or(0.0);
    if smallest <= tol.threshold(largest.abs()) {
        return Err(Error::NotPositiveDefinite(smallest));
    }
    let d: Vec<C64> = values.iter().map(|&l| c(1.0 / l.sqrt(), 0.0)).collect();
    Ok(&(&vecs * &CMat::diag(&d)) * &vecs.adjoint())
}

/// Number of singular values above the scale-relative threshold.
pub fn rank_tol(m: &CMat, tol: &Tol) -> usize {
    if m.0.is_empty() {
        return 0;
    }
    let sv = singular_values(&m.0);
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let thr = tol.threshold(smax);
    sv.iter().filter(|&&s| s > thr).count()
}

/// Orthonormal basis (as columns) of the kernel of `m`.
pub fn null_space(m: &DMatrix<C64>, tol: &Tol) -> DMatrix<C64> {
    let (r, cols) = m.shape();
    if cols == 0 {
        return DMatrix::zeros(0, 0);
    }
    if r == 0 {
        return DMatrix::identity(cols, cols);
    }
    let square = if r > cols {
        m.clone().qr().r()
    } else if r < cols {
        let mut padded = DMatrix::zeros(cols, cols);
        padded.view_mut((0, 0), (r, cols)).copy_from(m);
        padded
    } else {
        m.clone()
    };
    let svd = SVD::new(square, false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let thr = tol.threshold(smax);
    let kernel: Vec<DVector<C64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= thr)
        .map(|(k, _)| v_t.row(k).adjoint())
        .collect();
    if kernel.is_empty() {
        DMatrix::zeros(cols, 0)
    } else {
        DMatrix::from_columns(&kernel)
    }
}

/// Least-squares solution of `m x = b` together with the residual `|m x - b|`.
pub fn solve_least_squares(m: &DMatrix<C64>, b: &DVector<C64>, tol: &Tol) -> (DVector<C64>, f64) {
    if m.ncols() == 0 {
        return (DVector::zeros(0), b.norm());
    }
    let svd = SVD::new(m.clone(), true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let x = svd
        .solve(b, tol.threshold(smax))
        .unwrap_or_else(|_| DVector::zeros(m.ncols()));
    let res = (m * &x - b).norm();
    (x, res)
}

/// Random unitary from the QR factorization of a random complex matrix.
pub fn random_unitary(n: usize, rng: &mut impl Rng) -> CMat {
    let g = CMat::random(n, n, rng);
    let qr = g.0.qr();
    let q = qr.q();
    let r = qr.r();
    // fix the phases so the distribution does not depend on QR sign conventions
    let d: Vec<C64> = (0..n)
        .map(|k| {
            let z = r[(k, k)];
            if z.norm() > 0.0 {
                z / z.norm()
            } else {
                ONE
            }
        })
        .collect();
    CMat(q) * CMat::diag(&d)
}

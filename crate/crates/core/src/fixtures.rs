//! The shipped inclusions and dynamical systems.
//!
//! * `A`: `C·1 ⊂ C^2` (diagonal in `M_2`) with the coordinate swap.
//! * `B`: `D_2 ⊂ M_2`, `E = (id + Ad diag(1,-1)) / 2`.
//! * `C`: `C ⊕ M_2 ⊂ M_3` by block compression — index 2 but not a crossed product.
//! * `D(seed)`: `M_4^{Ad w} ⊂ M_4` for a random self-adjoint unitary `w`.
//! * `E`: the 2Z-inner system `(M_2, Ad diag(1,i), diag(1,-1))`.
//! * `C^3` control: a central but non-scalar index `diag(2,2,1)`.

use rand::Rng;

use crate::cstar::{generate_algebra, CStarAlg};
use crate::dynamics::TwoZInnerSystem;
use crate::error::{Error, Result};
use crate::inclusion::{
    expectation_from_block_compression, expectation_from_involutive_automorphism, make_inclusion_pair, AutSpec,
    CondExp, InclusionPair,
};
use crate::matkernel::{random_unitary, CMat, Tol, I, ONE};
use crate::subspace::LinMap;

pub const NAMES: [&str; 6] = ["A", "B", "C", "D", "E", "C3"];

pub fn full_matrix_algebra(n: usize, tol: &Tol) -> CStarAlg {
    let gens: Vec<CMat> = (0..n.saturating_sub(1)).map(|i| CMat::unit(n, i, i + 1)).collect();
    generate_algebra(n, &gens, tol)
}

pub fn diagonal_algebra(n: usize, tol: &Tol) -> CStarAlg {
    let gens: Vec<CMat> = (0..n).map(|i| CMat::unit(n, i, i)).collect();
    generate_algebra(n, &gens, tol)
}

fn pair_from(b: &CStarAlg, a: &CStarAlg, e: CondExp, tol: &Tol) -> Result<InclusionPair> {
    make_inclusion_pair(b, a, &e, tol)
}

/// `C·1 ⊂ C^2` with the swap `(x, y) ↦ (y, x)` given as an explicit map.
pub fn fix_a(tol: &Tol) -> Result<InclusionPair> {
    let b = diagonal_algebra(2, tol);
    let a = generate_algebra(2, &[], tol);
    let swap = LinMap::from_fn(b.space(), |x| CMat::diag(&[x.get(1, 1), x.get(0, 0)]));
    let e = expectation_from_involutive_automorphism(&b, &AutSpec::Map(swap), tol)?;
    pair_from(&b, &a, e, tol)
}

/// `D_2 ⊂ M_2` with `w = diag(1, -1)`.
pub fn fix_b(tol: &Tol) -> Result<InclusionPair> {
    let b = full_matrix_algebra(2, tol);
    let a = diagonal_algebra(2, tol);
    let e = expectation_from_involutive_automorphism(&b, &AutSpec::Inner(CMat::diag_re(&[1.0, -1.0])), tol)?;
    pair_from(&b, &a, e, tol)
}

pub fn fix_c_projections() -> [CMat; 2] {
    [CMat::unit(3, 0, 0), CMat::diag_re(&[0.0, 1.0, 1.0])]
}

/// `C ⊕ M_2 ⊂ M_3`, `E(b) = p b p + p' b p'` with `p = e_11`.
pub fn fix_c(tol: &Tol) -> Result<InclusionPair> {
    let b = full_matrix_algebra(3, tol);
    let a = generate_algebra(3, &[CMat::unit(3, 0, 0), CMat::unit(3, 1, 2)], tol);
    let e = expectation_from_block_compression(&b, &fix_c_projections(), tol)?;
    pair_from(&b, &a, e, tol)
}

/// The self-adjoint unitary `w = V diag(±1) V*` of FIX-D and its +1 rank.
pub fn fix_d_unitary(seed: u64) -> (CMat, usize) {
    let mut rng = Tol::default().with_seed(seed).rng(0xd);
    let r = rng.gen_range(1..=3usize);
    let v = random_unitary(4, &mut rng);
    let signs: Vec<f64> = (0..4).map(|i| if i < r { 1.0 } else { -1.0 }).collect();
    (&(&v * &CMat::diag_re(&signs)) * &v.adjoint(), r)
}

/// `M_4^{Ad w} ⊂ M_4` for the seeded `w` of [`fix_d_unitary`].
pub fn fix_d(seed: u64, tol: &Tol) -> Result<InclusionPair> {
    let (w, _) = fix_d_unitary(seed);
    let b = full_matrix_algebra(4, tol);
    let e = expectation_from_involutive_automorphism(&b, &AutSpec::Inner(w), tol)?;
    let a = e.target.clone();
    pair_from(&b, &a, e, tol)
}

/// `(M_2, Ad diag(1, i), diag(1, -1))`.
pub fn fix_e(tol: &Tol) -> TwoZInnerSystem {
    let a = full_matrix_algebra(2, tol);
    TwoZInnerSystem::inner(a, &CMat::diag(&[ONE, I]), CMat::diag_re(&[1.0, -1.0]))
}

/// `C^3` with the swap of the first two coordinates: `(B, A, E)` whose index
/// is `diag(2, 2, 1)`, so no inclusion pair can be formed.
pub fn c3_control(tol: &Tol) -> Result<(CStarAlg, CStarAlg, CondExp)> {
    let b = diagonal_algebra(3, tol);
    let perm = CMat::from_re_rows(&[&[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0]]);
    let e = expectation_from_involutive_automorphism(&b, &AutSpec::Inner(perm), tol)?;
    let a = generate_algebra(3, &[CMat::diag_re(&[1.0, 1.0, 0.0])], tol);
    Ok((b, a, e))
}

/// Inclusion pair of a named fixture; `E` is realized by its restricted crossed model.
pub fn by_name(name: &str, seed: u64, tol: &Tol) -> Result<InclusionPair> {
    match name {
        "A" => fix_a(tol),
        "B" => fix_b(tol),
        "C" => fix_c(tol),
        "D" => fix_d(seed, tol),
        "E" => crate::dynamics::restricted_crossed_model(&fix_e(tol), tol).map(|r| r.pair),
        "C3" => {
            let (b, a, e) = c3_control(tol)?;
            make_inclusion_pair(&b, &a, &e, tol)
        }
        other => Err(Error::Degenerate(format!("unknown fixture {other:?}"))),
    }
}

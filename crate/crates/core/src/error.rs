use thiserror::Error;

use crate::matkernel::CMat;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is not hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not positive definite (smallest eigenvalue {0:.3e})")]
    NotPositiveDefinite(f64),
    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: String, found: String },
    #[error("algebra is not contained in the enclosing algebra (residual {0:.3e})")]
    NotSubalgebra(f64),
    #[error("element is not a projection (residual {0:.3e})")]
    NotProjection(f64),
    #[error("block rank {value} is not an integer within tolerance")]
    NonIntegralRank { value: f64 },
    #[error("element is not in the algebra (residual {0:.3e})")]
    NotInAlgebra(f64),
    #[error("map is not involutive (residual {0:.3e})")]
    NotInvolutive(f64),
    #[error("map is not a *-automorphism: {0}")]
    NotAutomorphism(String),
    #[error("projections do not form a partition of the unit: {0}")]
    NotPartition(String),
    #[error("frame operator is singular: no finite quasi-basis")]
    IndexInfinite,
    #[error("index is not central in B (residual {0:.3e})")]
    IndexNotCentral(f64),
    #[error("index is not the scalar 2")]
    IndexNotTwo(CMat),
    #[error("2E - id is not an order-two automorphism with fixed algebra A: {0}")]
    BetaNotAutomorphism(String),
    #[error("expectation failed validation: {0}")]
    InvalidExpectation(String),
    #[error("expectation target does not match the given subalgebra (residual {0:.3e})")]
    TargetMismatch(f64),
    #[error("q = [E(x_i* x_j)] is not a projection (residual {0:.3e})")]
    QNotProjection(f64),
    #[error("isomorphism residual {0:.3e} exceeds tolerance")]
    IsoResidualExceeded(f64),
    #[error("(A, alpha, z) is not a 2Z-inner system: {0}")]
    NotTwoZInner(String),
    #[error("trace does not scalarize the module faithfully")]
    TraceNotFaithful,
    #[error("{what}: residual {residual:.3e} exceeds tolerance")]
    ResidualExceeded { what: String, residual: f64 },
    #[error("spectral separation failed: {0}")]
    Degenerate(String),
}

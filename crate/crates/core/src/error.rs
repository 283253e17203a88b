use crate::represent::RepresentabilityVerdict;

/// Errors produced by the library. Numerical near-misses (a residual slightly
/// over a tolerance) are reported as data in the result types; `Error` is
/// reserved for inputs that make the requested computation meaningless.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("family is numerically zero")]
    DegenerateFamily,

    #[error("operator is numerically singular: smallest singular value {smallest:.3e} below rank threshold {threshold:.3e}")]
    SingularOperator { smallest: f64, threshold: f64 },

    #[error("factorization defect {defect:.3e} exceeds the backward-error budget {allowed:.3e} even after the fallback path")]
    FactorizationFailure { defect: f64, allowed: f64 },

    #[error("matrix is not a frame operator: {0}")]
    NotAFrameOperator(String),

    #[error("proposed family is not a dual: duality residual {residual:.3e} exceeds {allowed:.3e}")]
    NotADual { residual: f64, allowed: f64 },

    #[error("eigenvalue {index} has modulus {modulus} but strict contractivity |lambda| < 1 is required")]
    ModulusOutOfRange { index: usize, modulus: f64 },

    #[error("alpha must be > 1, got {0}")]
    InvalidAlpha(f64),

    #[error("certified tail is unreachable: spectral radius {rho} is not < 1")]
    TailBoundUnreachable { rho: f64 },

    #[error("family of length {len} is too short: the construction needs at least {required} vectors")]
    InsufficientTruncation { len: usize, required: usize },

    #[error("rank/null chains did not stabilize within {max_k} powers")]
    NoStabilization {
        max_k: usize,
        image_ranks: Vec<usize>,
        null_dims: Vec<usize>,
    },

    #[error("swap span condition failed: remaining vectors span a subspace of dimension {span_dim} < {dim}, non-representability is not certified")]
    SpanConditionFailed {
        span_dim: usize,
        dim: usize,
        verdict: Box<RepresentabilityVerdict>,
    },

    #[error("vector lies outside the invariant subspace: component of norm {residual:.3e} exceeds {allowed:.3e}")]
    NotInSubspace { residual: f64, allowed: f64 },

    #[error("restriction is not a strict contraction: compressed norm {mu} is not < 1")]
    InvalidContraction { mu: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParams(String),
}

pub type Result<T> = std::result::Result<T, Error>;

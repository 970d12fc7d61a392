//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by state construction, decompositions, and verification.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix shape mismatch: ({rows_a}x{cols_a}) vs ({rows_b}x{cols_b})")]
    ShapeMismatch {
        rows_a: usize,
        cols_a: usize,
        rows_b: usize,
        cols_b: usize,
    },

    #[error("state is not normalized: norm = {norm}")]
    NotNormalized { norm: f64 },

    #[error("state carries no bipartite factorization tag")]
    MissingBipartiteTag,

    #[error("bipartite tag ({d_a}, {d_b}) incompatible with dimension {dim}")]
    BadBipartiteTag { d_a: usize, d_b: usize, dim: usize },

    #[error("matrix is not Hermitian: asymmetry norm = {deviation}")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not a valid density matrix: {reason}")]
    NotDensityMatrix { reason: String },

    #[error("matrix is not an isometry: deviation = {deviation}")]
    NotIsometry { deviation: f64 },

    #[error("matrix is not unitary: deviation = {deviation}")]
    NotUnitary { deviation: f64 },

    #[error("an isometry must not shrink the space: {rows} rows < {cols} cols")]
    IsometryShape { rows: usize, cols: usize },

    #[error("input vectors are linearly dependent within tolerance")]
    DependentVectors,

    #[error("basis is not orthonormal: max deviation = {deviation}")]
    NotOrthonormal { deviation: f64 },

    #[error("invalid hyperdisk: {reason}")]
    BadHyperdisk { reason: String },

    #[error("states coincide up to a global phase; no unique two-dimensional hyperdisk")]
    DegeneratePair,

    #[error("invalid marginal spec: {reason}")]
    BadMarginalSpec { reason: String },

    #[error("invalid parameter: {reason}")]
    InvalidParameter { reason: String },

    #[error("unknown example id: {0}")]
    UnknownExample(String),

    #[error("precondition violated: {reason}")]
    Precondition { reason: String },

    #[error("empty input: {what}")]
    Empty { what: String },
}

impl Error {
    pub(crate) fn precondition(reason: impl Into<String>) -> Self {
        Error::Precondition {
            reason: reason.into(),
        }
    }

    pub(crate) fn invalid(reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

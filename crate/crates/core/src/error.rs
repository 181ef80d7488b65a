use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} out of range for {len} variates")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument must be non-negative, got {0}")]
    NegativeArgument(f64),

    #[error("block matrix is not symmetric: max asymmetry {asymmetry:e} exceeds {threshold:e}")]
    SymmetryViolation { asymmetry: f64, threshold: f64 },

    #[error("entry ({i}, {j}) is negative: {value}")]
    NegativeEntry { i: usize, j: usize, value: f64 },

    #[error("entry ({i}, {j}) must be strictly positive, got {value}")]
    NonPositiveEntry { i: usize, j: usize, value: f64 },

    #[error("covariance assembly failed: Cholesky factorization failed with jitter up to {jitter:e}")]
    CholeskyFailure { jitter: f64 },

    #[error("no grid pairs at the requested lag")]
    EmptyPairSet,

    #[error("at least {needed} replicates required, got {got}")]
    TooFewReplicates { needed: usize, got: usize },

    #[error("misaligned inputs: {0}")]
    Misaligned(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

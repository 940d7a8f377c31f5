use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {j} out of range {lo}..={hi}")]
    IndexOutOfRange { j: usize, lo: usize, hi: usize },

    #[error("index set has {size} points, above the cap of {cap}")]
    TooLarge { size: usize, cap: usize },

    #[error("matrix is not Hermitian: relative deviation {0:.3e}")]
    NotHermitian(f64),

    #[error("symbol support is not symmetric under negation")]
    NotSymmetric,

    #[error("Lanczos did not converge after {iterations} iterations (worst residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("operator of size {size} is above the dense limit {limit}; use matrix-free evolution instead")]
    DenseLimit { size: usize, limit: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

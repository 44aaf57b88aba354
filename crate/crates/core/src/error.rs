use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("vector entry {index} is not finite")]
    NonFinite { index: usize },

    #[error("empty vector or matrix")]
    Empty,

    #[error("matrix is not unitary: max deviation of M*M from I is {deviation:e}")]
    NotUnitary { deviation: f64 },

    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("l1 norm must be 1, got {0}")]
    NotL1Normalized(f64),

    #[error("enumeration of {supports} supports exceeds budget {budget}; use the lower-bound path")]
    BudgetExceeded { supports: u128, budget: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported distribution: {0}")]
    UnsupportedDistribution(String),

    #[error("no acceptable g found after {attempts} attempts at level {level}")]
    NoGoodSample { level: u32, attempts: u32 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

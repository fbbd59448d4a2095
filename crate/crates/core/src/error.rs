use thiserror::Error;

/// Errors raised by the library. Numerical failures carry the measured
/// quantity so callers can report it.
#[derive(Debug, Error)]
pub enum Error {
    #[error("arithmetic overflow while computing {0}")]
    Overflow(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid structure: {0}")]
    InvalidStructure(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index {index} out of range 0..={max}")]
    OutOfRange { index: usize, max: usize },

    #[error("{p} is not coprime with {q}")]
    NotCoprime { p: i64, q: u64 },

    #[error("incompatible fiber groups")]
    IncompatibleGroups,

    #[error("not a coboundary: max |S^q phi| = {max_sum:e} exceeds {tol:e}")]
    NotCoboundary { max_sum: f64, tol: f64 },

    #[error("solver failed: {0}")]
    SolverFailure(String),

    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

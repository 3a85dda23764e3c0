use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("point {x} lies outside the open state interval ({lo}, {hi})")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error(
        "eigenspace for eigenvalue {eigenvalue} has nullspace dimension {found} at degree {degree}, expected {expected}"
    )]
    Nullspace {
        eigenvalue: f64,
        degree: usize,
        expected: usize,
        found: usize,
    },

    #[error("orthonormality defect {defect:e} exceeds tolerance {tolerance:e}")]
    Orthonormality { defect: f64, tolerance: f64 },

    #[error("singular linear system at grid index {index} (condition estimate {condition:e})")]
    Singular { index: usize, condition: f64 },

    #[error("model has no weight matrix")]
    MissingWeight,

    #[error("model is not a member of the Wright-Fisher family")]
    NotWrightFisher,

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

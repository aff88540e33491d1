use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("index out of range: {0}")]
    Index(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular point: {0}")]
    Singular(String),

    #[error("eigenvalue mismatch: expected {expected}, got {got}")]
    EigenvalueMismatch { expected: f64, got: f64 },

    #[error("ODE step size underflow at tau = {tau} (h = {h:e})")]
    StepUnderflow { tau: f64, h: f64 },

    #[error("convergence failure: {0}")]
    Convergence(String),

    #[error("span mismatch: {0}")]
    SpanMismatch(String),

    #[error("{path}: {msg}")]
    Io { path: String, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("eigensolve failed: {0}")]
    Eigensolve(String),
    #[error("completion failed: {0}")]
    Completion(String),
    #[error("angle synthesis failed at layer {layer}: residual {residual:e}")]
    Synthesis { layer: usize, residual: f64 },
    #[error("extrapolation: {0}")]
    Extrapolation(String),
    #[error("estimation: {0}")]
    Estimation(String),
    #[error("schema: {0}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

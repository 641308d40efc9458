use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A configuration or argument value is outside its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    /// A mathematical function was evaluated outside its domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// An iterative evaluation failed to converge.
    #[error("convergence failure: {0}")]
    Convergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid shift set: {0}")]
    InvalidShiftSet(String),

    /// A pole, branch or convergence guard was violated.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("series diverges: {0}")]
    Divergent(String),

    #[error("cannot allocate {requested_bytes} bytes for {what}")]
    Resource {
        what: &'static str,
        requested_bytes: usize,
    },

    #[error("non-finite function value at contour node {node}")]
    Evaluation { node: Complex64 },

    #[error("index {index} out of bounds (limit {limit})")]
    Bounds { index: u64, limit: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("malformed table file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum GirgError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
    #[error("no path between vertices {0} and {1}")]
    NoPath(u32, u32),
    /// A guaranteed structure (anchor vertex, boundary intersection) was not
    /// found. Signals a too-coarse tessellation (large D0) or edge retention
    /// below 1, not a bug in the caller.
    #[error("lemma violation: {0}")]
    LemmaViolation(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, GirgError>;

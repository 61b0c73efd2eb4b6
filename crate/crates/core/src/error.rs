use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the domain of an operation (point outside the disk,
    /// region touching the boundary, invalid parameter ordering, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Geometrically degenerate input (too few sites, all collinear,
    /// duplicate sites, empty configuration).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// The sampling window is too small for the requested event.
    #[error("window margin error: {0}")]
    Margin(String),

    /// An internal invariant was violated; indicates a bug.
    #[error("internal invariant violation: {0}")]
    Internal(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }
    pub fn margin(msg: impl Into<String>) -> Self {
        Error::Margin(msg.into())
    }
    pub fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }
}

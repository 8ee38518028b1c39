//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two fields or states live on incompatible grids/bases.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A requested object exceeds its configured size cap.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// A propagator failed to meet its accuracy or norm-drift target.
    #[error("numerical instability: {0}")]
    Instability(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Array/vector lengths or network dimensions do not line up.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// An argument violates a documented precondition.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A quantity that must be well defined is degenerate (e.g. an optimal
    /// baseline under a deterministic policy).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// The requested operation is not supported by this object.
    #[error("unsupported capability: {0}")]
    Unsupported(String),

    /// A NaN or infinity appeared where only finite values are allowed.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// A config, checkpoint, or fixture file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller passed a value outside the operation's domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Configuration failed validation before use.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Lookup of an active slice failed.
    #[error("slice {0} is not active")]
    SliceNotFound(u64),

    /// An action violated the environment's feasibility preconditions.
    #[error("infeasible action: {0}")]
    InfeasibleAction(String),

    /// Text could not be parsed into the expected shape.
    #[error("parse error: {0}")]
    Parse(String),

    /// A memory snapshot line was malformed.
    #[error("snapshot line {line}: {reason}")]
    Snapshot { line: usize, reason: String },

    /// Checkpoint file missing, truncated, or from an unknown version.
    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    /// An LLM client failed to produce a completion.
    #[error("llm client error: {0}")]
    Client(String),

    /// Training produced NaN/inf where finite values are required.
    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

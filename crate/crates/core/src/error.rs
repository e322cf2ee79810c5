//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A documented precondition does not hold for the given inputs.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Structural contract violation (mismatched grids, unsupported variants).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Invalid solver or run configuration.
    #[error("config error: {0}")]
    Config(String),

    /// Iteration produced NaN or infinity.
    #[error("diverged at iteration {iteration}: {what}")]
    Divergence { iteration: usize, what: String },

    /// An iterative method stalled before reaching its tolerance.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// Malformed text data (grid-function files).
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A band or mode index is outside the usable range.
    #[error("range error: {0}")]
    Range(String),

    /// Invalid configuration (grid, space parameters, config file keys).
    #[error("configuration error: {0}")]
    Config(String),

    /// A documented precondition was violated (e.g. nonzero divergence).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A numerical procedure failed to converge or produced NaN.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// Time step exceeds the CFL bound.
    #[error("step size too large: dt = {dt:.3e}, suggested dt <= {suggested:.3e}")]
    StepSize { dt: f64, suggested: f64 },

    /// A measured quantity violated an inequality the run asserts.
    #[error("violation: {0}")]
    Violation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by filter, fusion, and Lie-group operations.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a documented precondition (dimension mismatch,
    /// non-positive time step, out-of-range id, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A rotation logarithm was requested too close to the angle-pi cut locus
    /// where the axis is numerically unstable.
    #[error("near-singular logarithm: rotation angle {angle} rad is within {margin} of pi")]
    NearSingularLog { angle: f64, margin: f64 },

    /// A matrix that must be invertible (positive definite) was singular to
    /// working precision.
    #[error("numerical singularity: {0}")]
    NumericalSingularity(String),

    /// An operation ran on inputs that fail its structural precondition
    /// (e.g. layering a graph with unreachable agents).
    #[error("precondition violation: {0}")]
    PreconditionViolation(String),

    /// Scenario configuration rejected; `path` names the offending field.
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}

//! Error type shared by every module.

use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Two objects that must share a dimension do not.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// An argument violates a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A point was queried outside the domain of a function or compact set.
    #[error("point {point} lies outside {what}")]
    OutOfDomain { point: f64, what: String },

    /// Adaptive quadrature stopped before reaching the requested tolerance.
    #[error("quadrature did not converge on [{a}, {b}]: achieved error estimate {achieved:e}")]
    Quadrature { a: f64, b: f64, achieved: f64 },

    /// A jet of the extension does not match the field at a gap endpoint.
    #[error("component {component} does not match the field jet at {point}: residual {residual:e}")]
    EndpointMismatch {
        component: String,
        point: f64,
        residual: f64,
    },

    /// The perturbation of one gap could not be synthesised.
    #[error("gap [{a}, {b}], pair ({i},{j}): {reason} (residual {residual:e})")]
    GapFailure {
        a: f64,
        b: f64,
        i: usize,
        j: usize,
        reason: String,
        residual: f64,
    },

    /// A file could not be parsed into the expected format.
    #[error("parse error in {location}: {message}")]
    Parse { location: String, message: String },

    /// Filesystem failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// JSON encoding or decoding failure.
    #[error(transparent)]
    Json(#[from] serde_json::Error),

    /// CSV encoding failure.
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

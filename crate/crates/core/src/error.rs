use num_complex::Complex64;
use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GalError {
    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("evaluation point {point} lies within {distance:.3e} (lattice units) of a pole")]
    Pole { point: Complex64, distance: f64 },

    #[error("ill-conditioned system (condition number {0:.3e})")]
    IllConditioned(f64),

    #[error("integration failed at x = {x}: {reason}")]
    Integration { x: f64, reason: String },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("state failed verification: {0}")]
    Verification(String),
}

pub type Result<T> = std::result::Result<T, GalError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(GalError::Domain(msg.into()))
}

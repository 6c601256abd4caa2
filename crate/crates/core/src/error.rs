use thiserror::Error;

use crate::numerics::LogValue;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// The point handed to a weight or derivative evaluation is on or
    /// outside the boundary, or too close to it for the requested method.
    #[error("boundary error at r = {point:?}: rho = {rho:e}")]
    Boundary { point: Vec<f64>, rho: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Adaptive integration stopped before reaching the requested tolerance.
    /// The achieved estimate is carried along so callers can still use it.
    #[error(
        "quadrature did not converge: rel. error estimate {rel_err:e} on panel [{}, {}]{}",
        worst.0, worst.1, outer.map(|r| format!(" (outer r1 = {r})")).unwrap_or_default()
    )]
    NonConvergence {
        value: LogValue,
        rel_err: f64,
        worst: (f64, f64),
        outer: Option<f64>,
    },

    #[error("ill-conditioned fit: {0}")]
    IllConditioned(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("cache fingerprint mismatch: {0}")]
    FingerprintMismatch(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line harness.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonConvergence { .. } => 3,
            Error::Io(_) => 1,
            _ => 2,
        }
    }
}

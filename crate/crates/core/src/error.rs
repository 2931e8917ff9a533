//! Error and halt conditions shared by the solver and the harness.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Fluid height dropped to or below the configured lower bound.
    #[error("non-physical state: min fluid height {min_height:.3e} at x = {position:.4} (bound {h_min:.1e})")]
    NonPhysical { min_height: f64, position: f64, h_min: f64 },

    #[error("solid support [{left:.4}, {right:.4}] touched the tank boundary")]
    SolidTouchedBoundary { left: f64, right: f64 },

    /// The bracket of the normal force became non-positive (solid lift-off).
    #[error("normal force non-positive ({bracket:.4e}): solid lifted off the bottom")]
    LiftOff { bracket: f64 },

    #[error("wave breaking detected at x = {position:.4} (slope {slope:.4})")]
    Breaking { position: f64, slope: f64 },

    #[error("no solitary wave at these parameters: {0}")]
    NoSolitaryWave(String),

    #[error("singular banded system at row {0}")]
    SingularSystem(usize),

    #[error("CFL ratio {ratio:.4} exceeds 0.5")]
    CflViolation { ratio: f64 },

    #[error("invalid convergence study: {0}")]
    InvalidStudy(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for SimError {
    fn from(e: std::io::Error) -> Self {
        SimError::Io(e.to_string())
    }
}

impl From<csv::Error> for SimError {
    fn from(e: csv::Error) -> Self {
        SimError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for SimError {
    fn from(e: serde_json::Error) -> Self {
        SimError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, SimError>;

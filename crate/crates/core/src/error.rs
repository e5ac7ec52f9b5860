use thiserror::Error;

/// Errors produced by the simulator, closed forms and experiment recipes.
#[derive(Debug, Error)]
pub enum KerrError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("time step {dt} exceeds the stability bound {bound}")]
    StabilityViolation { dt: f64, bound: f64 },

    #[error("truncation leak at tau = {tau}: top-level population {population:e}")]
    TruncationLeak { tau: f64, population: f64 },

    #[error("numerical sanity violation at tau = {tau}: {what} = {value:e}")]
    SanityViolation {
        tau: f64,
        what: &'static str,
        value: f64,
    },

    #[error("wigner grid extent {extent} is below the required {required}")]
    ExtentTooSmall { extent: f64, required: f64 },

    #[error("manifest: {0}")]
    Manifest(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = KerrError> = std::result::Result<T, E>;

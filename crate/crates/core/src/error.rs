use thiserror::Error;

/// Errors produced while building ensembles, operators, spectra and simulations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("state space of size {size} exceeds the cap of {cap}")]
    CapExceeded { size: u128, cap: u64 },

    #[error("sector has a single state; no spectral gap is defined")]
    DegenerateSector,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("state {0} has zero stationary weight")]
    ZeroWeightState(usize),

    #[error("no convergence after {iterations} iterations (estimate {estimate:.6e}, residual {residual:.3e})")]
    NoConvergence {
        iterations: usize,
        estimate: f64,
        residual: f64,
    },

    #[error("insufficient data: {samples} samples, at least {required} required")]
    InsufficientData { samples: usize, required: usize },

    #[error("autocorrelation does not decay exponentially: {0}")]
    NonDecayingCorrelation(String),

    #[error("check failed: {}", .0.join("; "))]
    ReportedFailure(Vec<String>),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParams(msg.into())
}

use thiserror::Error;

/// Failures reported by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("unsupported regime: {0}")]
    Unsupported(String),
    #[error("root finder did not converge: {0}")]
    NoConvergence(String),
    #[error("ambiguous classification: {0}")]
    Ambiguous(String),
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("step size collapsed near a singular point: {0}")]
    Singular(String),
    #[error("loop meets a critical value: {0}")]
    CriticalValue(String),
    #[error("winding is not close to an integer: {0}")]
    NonInteger(String),
}

impl Error {
    /// True for failures caused by bad input rather than by numerics.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Invalid(_) | Error::OutOfRange(_) | Error::Unsupported(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

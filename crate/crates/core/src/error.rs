use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MpsError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("boundary discretization failed: {0}")]
    Discretization(String),
    #[error("special function argument out of range: {0}")]
    SpecialFunctionDomain(String),
    #[error("invalid basis: {0}")]
    InvalidBasis(String),
    #[error("basis evaluated at a charge point: {0}")]
    Singularity(String),
    #[error("spectral filter error: {0}")]
    Filter(String),
    #[error("degenerate basis: no interior mass above the regularization threshold")]
    DegenerateBasis,
    #[error("slope estimation failed: {0}")]
    SlopeEstimation(String),
    #[error("energy too close to an eigenvalue: {0}")]
    Conditioning(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, MpsError>;

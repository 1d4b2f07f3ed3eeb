use thiserror::Error;

/// Errors raised across the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("N ≥ 5 required (got N = {0})")]
    Dimension(u32),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },
    #[error("point outside domain: {0}")]
    OutsideDomain(String),
    #[error("singular configuration: {0}")]
    Singular(String),
    #[error("quadrature failed to self-converge: estimate {estimate:e} > tolerance {tolerance:e}")]
    Quadrature { estimate: f64, tolerance: f64 },
    #[error("linear solver failed: {0}")]
    LinearSolve(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("missing field data: {0}")]
    MissingData(&'static str),
    #[error("solver failure at schedule index {index} (eps = {eps}): {reason}")]
    Continuation { index: usize, eps: f64, reason: String },
    #[error("not converged: {0}")]
    NotConverged(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParam { name, reason: reason.into() }
}

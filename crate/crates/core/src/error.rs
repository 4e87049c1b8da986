use alloc::string::String;

/// Errors raised by the numerical layer.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("point lies outside the domain: {0}")]
    OutsideDomain(String),
    #[error("on-diagonal Green value is infinite")]
    OnDiagonal,
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error("extrapolation diverged after {steps} refinements")]
    ExtrapolationDiverged { steps: usize },
    #[error("geometric precondition violated: {0}")]
    Geometry(String),
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("no effective paths: {0}")]
    NoEffectivePaths(String),
    #[error("classifier inconsistency: {0}")]
    Inconsistent(String),
    #[error("non-monotone verdict sequence: {0}")]
    NonMonotone(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

use thiserror::Error;

/// Errors raised by the parking-process library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParkError {
    /// An argument lies outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),
    /// A `Params` field violates its invariant.
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    /// A call-site precondition does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, ParkError>;

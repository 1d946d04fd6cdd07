use thiserror::Error;

/// Error type shared by all modules.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the defined domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The request is well-formed but exceeds a configured resource budget.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    /// An exact integer computation would overflow its value type.
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn resource(msg: impl Into<String>) -> Error {
    Error::Resource(msg.into())
}

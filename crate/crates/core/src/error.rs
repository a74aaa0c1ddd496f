use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    /// Arguments violate an operation's preconditions.
    #[error("invalid input: {0}")]
    Input(String),
    /// The requested model or artifact pairing has no implementation.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// A computation would exceed a configured resource cap.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    /// Malformed file contents or configuration.
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}

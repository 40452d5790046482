use thiserror::Error;

/// Errors raised by the laboratory's operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("capacity exceeded: {what} needs {size}, cap is {cap}")]
    Capacity { what: &'static str, size: u128, cap: u128 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("not majorised: partial sum {index} of a exceeds that of b ({lhs} > {rhs})")]
    NotMajorised { index: usize, lhs: f64, rhs: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

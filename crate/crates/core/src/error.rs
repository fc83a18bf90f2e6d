use thiserror::Error;

/// Errors raised by the toolkit. The CLI maps each variant to an exit code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Input value outside the operation's domain (negative radius, point outside a box, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// Parameter combination outside the admissible range.
    #[error("parameter error: {0}")]
    Parameter(String),
    /// Malformed or inconsistent data (files, measures, divergent fields).
    #[error("data error: {0}")]
    Data(String),
    /// Parse failure with line context.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}

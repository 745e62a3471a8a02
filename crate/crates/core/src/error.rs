use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input violates an operation's precondition (dimensions, levels, thresholds, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A PGM or EZW1 byte stream could not be parsed.
    #[error("format error at byte {offset}: {message}")]
    Format { offset: usize, message: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(message: impl Into<String>) -> Error {
    Error::InvalidInput(message.into())
}

pub(crate) fn format_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Format {
        offset,
        message: message.into(),
    }
}

//! Error type shared across the crate.
//!
//! Variants are grouped by what the caller can do about them: fix a
//! configuration value, fix the shape/size of an input, fix the data on disk,
//! or retry the I/O.

use std::fmt;
use std::io;

/// Crate-wide error type.
#[derive(Debug)]
pub enum Error {
    /// A configuration value violates its documented constraints
    /// (e.g. a pilot index outside the active set, a zero FFT size).
    Config(String),
    /// An input to an operation breaks that operation's contract
    /// (e.g. wrong buffer length, empty batch, mismatched model input size).
    Contract(String),
    /// Dataset construction or splitting failed
    /// (e.g. class imbalance beyond tolerance, a split missing a class).
    Data(String),
    /// A file on disk has an unrecognized, corrupt, or incompatible layout.
    Format(String),
    /// Underlying I/O failure.
    Io(io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
            Error::Contract(msg) => write!(f, "contract violation: {msg}"),
            Error::Data(msg) => write!(f, "data error: {msg}"),
            Error::Format(msg) => write!(f, "format error: {msg}"),
            Error::Io(err) => write!(f, "i/o error: {err}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(err) => Some(err),
            _ => None,
        }
    }
}

impl From<io::Error> for Error {
    fn from(err: io::Error) -> Self {
        Error::Io(err)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_includes_category_and_message() {
        let e = Error::config("fft_size must be a power of two");
        assert_eq!(
            e.to_string(),
            "configuration error: fft_size must be a power of two"
        );
        let e = Error::from(io::Error::new(io::ErrorKind::NotFound, "gone"));
        assert!(e.to_string().starts_with("i/o error:"));
    }

    #[test]
    fn io_errors_expose_a_source() {
        use std::error::Error as _;
        let e = Error::from(io::Error::new(io::ErrorKind::Other, "disk"));
        assert!(e.source().is_some());
        assert!(Error::data("imbalance").source().is_none());
    }
}

use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A caller passed an argument outside an operation's domain.
    InvalidArgument(String),
    /// Training data is empty or cannot support the requested model.
    InsufficientData(String),
    /// A document id that is not present in the index.
    UnknownDocument(u32),
    /// The query text has no tokens.
    EmptyQuery,
    /// Turns must be appended with non-decreasing timestamps.
    NonMonotonicTimestamp { last: u64, got: u64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::InsufficientData(msg) => write!(f, "insufficient data: {msg}"),
            Error::UnknownDocument(id) => write!(f, "unknown document id {id}"),
            Error::EmptyQuery => f.write_str("query has no tokens"),
            Error::NonMonotonicTimestamp { last, got } => {
                write!(f, "turn timestamp {got} precedes previous turn at {last}")
            }
        }
    }
}

impl core::error::Error for Error {}

use thiserror::Error;

/// Errors raised by construction, validation and size guards.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("index {index} out of range 1..={len}")]
    OutOfRange { index: u64, len: u64 },
    #[error("color space mismatch: {0}")]
    ColorSpace(String),
    #[error("size guard exceeded: {what} ({size} > {limit})")]
    SizeGuard { what: &'static str, size: u128, limit: u128 },
    #[error("horizon exceeded: player {player} is beyond the strategy's defined range {limit}")]
    Horizon { player: u64, limit: u64 },
    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("n too large: {0}")]
    TooLarge(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

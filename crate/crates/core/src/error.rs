use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime power")]
    NotAPrimePower(u32),
    #[error("field order {0} exceeds the supported maximum of 256")]
    TooLarge(u32),
    #[error("division by zero")]
    DivisionByZero,
    #[error("element code {code} out of range for GF({q})")]
    ElementOutOfRange { code: u32, q: u32 },
    #[error("dimension mismatch: expected {expected} columns, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("ambient mismatch: {0}")]
    AmbientMismatch(String),
    #[error("enumeration cap exceeded: {count} items requested, cap is {cap}")]
    CapExceeded { count: String, cap: u64 },
    #[error("parameter out of range: {0}")]
    RangeError(String),
    #[error("missing parameter `{0}`")]
    MissingParameter(String),
    #[error("parameter mismatch: {0}")]
    ParameterMismatch(String),
    #[error("family is not uniform: {0}")]
    NotUniform(String),
    #[error("star center of rank {center} exceeds member rank {k}")]
    CenterTooBig { center: usize, k: usize },
    #[error("search result is not proven optimal at the theorem bound: {0}")]
    NotOptimal(String),
    #[error("covering hypothesis could not be verified: {0}")]
    HypothesisUnverified(String),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("resource exhausted: {0}")]
    ResourceExhausted(String),
    #[error("parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("usage: {0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

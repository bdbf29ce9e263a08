use thiserror::Error;

/// Errors raised by the estimators, simulators and pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("empty input")]
    EmptyInput,

    #[error("timestamps not strictly increasing at indices {previous} and {current}")]
    OutOfOrder { previous: usize, current: usize },

    #[error("non-uniform sampling: {count} intra-session spacings deviate from the modal spacing of {modal_ms} ms (first offenders at increment indices {offenders:?})")]
    NonUniformSpacing {
        modal_ms: i64,
        count: usize,
        offenders: Vec<usize>,
    },

    #[error("need at least {needed} increments for one batch, got {available}")]
    InsufficientData { needed: usize, available: usize },

    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

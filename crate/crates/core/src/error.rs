use thiserror::Error;

/// Errors raised anywhere in the simulator, solvers and harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("schema error in field `{field}`: {message}")]
    Schema { field: String, message: String },
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("run diverged: {0}")]
    Divergence(String),
    #[error("internal consistency failure: {0}")]
    InternalConsistency(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn schema(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema { field: field.into(), message: message.into() }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Schema { .. } => 3,
            Error::Capacity(_) => 4,
            _ => 1,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

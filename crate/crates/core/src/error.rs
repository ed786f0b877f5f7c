use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("observable error: {0}")]
    Observable(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("action sampling failed: {0}")]
    Sampling(String),

    #[error("cannot apply action: {0}")]
    ActionApplication(String),

    #[error("problem configuration error: {0}")]
    Problem(String),

    #[error("degenerate problem instance: {0}")]
    DegenerateInstance(String),

    #[error("optimizer error: {0}")]
    Optimizer(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}

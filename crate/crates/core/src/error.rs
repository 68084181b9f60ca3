use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("usage error: {0}")]
    Usage(String),

    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("network contains a cycle through supernode {0}")]
    CyclicNetwork(String),

    #[error("complexity refusal: {0}")]
    ComplexityRefusal(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("randomization exhausted after {attempts} attempts: {detail}")]
    RandomizationExhausted { attempts: usize, detail: String },

    #[error("infeasible under failure pattern {pattern}: {detail}")]
    InfeasibleUnderFailure { pattern: usize, detail: String },

    #[error("not supported: {0}")]
    NotSupported(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Error {
        Error::Usage(msg.into())
    }
}

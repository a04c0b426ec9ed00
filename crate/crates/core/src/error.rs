use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("count mismatch: {0}")]
    CountMismatch(String),

    #[error("customer {customer}: {message}")]
    InvalidCustomer { customer: usize, message: String },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid generator spec: {0}")]
    InvalidGenerator(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid frequency vector: {0}")]
    InvalidFrequency(String),

    #[error("delivery of {quantity} to customer {customer} exceeds vehicle capacity {capacity}")]
    OverCapacity {
        customer: usize,
        quantity: u64,
        capacity: u64,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A built-in policy produced an infeasible plan.
    #[error("internal error: {0}")]
    Internal(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// True for errors caused by bad input rather than a defect or the environment.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Internal(_))
    }
}

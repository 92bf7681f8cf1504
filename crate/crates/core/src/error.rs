use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad parameter or configuration value.
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("center set is empty")]
    EmptyCenters,

    /// Caller-supplied shapes disagree (assignment vs dataset or centers).
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Seeding ran out of positive D² mass before placing every center.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("instance too large for exact {what}: {detail}; use the Monte Carlo estimator instead")]
    SizeLimit { what: &'static str, detail: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("unsupported dimension {0}: only 2-D data can be rendered")]
    UnsupportedDimension(usize),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A column index fell outside the evaluable range of a field or profile.
    #[error("column {column} outside evaluable range {lo}..={hi}")]
    ColumnOutOfRange { column: usize, lo: usize, hi: usize },

    /// A statistical law degenerated (zero variance where a positive one is
    /// required), so the requested quantity is undefined.
    #[error("degenerate law: {0}")]
    DegenerateLaw(String),

    /// A file had the wrong magic, header, or payload size.
    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

use thiserror::Error;

/// Crate-wide error type. The CLI maps variants onto exit codes:
/// validation and I/O failures exit 2, numerical failures exit 3.
#[derive(Debug, Error)]
pub enum Error {
    /// Bad input: schema violations, broken invariants, dimension mismatches.
    #[error("validation: {0}")]
    Validation(String),
    /// Computation produced or received non-finite values, or a solver failed.
    #[error("numerical: {0}")]
    Numerical(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}

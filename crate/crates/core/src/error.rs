use thiserror::Error;

/// Errors produced while building or validating problem data.
///
/// `Input` covers everything a user can cause through an instance file or
/// CLI arguments; `Internal` signals a broken invariant inside the solver
/// (e.g. a missed breakpoint during piecewise reconstruction).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("internal consistency error: {0}")]
    Internal(String),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }

    /// True when the error originates from user input rather than a bug.
    pub fn is_input(&self) -> bool {
        matches!(self, Error::Input(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

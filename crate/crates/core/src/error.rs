use thiserror::Error;

/// Errors raised by the library.
///
/// Validation failures (malformed votes, broken matrix invariants, bad
/// instances) are kept apart from I/O so that front ends can map them to
/// different exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("vote {index} is malformed: {reason}")]
    InvalidVote { index: usize, reason: String },

    #[error("candidate {candidate} is out of range 1..={m}")]
    InvalidCandidate { candidate: usize, m: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("score arithmetic overflowed")]
    Overflow,

    #[error("no manipulation found with at most {limit} manipulators")]
    SearchExhausted { limit: usize },

    /// An invariant that the algorithms guarantee was broken. Seeing this is a bug.
    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures caused by the environment rather than by the input.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io(_) => true,
            Error::Csv(e) => e.is_io_error(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Input data is internally inconsistent (e.g. a symmetric tensor with
    /// unequal entries on a permutation orbit).
    #[error("integrity error: {0}")]
    Integrity(String),

    /// A moment needed to assemble a matrix is absent from the sequence.
    #[error("incomplete moment sequence: missing moment {0}")]
    IncompleteTms(String),

    /// Atom extraction could not recover a consistent set of points.
    #[error("atom extraction failed: {0}")]
    ExtractionFailed(String),

    /// A closed-form construction hit a numerically degenerate configuration.
    #[error("numerical degeneracy: {0}")]
    Degenerate(String),

    #[error("serialization error: {0}")]
    Serde(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

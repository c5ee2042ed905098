//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by signal processing, configuration and experiment code.
#[derive(Debug, Error)]
pub enum Error {
    /// An input vector had a different length than the operation requires.
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    /// A signal carried the wrong domain tag for the consuming operation.
    #[error("domain mismatch: expected {expected} samples, got {got}")]
    DomainMismatch {
        expected: &'static str,
        got: &'static str,
    },

    /// A parameter was outside its allowed range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A configuration file or key was invalid.
    #[error("config error: {0}")]
    Config(String),

    /// A least-squares pilot divide hit a zero reference tone.
    #[error("zero reference tone at index {tone}: pilot sequence/filter combination is invalid")]
    ZeroReferenceTone { tone: usize },

    /// The equalizer matrix was singular at zero noise variance.
    #[error("singular equalizer matrix at tone {tone} with zero noise variance; use noise_var > 0")]
    SingularEqualizer { tone: usize },

    /// Golden-vector regression failed.
    #[error("golden vector mismatch: {0}")]
    GoldenMismatch(String),

    /// Filesystem error, annotated with the offending path.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

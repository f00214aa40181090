use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("timestamps not increasing at line {line}")]
    Ordering { line: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("variable `{0}` has a degenerate (constant) range")]
    DegenerateRange(String),

    #[error("unsupported wavelet `{0}`")]
    UnsupportedWavelet(String),

    #[error("input too short: need at least {need} samples, got {got}")]
    InputTooShort { need: usize, got: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("requested {requested} decomposition levels but at most {max} are possible")]
    ExcessLevel { requested: usize, max: usize },

    #[error("invalid compression rate {0}: must satisfy 0 <= rate < 1")]
    InvalidRate(f64),

    #[error("corrupt coefficient data: {0}")]
    Corruption(String),

    #[error("format error at byte {offset}: {msg}")]
    Format { offset: usize, msg: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient samples: need more than {k}, got {n}")]
    InsufficientSamples { k: usize, n: usize },

    #[error("data error: {0}")]
    Data(String),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("no evaluation window fits in any test frame")]
    EmptyEvaluation,

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Errors caused by the input data rather than by the caller or the program.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::Ordering { .. }
                | Error::DegenerateRange(_)
                | Error::InputTooShort { .. }
                | Error::Corruption(_)
                | Error::Format { .. }
                | Error::Data(_)
                | Error::InsufficientSamples { .. }
                | Error::EmptyEvaluation
                | Error::Csv(_)
                | Error::Json(_)
        )
    }
}

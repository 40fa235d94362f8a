use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dataset: {0}")]
    Data(String),

    #[error("dataset: unknown action {0:?}")]
    UnknownAction(String),

    #[error("dataset: input is empty")]
    EmptyInput,

    #[error("dataset: bad header: {0}")]
    Header(String),

    #[error("preprocess: {0}")]
    Preprocess(String),

    #[error("learners: {0}")]
    Learner(String),

    #[error("learners: shape mismatch: expected {expected} columns, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("metrics: {0}")]
    Metrics(String),

    #[error("model_store: artifact is corrupt: {0}")]
    Corrupt(String),

    #[error("model_store: unsupported format_version {0}")]
    Version(u32),

    #[error("model_store: incompatible label map {0:?}")]
    LabelMap(Vec<String>),

    #[error("config: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line front end.
    ///
    /// `2` usage/config, `3` data (input files, artifacts), `4` numeric
    /// (training or metric preconditions), `1` anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Data(_)
            | Error::UnknownAction(_)
            | Error::EmptyInput
            | Error::Header(_)
            | Error::Corrupt(_)
            | Error::Version(_)
            | Error::LabelMap(_)
            | Error::Csv(_)
            | Error::Json(_)
            | Error::Io { .. } => 3,
            Error::Preprocess(_) | Error::Learner(_) | Error::Shape { .. } | Error::Metrics(_) => 4,
        }
    }
}

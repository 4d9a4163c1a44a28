use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed json in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("unsupported table format: {0}")]
    Format(String),

    #[error("feature payload {path} has {actual} bytes, expected {expected}")]
    ShortPayload {
        path: PathBuf,
        expected: u64,
        actual: u64,
    },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("record '{id}' has label '{label}' which is not in the class schema")]
    UnknownLabel { id: String, label: String },

    #[error("duplicate record id '{0}'")]
    DuplicateId(String),

    #[error("record '{id}' contains a non-finite value in {field}")]
    NonFinite { id: String, field: String },

    #[error("record '{id}' is invalid: {reason}")]
    InvalidRecord { id: String, reason: String },

    #[error("invalid class schema: {0}")]
    InvalidSchema(String),

    #[error("class '{class}' has no samples{context}")]
    AbsentClass { class: String, context: String },

    #[error("class '{class}' has a single sample; it would vanish from a training fold")]
    SingletonClass { class: String },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("all training labels belong to one class")]
    SingleClass,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "solver did not converge within {iterations} iterations (max violation {violation:.3e})"
    )]
    NotConverged { iterations: usize, violation: f64 },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }

    /// Stable short name for the error family, used in machine-readable diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Json { .. } | Error::Csv(_) | Error::Format(_) => "format",
            Error::ShortPayload { .. } => "short_payload",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::UnknownLabel { .. } => "unknown_label",
            Error::DuplicateId(_) => "duplicate_id",
            Error::NonFinite { .. } => "non_finite",
            Error::InvalidRecord { .. } => "invalid_record",
            Error::InvalidSchema(_) => "invalid_schema",
            Error::AbsentClass { .. } => "absent_class",
            Error::SingletonClass { .. } => "singleton_class",
            Error::Empty(_) => "empty_input",
            Error::SingleClass => "single_class",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::NotConverged { .. } => "not_converged",
        }
    }

    /// True for failures that happen while fitting rather than while validating inputs.
    pub fn is_runtime(&self) -> bool {
        matches!(self, Error::NotConverged { .. })
    }
}

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("missing file: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("schema violation in {file} line {line}: {message}")]
    Schema {
        file: String,
        line: usize,
        message: String,
    },

    #[error("referential integrity: {0}")]
    Integrity(String),

    #[error("non-monotonic timestamps in {context} at index {index}")]
    NonMonotonic { context: String, index: usize },

    #[error("invalid {field}: {message}")]
    Invalid { field: String, message: String },

    #[error("non-positive calibration: {0}")]
    Calibration(f64),

    #[error("no box for object `{0}` inside the analysis window")]
    NotVisible(String),

    #[error("missing reference height for kind `{0}`")]
    MissingReferenceHeight(String),

    #[error("scene `{0}` has no regions")]
    NoRegions(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("training data contains a single class")]
    SingleClass,

    #[error("optimizer diverged (non-finite objective)")]
    Divergence,

    #[error("{what} out of range: {value} (allowed {allowed})")]
    OutOfRange {
        what: String,
        value: usize,
        allowed: String,
    },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("missing feature column `{0}`")]
    MissingColumn(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by malformed input data rather than runtime
    /// conditions. The CLI maps these to exit code 2.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::MissingFile(_)
                | Error::Schema { .. }
                | Error::Integrity(_)
                | Error::NonMonotonic { .. }
                | Error::Invalid { .. }
                | Error::Calibration(_)
                | Error::NotVisible(_)
                | Error::UnknownPreset(_)
                | Error::OutOfRange { .. }
        )
    }
}

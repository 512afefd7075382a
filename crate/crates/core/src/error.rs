use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("toml error: {0}")]
    Toml(String),

    // event logs
    #[error("missing mandatory column `{0}`")]
    MissingColumn(String),
    #[error("column `{0}` is not declared in the schema")]
    UnknownColumn(String),
    #[error("row {row}: unparseable timestamp `{value}`")]
    BadTimestamp { row: usize, value: String },
    #[error("row {row}: attribute `{attribute}` expects a number, got `{value}`")]
    BadNumber { row: usize, attribute: String, value: String },
    #[error("row {row}: duplicate event for case `{case_id}`")]
    DuplicateEvent { row: usize, case_id: String },
    #[error("static attribute varies within case `{case_id}`: `{attribute}`")]
    StaticAttributeVaries { case_id: String, attribute: String },
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("event log is empty")]
    EmptyLog,
    #[error("rule references unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("case `{0}` has no label")]
    MissingLabel(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("at least 2 cases are required to split, got {0}")]
    TooFewCases(usize),

    // bucketing / encoding
    #[error("bucketing strategy `{0}` is not supported")]
    UnsupportedStrategy(String),
    #[error("no applicable bucket for a partial trace of length {0}")]
    NoApplicableBucket(usize),
    #[error("bucket is empty")]
    EmptyBucket,
    #[error("index encoding requires a prefix length k")]
    MissingIndexLength,
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    // models
    #[error("labels contain a single class")]
    SingleClass,
    #[error("every feature column is constant")]
    DegenerateMatrix,
    #[error("row width {got} does not match model width {expected}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("hyperparameter space is empty: {0}")]
    EmptySpace(String),
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperParams(String),
    #[error("model kind mismatch: expected {expected}")]
    WrongModelKind { expected: &'static str },

    // explainers
    #[error("feature {0} is constant")]
    ConstantFeature(usize),
    #[error("{features} features exceeds the exact enumeration limit of {limit}")]
    TooManyFeatures { features: usize, limit: usize },
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("background set is empty")]
    EmptyBackground,
    #[error("all perturbations are identical")]
    DegeneratePerturbations,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    // bench
    #[error("cell is not prepared: {0}")]
    CellNotPrepared(String),
    #[error("non-empty results required")]
    EmptyResults,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad input rather than a failure inside the
    /// library. Missing or unreadable input files count as bad input; other
    /// I/O failures do not.
    pub fn is_user_error(&self) -> bool {
        match self {
            Error::Io { source, .. } => matches!(
                source.kind(),
                std::io::ErrorKind::NotFound | std::io::ErrorKind::PermissionDenied
            ),
            _ => true,
        }
    }
}

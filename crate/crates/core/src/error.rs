use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("i/o error on {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("header does not match schema: expected [{expected}], found [{found}]")]
    HeaderMismatch { expected: String, found: String },

    #[error("non-numeric cell {value:?} at row {row}, column {column}")]
    BadCell { row: usize, column: String, value: String },

    #[error("invalid value {value} in binary column {column} at row {row}")]
    NotBinary { row: usize, column: String, value: f64 },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("column {0} has no observed values")]
    FullyMissingColumn(String),

    #[error("response column has missing entries")]
    MissingResponse,

    #[error("EM imputation did not converge in {iterations} iterations (last parameter delta {last_delta:e})")]
    EmNotConverged { iterations: usize, last_delta: f64 },

    #[error("stratum with response {class} has only {count} rows (need at least 2)")]
    SmallStratum { class: u8, count: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("feature {0} is not a continuous predictor")]
    NotContinuous(String),

    #[error("unknown feature index {0}")]
    UnknownFeature(usize),

    #[error("unknown feature name {0:?}")]
    UnknownFeatureName(String),

    #[error("design has {rows} rows but {cols} columns")]
    TooFewRows { rows: usize, cols: usize },

    #[error("rank-deficient design: column {column} is linearly dependent on earlier columns")]
    RankDeficient { column: String },

    #[error("dimension mismatch: expected {expected} columns, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("models are not nested: {0}")]
    NotNested(String),

    #[error("likelihood ratio {0:e} is negative beyond tolerance (optimizer failure)")]
    NegativeLikelihoodRatio(f64),

    #[error("response has a single class")]
    SingleClass,

    #[error("response is constant")]
    ConstantResponse,

    #[error("all-zero confusion matrix")]
    EmptyConfusion,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("schema digest mismatch: model {model}, data {data}")]
    DigestMismatch { model: String, data: String },

    #[error("malformed model artifact: {0}")]
    MalformedModel(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag used in structured CLI errors.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::MissingFile(_) => "missing_file",
            Error::Io { .. } => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
            Error::Schema(_) => "schema",
            Error::HeaderMismatch { .. } => "header_mismatch",
            Error::BadCell { .. } => "bad_cell",
            Error::NotBinary { .. } => "not_binary",
            Error::EmptyDataset => "empty_dataset",
            Error::FullyMissingColumn(_) => "fully_missing_column",
            Error::MissingResponse => "missing_response",
            Error::EmNotConverged { .. } => "em_not_converged",
            Error::SmallStratum { .. } => "small_stratum",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::EmptyInput => "empty_input",
            Error::NotContinuous(_) => "not_continuous",
            Error::UnknownFeature(_) | Error::UnknownFeatureName(_) => "unknown_feature",
            Error::TooFewRows { .. } => "too_few_rows",
            Error::RankDeficient { .. } => "rank_deficient",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NotNested(_) => "not_nested",
            Error::NegativeLikelihoodRatio(_) => "negative_likelihood_ratio",
            Error::SingleClass => "single_class",
            Error::ConstantResponse => "constant_response",
            Error::EmptyConfusion => "empty_confusion",
            Error::Config(_) => "config",
            Error::DigestMismatch { .. } => "digest_mismatch",
            Error::MalformedModel(_) => "malformed_model",
        }
    }
}

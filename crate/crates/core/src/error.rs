use chrono::NaiveDate;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, LinkError>;

#[derive(Debug, Error)]
pub enum LinkError {
    #[error("{asset}: line {line}: {reason}")]
    MalformedRow {
        asset: String,
        line: usize,
        reason: String,
    },

    #[error("{asset}: duplicate date {date} (line {line})")]
    DuplicateDate {
        asset: String,
        date: NaiveDate,
        line: usize,
    },

    #[error("{0}: no data rows")]
    EmptyFile(String),

    #[error("need at least {needed} observations, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("asset {0} is not available")]
    MissingAsset(String),

    #[error("asset {0} listed more than once")]
    DuplicateAsset(String),

    #[error("no common dates for sample {0}")]
    EmptyIntersection(String),

    #[error("window {start}..{end} lies outside the panel range {first}..{last}")]
    WindowOutOfRange {
        start: NaiveDate,
        end: NaiveDate,
        first: NaiveDate,
        last: NaiveDate,
    },

    #[error("invalid sample {name}: {reason}")]
    InvalidSample { name: String, reason: String },

    #[error("column {0} has zero variance")]
    ZeroVariance(String),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("eigen solver did not converge after {0} sweeps")]
    NoConvergence(usize),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("insufficient observations: T_eff = {t_eff} must exceed {required}")]
    InsufficientObservations { t_eff: usize, required: usize },

    #[error("regressor cross-product is numerically singular (condition number {0:e})")]
    Singular(f64),

    #[error("equation {0} has zero residual variance")]
    ZeroResidualVariance(usize),

    #[error("row {0} of the variance-share matrix sums to zero")]
    ZeroRow(usize),

    #[error("invalid frequency band: {0}")]
    InvalidBand(String),

    #[error("no Fourier frequency falls inside band {0}")]
    EmptyBand(String),

    #[error("variable {0} has zero spectral power")]
    ZeroPower(usize),

    #[error("bands do not partition [0, pi]: {0}")]
    NotAPartition(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl LinkError {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        LinkError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

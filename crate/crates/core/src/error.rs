use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("missing column '{0}'")]
    MissingColumn(String),
    #[error("invalid timestamp '{value}' on row {row}")]
    InvalidTimestamp { row: usize, value: String },
    #[error("timestamps not strictly increasing at row {row}")]
    NonMonotonicTime { row: usize },
    #[error("gap of {hours} h at row {row} exceeds limit of {limit} h")]
    GapTooLarge { row: usize, hours: i64, limit: i64 },
    #[error("timestamp step is not a whole number of hours at row {row}")]
    NotHourly { row: usize },
    #[error("need at least {needed} complete rows for imputation, found {found}")]
    InsufficientNeighbors { needed: usize, found: usize },
    #[error("unknown wind direction '{0}'")]
    UnknownDirection(String),
    #[error("unknown channel '{0}'")]
    UnknownChannel(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("singular local system in LOESS fit at position {0}")]
    DegenerateFit(f64),
    #[error("series spans {days} days; decomposition needs at least {needed}")]
    SpanTooShort { days: usize, needed: usize },

    #[error("series has zero variance")]
    ZeroVariance,
    #[error("need at least 3 positive ACF lags for the decay fit, found {0}")]
    TooFewPositiveLags(usize),
    #[error("series of length {len} too short; need at least {needed}")]
    SeriesTooShort { len: usize, needed: usize },
    #[error("singular polynomial detrend for segment size {0}")]
    SingularDetrend(usize),
    #[error("no strictly positive values in series")]
    NoPositiveData,
    #[error("tail has {found} points; need at least {needed}")]
    TailTooSmall { found: usize, needed: usize },
    #[error("non-positive value {0} in lognormal fit")]
    NonPositiveValue(f64),

    #[error("ACF never enters the confidence band within {0} lags")]
    NoBandCrossing(usize),
    #[error("singular least-squares system")]
    SingularSystem,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("beta must be positive, got {0}")]
    NonPositiveBeta(f64),
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("training diverged at epoch {0} (non-finite loss)")]
    DivergedLoss(usize),

    #[error("too few samples: {0}")]
    TooFewSamples(String),
    #[error("mean is zero in the active branch")]
    ZeroMean,
    #[error("denominator is zero in the active branch")]
    ZeroDenominator,
    #[error("empty input")]
    EmptyInput,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "Io",
            Error::Csv(_) => "Csv",
            Error::Json(_) => "Json",
            Error::MissingColumn(_) => "MissingColumn",
            Error::InvalidTimestamp { .. } => "InvalidTimestamp",
            Error::NonMonotonicTime { .. } => "NonMonotonicTime",
            Error::GapTooLarge { .. } => "GapTooLarge",
            Error::NotHourly { .. } => "NotHourly",
            Error::InsufficientNeighbors { .. } => "InsufficientNeighbors",
            Error::UnknownDirection(_) => "UnknownDirection",
            Error::UnknownChannel(_) => "UnknownChannel",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::DegenerateFit(_) => "DegenerateFit",
            Error::SpanTooShort { .. } => "SpanTooShort",
            Error::ZeroVariance => "ZeroVariance",
            Error::TooFewPositiveLags(_) => "TooFewPositiveLags",
            Error::SeriesTooShort { .. } => "SeriesTooShort",
            Error::SingularDetrend(_) => "SingularDetrend",
            Error::NoPositiveData => "NoPositiveData",
            Error::TailTooSmall { .. } => "TailTooSmall",
            Error::NonPositiveValue(_) => "NonPositiveValue",
            Error::NoBandCrossing(_) => "NoBandCrossing",
            Error::SingularSystem => "SingularSystem",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::NonPositiveBeta(_) => "NonPositiveBeta",
            Error::ShapeMismatch { .. } => "ShapeMismatch",
            Error::EmptyDataset => "EmptyDataset",
            Error::DivergedLoss(_) => "DivergedLoss",
            Error::TooFewSamples(_) => "TooFewSamples",
            Error::ZeroMean => "ZeroMean",
            Error::ZeroDenominator => "ZeroDenominator",
            Error::EmptyInput => "EmptyInput",
        }
    }
}

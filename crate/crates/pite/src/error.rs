//! Error type shared across the crate.

use crate::data::Arm;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A cell was empty or non-numeric where a value is required.
    #[error("missing value at row {row}, column `{column}`")]
    MissingValue { row: usize, column: String },

    /// A value that must be finite was NaN or infinite.
    #[error("non-finite value at row {row}, column `{column}`")]
    NonFiniteValue { row: usize, column: String },

    /// The treatment column held something other than 0 or 1.
    #[error("treatment value at row {row} is not 0 or 1")]
    NonBinaryTreatment { row: usize },

    /// A covariate declared binary held something other than 0 or 1.
    #[error("binary covariate `{column}` holds a non-0/1 value at row {row}")]
    NonBinaryCovariate { row: usize, column: String },

    /// An arm is too small to support the requested fit.
    #[error("{arm} arm has {size} members, needs at least {required}")]
    DegenerateArm { arm: Arm, size: usize, required: usize },

    /// No covariate columns were selected.
    #[error("no covariate columns")]
    EmptyCovariates,

    /// The design matrix does not have full column rank.
    #[error("design matrix is rank deficient at column {column}")]
    RankDeficient { column: usize },

    /// Prediction input does not match the fitted model's covariate layout.
    #[error("dimension mismatch: model expects {expected} covariates, data has {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A statistic needs more values than were supplied.
    #[error("need at least {required} values, got {got}")]
    TooFewValues { got: usize, required: usize },

    /// Both arms had constant outcomes, so the pooled SD is zero.
    #[error("pooled outcome standard deviation is zero")]
    ZeroPooledSd,

    /// A model refit inside the permutation loop failed; the whole test aborts.
    #[error("fit failed at permutation {index}: {source}")]
    PermutationFitFailure {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    /// A simulation grid cell failed; `index` and `label` identify it.
    #[error("cell {index} ({label}) failed: {source}")]
    CellFailure {
        index: usize,
        label: String,
        #[source]
        source: Box<Error>,
    },

    /// Exhaustive enumeration was requested for too large a design.
    #[error("C({n}, {treated}) exceeds the exhaustive enumeration limit of {limit}")]
    TooLarge { n: usize, treated: usize, limit: u64 },

    /// The requested effect size cannot be reached by scaling.
    #[error("effect-size calibration failed: {0}")]
    CalibrationFailure(String),

    /// A design or parameter block failed validation.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

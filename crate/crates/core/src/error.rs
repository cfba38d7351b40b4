//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    // ---- grids, quadrature, datasets ----
    #[error("grid needs at least {min} points, got {got}")]
    GridTooShort { min: usize, got: usize },
    #[error("grid points must be strictly increasing (violated at index {index})")]
    NonIncreasingGrid { index: usize },
    #[error("grid spacing at index {index} deviates from declared uniform step {step}")]
    NonUniformStep { step: f64, index: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("quadrature weight at index {index} is negative")]
    NegativeWeight { index: usize },
    #[error("quadrature weight at index {index} is zero")]
    ZeroWeight { index: usize },
    #[error("quadrature weights sum to {sum} but the grid span is {span}")]
    WeightSumMismatch { sum: f64, span: f64 },
    #[error("non-finite value in dataset at row {row}, column {col}")]
    NonFiniteValue { row: usize, col: usize },
    #[error("dataset must contain at least one function")]
    EmptyDataset,
    #[error("dataset grid does not match the model grid")]
    GridMismatch,

    // ---- preprocessing ----
    #[error("no negative-to-nonnegative zero crossing in signal")]
    NoZeroCrossing,
    #[error("cannot rescale a constant signal")]
    ConstantSignal,
    #[error("signal too short: need {need} samples, have {have}")]
    TooShort { need: usize, have: usize },

    // ---- model fitting ----
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("all eigenvalues are zero; explained variance is undefined")]
    AllZeroVariance,
    #[error("index {index} out of bounds for {len} items")]
    IndexOutOfBounds { index: usize, len: usize },

    // ---- synthesis ----
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("records disagree on sampling rate or sample count")]
    RecordMismatch,

    // ---- pipeline / clustering ----
    #[error("need at least two distinct labels")]
    SingleLabel,
    #[error("embedding result is empty")]
    EmptyResult,
    #[error("corpus has no {0} records")]
    MissingChannel(String),

    // ---- files ----
    #[error("malformed header in {path}: {reason}")]
    MalformedHeader { path: String, reason: String },
    #[error("unknown condition tag `{0}`")]
    UnknownConditionTag(String),
    #[error("{path}: {got} samples but header declares {declared}")]
    SampleCountMismatch {
        path: String,
        got: usize,
        declared: usize,
    },
    #[error("parse error in {path}: {reason}")]
    Parse { path: String, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

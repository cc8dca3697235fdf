use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid size {0} is not a power of two >= 8")]
    InvalidGridSize(usize),

    #[error("interval [{lo}, {hi}] has lo > hi")]
    EmptyInterval { lo: i64, hi: i64 },

    #[error("intervals [{}, {}] and [{}, {}] overlap", .0.0, .0.1, .1.0, .1.1)]
    OverlappingIntervals((i64, i64), (i64, i64)),

    #[error("interval [{lo}, {hi}] lies outside the frequency window of N = {n}")]
    IntervalOutOfWindow { lo: i64, hi: i64, n: usize },

    #[error("shift by {shift} moves spectral mass outside the window of N = {n}")]
    SpectrumOverflow { shift: i64, n: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("grid mismatch: expected N = {expected}, got N = {got}")]
    GridMismatch { expected: usize, got: usize },

    #[error("weight sample {index} is not strictly positive ({value})")]
    NonpositiveWeight { index: usize, value: f64 },

    #[error("zero denominator with nonzero numerator")]
    ZeroDenominator,

    #[error("unknown weight catalog entry `{0}`")]
    UnknownCatalogEntry(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("interval of length {0} is not a power of two")]
    NonDyadicLength(u64),

    #[error("frequency {freq} falls outside the window of N = {n}")]
    WindowOverflow { freq: i64, n: usize },

    #[error("spectrum reaches frequency {freq}, outside the covered range [{lo}, {hi}]")]
    CoverageGap { freq: i64, lo: i64, hi: i64 },

    #[error("partition contains negative frequencies (interval [{lo}, {hi}])")]
    SignMixed { lo: i64, hi: i64 },

    #[error("plan does not match the input: {0}")]
    PlanMismatch(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("parse error: {0}")]
    Parse(String),
}

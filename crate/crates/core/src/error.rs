use std::path::PathBuf;

use thiserror::Error;

use crate::series::Month;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("invalid month `{0}` (expected YYYY-MM)")]
    InvalidMonth(String),
    #[error("series `{label}` is not contiguous: {month} is missing")]
    Gap { label: String, month: Month },
    #[error("series `{label}` needs at least {needed} entries, has {got}")]
    TooShort {
        label: String,
        needed: usize,
        got: usize,
    },
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error("required column `{0}` not found in header")]
    MissingColumn(String),
    #[error("line {line}: malformed date `{value}`")]
    MalformedDate { line: u64, value: String },
    #[error("line {line}: column `{column}` has non-numeric value `{value}`")]
    NonNumeric {
        line: u64,
        column: String,
        value: String,
    },
    #[error("line {line}: duplicate date {date}")]
    DuplicateDate { line: u64, date: chrono::NaiveDate },
    #[error("column `{column}` has no values to impute from")]
    AllMissing { column: String },
    #[error("close on {date} is not positive ({value})")]
    NonPositiveClose { date: chrono::NaiveDate, value: f64 },
    #[error("line {line}: unknown {field} `{value}`")]
    UnknownLabel {
        line: u64,
        field: &'static str,
        value: String,
    },
    #[error("line {line}: missing value for required field `{field}`")]
    MissingField { line: u64, field: &'static str },
    #[error("line {line}: {message}")]
    Invalid { line: u64, message: String },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ForecastError {
    #[error("series of {len} months is too short for window {window} (need at least {})", window + 1)]
    TooShort { len: usize, window: usize },
    #[error("window length must be at least 1")]
    ZeroWindow,
    #[error("feature `{feature}` has no value for {month}")]
    MissingFeature { feature: String, month: Month },
    #[error("forecaster spec: {0}")]
    InvalidSpec(String),
    #[error("initial training size {initial} leaves no samples to predict out of {len}")]
    NoTestSamples { initial: usize, len: usize },
    #[error("no replayed prediction for {0}")]
    MissingReplay(Month),
    #[error("need at least 2 overlapping months, found {0}")]
    InsufficientOverlap(usize),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StrategyError {
    #[error("price must be positive (predicted {pred}, current {now})")]
    NonPositivePrice { pred: f64, now: f64 },
    #[error("no current close for {0}")]
    MissingPrice(Month),
    #[error("active position in {signal_month} but no return realized in {return_month}")]
    MissingReturn {
        signal_month: Month,
        return_month: Month,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("return {value} in {month} wipes out the portfolio")]
    Wipeout { month: Month, value: f64 },
    #[error("need at least {needed} returns, have {got}")]
    Insufficient { needed: usize, got: usize },
    #[error("Sharpe ratio undefined: returns have zero standard deviation")]
    UndefinedSharpe,
    #[error("no months with an active position and a realized return")]
    NoActiveMonths,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegimeError {
    #[error("volatility range is degenerate (min = max = {0})")]
    DegenerateRange(f64),
    #[error("need at least 2 volatility observations, have {0}")]
    TooFewObservations(usize),
    #[error("threshold fractions must satisfy 0 <= low < high <= 1, got ({low}, {high})")]
    InvalidFractions { low: f64, high: f64 },
    #[error("thresholds must satisfy low < high, got ({low}, {high})")]
    InvalidThresholds { low: f64, high: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopicError {
    #[error("topic set is empty")]
    EmptyTopicSet,
    #[error("subset size range {min}..={max} is invalid for {universe} topics")]
    InvalidSizeRange { min: usize, max: usize, universe: usize },
    #[error("unknown topic `{0}`")]
    UnknownTopic(String),
    #[error("no headline carries a topic label")]
    NoLabeledTopics,
}

/// Any failure from the library, grouped by the stage that raised it.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Forecast(#[from] ForecastError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Regime(#[from] RegimeError),
    #[error(transparent)]
    Topic(#[from] TopicError),
}

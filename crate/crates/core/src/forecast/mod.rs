//! Next-month price forecasting: rolling input windows, walk-forward
//! evaluation, built-in baseline forecasters, replay of externally produced
//! predictions, point-forecast metrics and grid search.

mod grid;
mod metrics;
mod model;
mod walk;
mod window;

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{ForecastError, IngestError};
use crate::ingest::normalize_source;
use crate::series::{Month, MonthlySeries};

pub use grid::{
    grid_search, CellEvaluator, ForecastData, ForecastRun, GridResult, GridSpec, GridTemplate,
    WalkForwardEvaluator,
};
pub use metrics::{point_metrics, point_metrics_aligned, PointMetrics};
pub use model::{ArLs, Forecaster, Persistence, PredictError, Replay, RidgeWindow};
pub use walk::{walk_forward, TrainingWindow, WalkForwardConfig, WalkForwardRun, DEFAULT_INITIAL_TRAIN};
pub use window::{build_windows, Sample, WindowInput, WindowedDataset};

/// Default rolling input window lengths, in months.
pub const DEFAULT_WINDOWS: [usize; 4] = [1, 3, 6, 12];

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    /// Next close equals the current close.
    Persistence,
    /// Autoregression on closes fit by least squares.
    ArLs,
    /// Ridge regression on the flattened feature window.
    RidgeWindow,
    /// Predictions produced elsewhere and replayed from a file.
    External(String),
}

impl Family {
    pub fn id(&self) -> &str {
        match self {
            Family::Persistence => "persistence",
            Family::ArLs => "ar_ls",
            Family::RidgeWindow => "ridge_window",
            Family::External(name) => name,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Family {
    type Err = ForecastError;

    /// Built-in names, `external`, `external:<model>`, or one of the common
    /// neural model names (replayed as external).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s {
            "persistence" => Ok(Family::Persistence),
            "ar_ls" => Ok(Family::ArLs),
            "ridge_window" => Ok(Family::RidgeWindow),
            "external" => Ok(Family::External("external".into())),
            "lstm" | "bilstm" | "convlstm" | "gru" | "tft" => Ok(Family::External(s.into())),
            other => match other.strip_prefix("external:") {
                Some(name) if !name.is_empty() => Ok(Family::External(name.into())),
                _ => Err(ForecastError::InvalidSpec(format!("unknown family `{other}`"))),
            },
        }
    }
}

impl Serialize for Family {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Family::External(name) if !matches!(name.as_str(), "lstm" | "bilstm" | "convlstm" | "gru" | "tft" | "external") => {
                serializer.collect_str(&format_args!("external:{name}"))
            }
            other => serializer.serialize_str(other.id()),
        }
    }
}

impl<'de> Deserialize<'de> for Family {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Which inputs a forecaster sees.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FeatureSet {
    TabularOnly,
    /// Tabular features plus the monthly sentiment score of one source.
    WithSentiment(String),
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureSet::TabularOnly => f.write_str("no-sentiment"),
            FeatureSet::WithSentiment(src) => f.write_str(src),
        }
    }
}

impl FromStr for FeatureSet {
    type Err = ForecastError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "" => Err(ForecastError::InvalidSpec("empty feature set".into())),
            "no-sentiment" | "none" | "tabular" => Ok(FeatureSet::TabularOnly),
            src => Ok(FeatureSet::WithSentiment(normalize_source(src))),
        }
    }
}

impl Serialize for FeatureSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FeatureSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?.parse().map_err(serde::de::Error::custom)
    }
}

/// A forecaster configuration. Unknown hyperparameters (hidden size, layer
/// count, dropout of replayed neural models) are carried through untouched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecasterSpec {
    pub family: Family,
    #[serde(default)]
    pub hyperparams: BTreeMap<String, f64>,
    pub feature_set: FeatureSet,
    pub window_len: usize,
}

impl ForecasterSpec {
    pub fn new(family: Family, feature_set: FeatureSet, window_len: usize) -> Self {
        Self {
            family,
            hyperparams: BTreeMap::new(),
            feature_set,
            window_len,
        }
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.hyperparams.insert(key.to_string(), value);
        self
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.hyperparams.get(key).copied()
    }

    /// `k=v;k=v` in key order.
    pub fn hyperparam_key(&self) -> String {
        self.hyperparams
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";")
    }

    /// Unique identifier of this cell, e.g. `lstm|reuters|w3|hidden_size=16`.
    pub fn cell_key(&self) -> String {
        format!(
            "{}|{}|w{}|{}",
            self.family,
            self.feature_set,
            self.window_len,
            self.hyperparam_key()
        )
    }

    pub fn validate(&self) -> Result<(), ForecastError> {
        if self.window_len == 0 {
            return Err(ForecastError::ZeroWindow);
        }
        match self.family {
            Family::ArLs => {
                let order = self
                    .param("order")
                    .ok_or_else(|| ForecastError::InvalidSpec("ar_ls requires `order`".into()))?;
                if order < 1.0 || order.fract() != 0.0 {
                    return Err(ForecastError::InvalidSpec(format!(
                        "ar_ls order must be a positive integer, got {order}"
                    )));
                }
            }
            Family::RidgeWindow => {
                let lambda = self
                    .param("lambda")
                    .ok_or_else(|| ForecastError::InvalidSpec("ridge_window requires `lambda`".into()))?;
                if !(lambda >= 0.0) {
                    return Err(ForecastError::InvalidSpec(format!(
                        "ridge_window lambda must be non-negative, got {lambda}"
                    )));
                }
            }
            Family::Persistence | Family::External(_) => {}
        }
        Ok(())
    }

    /// Instantiates a built-in forecaster, or a replay over `replay` for the
    /// external family.
    pub fn build(&self, replay: Option<&MonthlySeries>) -> Result<Box<dyn Forecaster>, ForecastError> {
        self.validate()?;
        Ok(match &self.family {
            Family::Persistence => Box::new(Persistence),
            Family::ArLs => Box::new(ArLs {
                order: self.param("order").unwrap_or(1.0) as usize,
                intercept: self.param("intercept").unwrap_or(1.0) != 0.0,
            }),
            Family::RidgeWindow => Box::new(RidgeWindow {
                lambda: self.param("lambda").unwrap_or(0.0),
            }),
            Family::External(name) => {
                let series = replay.ok_or_else(|| {
                    ForecastError::InvalidSpec(format!("external family `{name}` needs a predictions file"))
                })?;
                Box::new(Replay::new(series.clone()))
            }
        })
    }
}

/// Forecasts keyed by the month they were issued in: the entry for month
/// `t` is the predicted close of month `t + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionSeries {
    pub spec: ForecasterSpec,
    pub entries: MonthlySeries,
}

impl PredictionSeries {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `month,predicted_close`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("month,predicted_close\n");
        for (m, v) in self.entries.iter() {
            out.push_str(&format!("{m},{v}\n"));
        }
        out
    }
}

/// Replays an external prediction file unchanged.
pub fn replay(spec: ForecasterSpec, predictions: &MonthlySeries) -> PredictionSeries {
    PredictionSeries {
        spec,
        entries: predictions.clone(),
    }
}

pub fn load_predictions(path: &Path) -> Result<MonthlySeries, IngestError> {
    let file = std::fs::File::open(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_predictions(file)
}

/// Parses `month,predicted_close`, where `month` is the issue month.
pub fn parse_predictions<R: Read>(reader: R) -> Result<MonthlySeries, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| IngestError::Csv {
        line: 1,
        message: e.to_string(),
    })?;
    let month_idx = headers
        .iter()
        .position(|h| h == "month")
        .ok_or_else(|| IngestError::MissingColumn("month".into()))?;
    let pred_idx = headers
        .iter()
        .position(|h| h == "predicted_close")
        .ok_or_else(|| IngestError::MissingColumn("predicted_close".into()))?;
    let mut out = MonthlySeries::new("predicted_close");
    for record in rdr.records() {
        let record = record.map_err(|e| IngestError::Csv {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let raw_month = record.get(month_idx).unwrap_or("");
        let month: Month = raw_month.parse().map_err(|_| IngestError::MalformedDate {
            line,
            value: raw_month.to_string(),
        })?;
        let raw = record.get(pred_idx).unwrap_or("");
        let value = raw
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| IngestError::NonNumeric {
                line,
                column: "predicted_close".into(),
                value: raw.to_string(),
            })?;
        if out.insert(month, value).is_some() {
            return Err(IngestError::Invalid {
                line,
                message: format!("duplicate month {month}"),
            });
        }
    }
    Ok(out)
}

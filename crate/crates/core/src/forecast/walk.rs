use serde::{Deserialize, Serialize};

use super::model::{Forecaster, PredictError};
use super::window::WindowedDataset;
use super::{ForecasterSpec, PredictionSeries};
use crate::error::ForecastError;
use crate::series::MonthlySeries;

pub const DEFAULT_INITIAL_TRAIN: usize = 8;

/// Which past samples each refit sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "size")]
pub enum TrainingWindow {
    /// All samples before the prediction step.
    #[default]
    Expanding,
    /// Only the most recent `n` samples.
    Rolling(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WalkForwardConfig {
    pub initial_train: usize,
    pub training: TrainingWindow,
}

impl Default for WalkForwardConfig {
    fn default() -> Self {
        Self {
            initial_train: DEFAULT_INITIAL_TRAIN,
            training: TrainingWindow::Expanding,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkForwardRun {
    pub predictions: PredictionSeries,
    /// One entry per step that fell back to persistence.
    pub warnings: Vec<String>,
}

/// Refit-and-predict over the dataset: for every step `t >= initial_train`
/// the forecaster sees samples before `t` and predicts sample `t`'s target.
/// A degenerate fit falls back to persistence for that step.
pub fn walk_forward(
    spec: &ForecasterSpec,
    forecaster: &dyn Forecaster,
    dataset: &WindowedDataset,
    config: &WalkForwardConfig,
) -> Result<WalkForwardRun, ForecastError> {
    if config.initial_train == 0 {
        return Err(ForecastError::InvalidSpec("initial_train must be at least 1".into()));
    }
    if config.initial_train >= dataset.len() {
        return Err(ForecastError::NoTestSamples {
            initial: config.initial_train,
            len: dataset.len(),
        });
    }
    let mut entries = MonthlySeries::new("predicted_close");
    let mut warnings = Vec::new();
    for t in config.initial_train..dataset.len() {
        let start = match config.training {
            TrainingWindow::Expanding => 0,
            TrainingWindow::Rolling(n) => t.saturating_sub(n.max(1)),
        };
        let query = &dataset.samples[t].input;
        let pred = match forecaster.predict(&dataset.samples[start..t], query) {
            Ok(p) if p.is_finite() => p,
            Ok(p) => {
                warnings.push(format!("{}: non-finite prediction {p}, using persistence", query.month));
                query.last_close
            }
            Err(PredictError::Degenerate(why)) => {
                warnings.push(format!("{}: {why}, using persistence", query.month));
                query.last_close
            }
            Err(PredictError::Fatal(e)) => return Err(e),
        };
        entries.insert(query.month, pred);
    }
    Ok(WalkForwardRun {
        predictions: PredictionSeries {
            spec: spec.clone(),
            entries,
        },
        warnings,
    })
}

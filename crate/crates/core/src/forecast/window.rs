use serde::{Deserialize, Serialize};

use crate::error::{ForecastError, SeriesError};
use crate::series::{Month, MonthlySeries};

/// Everything known when a forecast is issued at the end of `month`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowInput {
    /// Last month of the input window, i.e. the issue month.
    pub month: Month,
    /// `window_len` rows of feature values, oldest first.
    pub rows: Vec<Vec<f64>>,
    /// Close of the issue month.
    pub last_close: f64,
}

impl WindowInput {
    pub fn flatten(&self) -> Vec<f64> {
        self.rows.iter().flatten().copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub input: WindowInput,
    pub target_month: Month,
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowedDataset {
    pub window_len: usize,
    pub feature_names: Vec<String>,
    pub samples: Vec<Sample>,
}

impl WindowedDataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Sample `i` takes feature rows for months `[i, i + window_len)` and targets
/// the close of month `i + window_len`.
pub fn build_windows(
    features: &[MonthlySeries],
    target: &MonthlySeries,
    window_len: usize,
) -> Result<WindowedDataset, ForecastError> {
    if window_len == 0 {
        return Err(ForecastError::ZeroWindow);
    }
    if let Some(month) = target.first_gap() {
        return Err(SeriesError::Gap {
            label: target.label.clone(),
            month,
        }
        .into());
    }
    let points: Vec<(Month, f64)> = target.iter().collect();
    if points.len() < window_len + 1 {
        return Err(ForecastError::TooShort {
            len: points.len(),
            window: window_len,
        });
    }

    // feature matrix over every month that can appear in an input window
    let input_months = &points[..points.len() - 1];
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(input_months.len());
    for (m, _) in input_months {
        let row = features
            .iter()
            .map(|f| {
                f.get(*m).ok_or_else(|| ForecastError::MissingFeature {
                    feature: f.label.clone(),
                    month: *m,
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(row);
    }

    let samples = (0..points.len() - window_len)
        .map(|i| {
            let end = i + window_len;
            Sample {
                input: WindowInput {
                    month: points[end - 1].0,
                    rows: rows[i..end].to_vec(),
                    last_close: points[end - 1].1,
                },
                target_month: points[end].0,
                target: points[end].1,
            }
        })
        .collect();

    Ok(WindowedDataset {
        window_len,
        feature_names: features.iter().map(|f| f.label.clone()).collect(),
        samples,
    })
}

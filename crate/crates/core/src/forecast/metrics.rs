use serde::{Deserialize, Serialize};

use super::PredictionSeries;
use crate::error::ForecastError;
use crate::series::MonthlySeries;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointMetrics {
    /// `None` when the true values have zero variance.
    pub r2: Option<f64>,
    pub rmse: f64,
    pub mae: f64,
    pub n: usize,
}

/// R², RMSE and MAE over paired values.
pub fn point_metrics_aligned(truth: &[f64], pred: &[f64]) -> Result<PointMetrics, ForecastError> {
    assert_eq!(truth.len(), pred.len(), "paired slices differ in length");
    let n = truth.len();
    if n < 2 {
        return Err(ForecastError::InsufficientOverlap(n));
    }
    let mean = truth.iter().sum::<f64>() / n as f64;
    let mut sse = 0.0;
    let mut sae = 0.0;
    let mut sst = 0.0;
    for (y, yhat) in truth.iter().zip(pred) {
        let e = y - yhat;
        sse += e * e;
        sae += e.abs();
        sst += (y - mean) * (y - mean);
    }
    Ok(PointMetrics {
        r2: (sst > 0.0).then(|| 1.0 - sse / sst),
        rmse: (sse / n as f64).sqrt(),
        mae: sae / n as f64,
        n,
    })
}

/// Scores each forecast issued in month `t` against the true close of
/// `t + 1`, over months where both exist.
pub fn point_metrics(truth: &MonthlySeries, pred: &PredictionSeries) -> Result<PointMetrics, ForecastError> {
    let (ys, yhats): (Vec<f64>, Vec<f64>) = pred
        .entries
        .iter()
        .filter_map(|(m, p)| truth.get(m.next()).map(|y| (y, p)))
        .unzip();
    point_metrics_aligned(&ys, &yhats)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_fit() {
        let m = point_metrics_aligned(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(m.r2, Some(1.0));
        assert_eq!(m.rmse, 0.0);
        assert_eq!(m.mae, 0.0);
    }

    #[test]
    fn constant_prediction() {
        let m = point_metrics_aligned(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]).unwrap();
        assert!(m.r2.unwrap().abs() < 1e-12);
        assert!((m.rmse - 0.8165).abs() < 1e-4);
        assert!((m.mae - 0.6667).abs() < 1e-4);
    }

    #[test]
    fn zero_variance_truth_has_no_r2() {
        let m = point_metrics_aligned(&[2.0, 2.0], &[1.0, 3.0]).unwrap();
        assert_eq!(m.r2, None);
        assert_eq!(m.rmse, 1.0);
        assert!(point_metrics_aligned(&[1.0], &[1.0]).is_err());
    }
}

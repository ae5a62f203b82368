use nalgebra::{DMatrix, DVector};

use super::window::{Sample, WindowInput};
use crate::error::ForecastError;
use crate::series::MonthlySeries;

#[derive(Debug, Clone, PartialEq)]
pub enum PredictError {
    /// The fit is not identified; the caller falls back to persistence.
    Degenerate(String),
    Fatal(ForecastError),
}

/// A one-step-ahead forecaster. `history` holds only samples whose targets
/// are known at issue time; `query` carries no target.
pub trait Forecaster: Send + Sync {
    fn predict(&self, history: &[Sample], query: &WindowInput) -> Result<f64, PredictError>;
}

#[derive(Debug, Clone, Copy)]
pub struct Persistence;

impl Forecaster for Persistence {
    fn predict(&self, _history: &[Sample], query: &WindowInput) -> Result<f64, PredictError> {
        Ok(query.last_close)
    }
}

/// Least-squares solution with a rank check; `None` when the design is
/// numerically rank deficient.
fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    if a.nrows() < a.ncols() || a.ncols() == 0 {
        return None;
    }
    let svd = a.clone().svd(true, true);
    let max = svd.singular_values.max();
    let min = svd.singular_values.min();
    if !(max > 0.0) || min / max < 1e-10 {
        return None;
    }
    let x = svd.solve(b, 0.0).ok()?;
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// AR(p) on the close series, optionally with an intercept.
#[derive(Debug, Clone, Copy)]
pub struct ArLs {
    pub order: usize,
    pub intercept: bool,
}

impl ArLs {
    /// Close series known at issue time, oldest first.
    fn closes(history: &[Sample], query: &WindowInput) -> Vec<f64> {
        let mut c = Vec::with_capacity(history.len() + 1);
        if let Some(first) = history.first() {
            c.push(first.input.last_close);
            c.extend(history.iter().map(|s| s.target));
        } else {
            c.push(query.last_close);
        }
        c
    }

    fn lags(&self, c: &[f64], k: usize) -> Vec<f64> {
        let mut row = Vec::with_capacity(self.order + 1);
        if self.intercept {
            row.push(1.0);
        }
        row.extend((1..=self.order).map(|j| c[k - j]));
        row
    }
}

impl Forecaster for ArLs {
    fn predict(&self, history: &[Sample], query: &WindowInput) -> Result<f64, PredictError> {
        let c = Self::closes(history, query);
        let p = self.order;
        if c.len() <= p {
            return Err(PredictError::Degenerate(format!(
                "ar_ls order {p} needs more than {} closes",
                c.len()
            )));
        }
        let rows: Vec<Vec<f64>> = (p..c.len()).map(|k| self.lags(&c, k)).collect();
        let ncols = rows[0].len();
        let a = DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]);
        let b = DVector::from_iterator(rows.len(), (p..c.len()).map(|k| c[k]));
        let coef = lstsq(&a, &b)
            .ok_or_else(|| PredictError::Degenerate("ar_ls normal equations are singular".into()))?;
        let x = self.lags(&c, c.len());
        Ok(x.iter().zip(coef.iter()).map(|(a, b)| a * b).sum())
    }
}

/// Ridge regression of the next-month price change on the standardized,
/// flattened input window. The intercept is not penalized.
#[derive(Debug, Clone, Copy)]
pub struct RidgeWindow {
    pub lambda: f64,
}

impl Forecaster for RidgeWindow {
    fn predict(&self, history: &[Sample], query: &WindowInput) -> Result<f64, PredictError> {
        if history.is_empty() {
            return Err(PredictError::Degenerate("ridge_window has no training samples".into()));
        }
        let xs: Vec<Vec<f64>> = history.iter().map(|s| s.input.flatten()).collect();
        let ys: Vec<f64> = history.iter().map(|s| s.target - s.input.last_close).collect();
        let n = xs.len();
        let d = xs[0].len();

        let means: Vec<f64> = (0..d).map(|j| xs.iter().map(|x| x[j]).sum::<f64>() / n as f64).collect();
        let scales: Vec<f64> = (0..d)
            .map(|j| {
                let ss: f64 = xs.iter().map(|x| (x[j] - means[j]).powi(2)).sum();
                (ss / n as f64).sqrt()
            })
            .collect();
        let active: Vec<usize> = (0..d).filter(|&j| scales[j] > 1e-12).collect();
        let y_mean = ys.iter().sum::<f64>() / n as f64;
        if active.is_empty() {
            return Ok(query.last_close + y_mean);
        }

        // augmented least squares: [Z; sqrt(lambda) I] beta = [y; 0]
        let k = active.len();
        let extra = if self.lambda > 0.0 { k } else { 0 };
        let root = self.lambda.sqrt();
        let a = DMatrix::from_fn(n + extra, k, |i, c| {
            if i < n {
                let j = active[c];
                (xs[i][j] - means[j]) / scales[j]
            } else if i - n == c {
                root
            } else {
                0.0
            }
        });
        let b = DVector::from_fn(n + extra, |i, _| if i < n { ys[i] - y_mean } else { 0.0 });
        let beta = lstsq(&a, &b)
            .ok_or_else(|| PredictError::Degenerate("ridge_window system is singular".into()))?;

        let q = query.flatten();
        let delta: f64 = active
            .iter()
            .zip(beta.iter())
            .map(|(&j, b)| (q[j] - means[j]) / scales[j] * b)
            .sum();
        Ok(query.last_close + y_mean + delta)
    }
}

/// Looks up externally produced predictions by issue month.
#[derive(Debug, Clone)]
pub struct Replay {
    predictions: MonthlySeries,
}

impl Replay {
    pub fn new(predictions: MonthlySeries) -> Self {
        Self { predictions }
    }
}

impl Forecaster for Replay {
    fn predict(&self, _history: &[Sample], query: &WindowInput) -> Result<f64, PredictError> {
        self.predictions
            .get(query.month)
            .ok_or(PredictError::Fatal(ForecastError::MissingReplay(query.month)))
    }
}

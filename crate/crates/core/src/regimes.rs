//! Volatility regimes: trailing rolling volatility of monthly returns,
//! range-fraction thresholds, and regime-conditional reports.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{EvalError, RegimeError};
use crate::evaluation::{sample_stdev, ReportOutcome, RiskFree, MONTHS_PER_YEAR};
use crate::series::{Month, MonthlySeries};
use crate::strategy::PortfolioPath;

pub const DEFAULT_VOL_WINDOW: usize = 6;
pub const DEFAULT_LOW_FRACTION: f64 = 0.20;
pub const DEFAULT_HIGH_FRACTION: f64 = 0.50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Low,
    Medium,
    High,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::Low, Regime::Medium, Regime::High];

    pub fn id(self) -> &'static str {
        match self {
            Regime::Low => "low",
            Regime::Medium => "medium",
            Regime::High => "high",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// Annualized sample standard deviation of the trailing `window` returns,
/// labeling the last month of the window. Months without a full contiguous
/// trailing window are skipped.
pub fn rolling_volatility(returns: &MonthlySeries, window: usize) -> MonthlySeries {
    let mut out = MonthlySeries::new("volatility");
    if window < 2 {
        return out;
    }
    let points: Vec<(Month, f64)> = returns.iter().collect();
    for chunk in points.windows(window) {
        let first = chunk[0].0;
        let last = chunk[window - 1].0;
        if first.months_until(last) != (window - 1) as i64 {
            continue;
        }
        let vals: Vec<f64> = chunk.iter().map(|(_, r)| *r).collect();
        out.insert(last, sample_stdev(&vals) * MONTHS_PER_YEAR.sqrt());
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub low_medium: f64,
    pub medium_high: f64,
}

impl Thresholds {
    pub fn new(low_medium: f64, medium_high: f64) -> Result<Self, RegimeError> {
        if !(low_medium < medium_high) {
            return Err(RegimeError::InvalidThresholds {
                low: low_medium,
                high: medium_high,
            });
        }
        Ok(Self {
            low_medium,
            medium_high,
        })
    }

    /// Low includes the lower threshold, medium includes the upper one.
    pub fn classify(&self, vol: f64) -> Regime {
        if vol <= self.low_medium {
            Regime::Low
        } else if vol <= self.medium_high {
            Regime::Medium
        } else {
            Regime::High
        }
    }
}

/// Thresholds at fixed fractions of the observed `[min, max]` range.
pub fn regime_thresholds(
    vol: &MonthlySeries,
    low_fraction: f64,
    high_fraction: f64,
) -> Result<Thresholds, RegimeError> {
    if !(0.0..=1.0).contains(&low_fraction)
        || !(0.0..=1.0).contains(&high_fraction)
        || low_fraction >= high_fraction
    {
        return Err(RegimeError::InvalidFractions {
            low: low_fraction,
            high: high_fraction,
        });
    }
    if vol.len() < 2 {
        return Err(RegimeError::TooFewObservations(vol.len()));
    }
    let (min, max) = vol
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, v)| (lo.min(v), hi.max(v)));
    thresholds_from_range(min, max, low_fraction, high_fraction)
}

pub fn thresholds_from_range(
    min: f64,
    max: f64,
    low_fraction: f64,
    high_fraction: f64,
) -> Result<Thresholds, RegimeError> {
    if !(max - min > 1e-12 * max.abs()) {
        return Err(RegimeError::DegenerateRange(min));
    }
    let span = max - min;
    Thresholds::new(min + low_fraction * span, min + high_fraction * span)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimePartition {
    pub volatility: MonthlySeries,
    pub thresholds: Thresholds,
    pub labels: BTreeMap<Month, Regime>,
    pub counts: BTreeMap<Regime, usize>,
}

impl RegimePartition {
    pub fn label(&self, month: Month) -> Option<Regime> {
        self.labels.get(&month).copied()
    }

    /// `month,volatility,regime`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("month,volatility,regime\n");
        for (m, v) in self.volatility.iter() {
            out.push_str(&format!("{m},{v},{}\n", self.labels[&m]));
        }
        out
    }
}

pub fn classify_regimes(vol: &MonthlySeries, thresholds: Thresholds) -> RegimePartition {
    let labels: BTreeMap<Month, Regime> = vol
        .iter()
        .map(|(m, v)| (m, thresholds.classify(v)))
        .collect();
    let mut counts: BTreeMap<Regime, usize> = Regime::ALL.iter().map(|&r| (r, 0)).collect();
    for r in labels.values() {
        *counts.entry(*r).or_default() += 1;
    }
    RegimePartition {
        volatility: vol.clone(),
        thresholds,
        labels,
        counts,
    }
}

/// Restricts a path to the realization months carrying `regime`.
pub fn path_in_regime(path: &PortfolioPath, partition: &RegimePartition, regime: Regime) -> PortfolioPath {
    let keep = |m: &Month| partition.label(*m) == Some(regime);
    let pick = |s: &MonthlySeries| MonthlySeries::from_pairs(s.label.clone(), s.iter().filter(|(m, _)| keep(m)));
    let period_returns = pick(&path.period_returns);
    // regime sub-paths are not contiguous, so values are recompounded from 100
    let mut value = crate::strategy::START_VALUE;
    let values = MonthlySeries::from_pairs(
        "value",
        period_returns.iter().map(|(m, r)| {
            value *= 1.0 + r;
            (m, value)
        }),
    );
    PortfolioPath {
        values,
        period_returns,
        positions: path
            .positions
            .iter()
            .filter(|(m, _)| keep(m))
            .map(|(m, p)| (*m, *p))
            .collect(),
        asset_returns: pick(&path.asset_returns),
    }
}

/// One outcome per regime; a regime with fewer than two returns is marked
/// insufficient.
pub fn regime_report(
    path: &PortfolioPath,
    partition: &RegimePartition,
    risk_free: &RiskFree,
) -> Result<BTreeMap<Regime, ReportOutcome>, EvalError> {
    Regime::ALL
        .iter()
        .map(|&r| {
            let sub = path_in_regime(path, partition, r);
            ReportOutcome::from_path(&sub, risk_free).map(|o| (r, o))
        })
        .collect()
}

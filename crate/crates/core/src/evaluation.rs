//! Performance metrics: compounded return, Sharpe ratio with its asymptotic
//! standard error, directional hit rate and the exact binomial test.

use serde::{Deserialize, Serialize};

use crate::error::EvalError;
use crate::series::{Month, MonthlySeries};
use crate::strategy::{PortfolioPath, Position, SignalSeries};

pub const MONTHS_PER_YEAR: f64 = 12.0;

/// `prod(1 + R_t) - 1`. A return at or below -100% is rejected.
pub fn cumulative_return(returns: &MonthlySeries) -> Result<f64, EvalError> {
    if returns.is_empty() {
        return Err(EvalError::Insufficient { needed: 1, got: 0 });
    }
    let mut growth = 1.0;
    for (month, r) in returns.iter() {
        if r <= -1.0 {
            return Err(EvalError::Wipeout { month, value: r });
        }
        growth *= 1.0 + r;
    }
    Ok(growth - 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskFree {
    Constant(f64),
    Monthly(MonthlySeries),
}

impl Default for RiskFree {
    fn default() -> Self {
        RiskFree::Constant(0.0)
    }
}

impl RiskFree {
    fn at(&self, month: Month) -> Option<f64> {
        match self {
            RiskFree::Constant(r) => Some(*r),
            RiskFree::Monthly(s) => s.get(month),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SharpeStats {
    pub sharpe: f64,
    pub se: f64,
    pub annualized: f64,
    pub mean: f64,
    pub stdev: f64,
    pub n: usize,
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample (n - 1) standard deviation.
pub fn sample_stdev(xs: &[f64]) -> f64 {
    let mu = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - mu) * (x - mu)).sum();
    (ss / (xs.len() as f64 - 1.0)).sqrt()
}

/// `sqrt((1 + SR^2 / 2) / n)`.
pub fn sharpe_se(sharpe: f64, n: usize) -> f64 {
    ((1.0 + sharpe * sharpe / 2.0) / n as f64).sqrt()
}

/// Monthly Sharpe ratio `(mean - R_f) / s` on a slice of returns.
pub fn sharpe_of(returns: &[f64], risk_free: f64) -> Result<SharpeStats, EvalError> {
    let excess: Vec<f64> = returns.iter().map(|r| r - risk_free).collect();
    sharpe_of_excess(&excess, risk_free)
}

fn sharpe_of_excess(excess: &[f64], rf_mean: f64) -> Result<SharpeStats, EvalError> {
    let n = excess.len();
    if n < 2 {
        return Err(EvalError::Insufficient { needed: 2, got: n });
    }
    let mu = mean(excess);
    let s = sample_stdev(excess);
    if !(s > 0.0) {
        return Err(EvalError::UndefinedSharpe);
    }
    let sr = mu / s;
    Ok(SharpeStats {
        sharpe: sr,
        se: sharpe_se(sr, n),
        annualized: sr * MONTHS_PER_YEAR.sqrt(),
        mean: mu + rf_mean,
        stdev: s,
        n,
    })
}

/// Sharpe ratio over a monthly return series. With a monthly risk-free
/// series the ratio is taken on excess returns month by month.
pub fn sharpe(returns: &MonthlySeries, risk_free: &RiskFree) -> Result<SharpeStats, EvalError> {
    match risk_free {
        RiskFree::Constant(rf) => sharpe_of(&returns.values(), *rf),
        RiskFree::Monthly(_) => {
            let mut excess = Vec::with_capacity(returns.len());
            let mut rf_sum = 0.0;
            for (m, r) in returns.iter() {
                // months without a risk-free quote count as zero
                let rf = risk_free.at(m).unwrap_or(0.0);
                rf_sum += rf;
                excess.push(r - rf);
            }
            let rf_mean = if excess.is_empty() { 0.0 } else { rf_sum / excess.len() as f64 };
            sharpe_of_excess(&excess, rf_mean)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HitStats {
    pub rate: f64,
    pub hits: u64,
    pub n_active: u64,
    pub p_value: f64,
}

fn hit_stats(pairs: impl Iterator<Item = (Position, f64)>) -> Result<HitStats, EvalError> {
    let mut hits = 0u64;
    let mut n = 0u64;
    for (pos, r) in pairs.filter(|(p, _)| p.is_active()) {
        n += 1;
        if Position::from_sign(r) == pos {
            hits += 1;
        }
    }
    if n == 0 {
        return Err(EvalError::NoActiveMonths);
    }
    Ok(HitStats {
        rate: hits as f64 / n as f64,
        hits,
        n_active: n,
        p_value: binomial_test_two_sided(hits, n, 0.5),
    })
}

/// Share of active months whose position sign matches the next month's
/// return sign. A zero return counts as a miss.
pub fn hit_rate(signals: &SignalSeries, returns: &MonthlySeries) -> Result<HitStats, EvalError> {
    hit_stats(
        signals
            .iter()
            .filter_map(|(m, p)| returns.get(m.next()).map(|r| (p, r))),
    )
}

fn ln_choose_table(n: u64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut acc = 0.0;
    out.push(acc);
    for i in 0..n {
        acc += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
        out.push(acc);
    }
    out
}

/// Exact two-sided binomial test: total probability of outcomes no more
/// likely than `k` under `Binomial(n, p)`.
pub fn binomial_test_two_sided(k: u64, n: u64, p: f64) -> f64 {
    assert!(k <= n, "successes exceed trials");
    if n == 0 {
        return 1.0;
    }
    if p <= 0.0 || p >= 1.0 {
        let expected = if p <= 0.0 { 0 } else { n };
        return if k == expected { 1.0 } else { 0.0 };
    }
    let lnc = ln_choose_table(n);
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let ln_pmf = |i: u64| lnc[i as usize] + i as f64 * lp + (n - i) as f64 * lq;
    let observed = ln_pmf(k);
    // relative slack so that mirror outcomes tie despite rounding
    let cutoff = observed + 1e-7;
    let total: f64 = (0..=n)
        .map(ln_pmf)
        .filter(|&l| l <= cutoff)
        .map(f64::exp)
        .sum();
    total.min(1.0)
}

/// Headline metrics for one strategy. Undefined quantities are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyReport {
    pub cumulative_return: f64,
    pub sharpe: Option<f64>,
    pub sharpe_se: Option<f64>,
    pub sharpe_annualized: Option<f64>,
    pub hit_rate: Option<f64>,
    pub hits: u64,
    pub n_active: u64,
    pub p_value: Option<f64>,
    pub n_months: usize,
    pub mean_return: f64,
    pub stdev_return: Option<f64>,
}

impl StrategyReport {
    pub fn from_path(path: &PortfolioPath, risk_free: &RiskFree) -> Result<Self, EvalError> {
        let n = path.period_returns.len();
        if n == 0 {
            return Err(EvalError::Insufficient { needed: 1, got: 0 });
        }
        let cumulative = cumulative_return(&path.period_returns)?;
        let rets = path.period_returns.values();
        let sr = sharpe(&path.period_returns, risk_free).ok();
        let hits = hit_stats(path.positions.iter().filter_map(|(m, &p)| {
            path.asset_returns.get(*m).map(|r| (p, r))
        }))
        .ok();
        Ok(Self {
            cumulative_return: cumulative,
            sharpe: sr.map(|s| s.sharpe),
            sharpe_se: sr.map(|s| s.se),
            sharpe_annualized: sr.map(|s| s.annualized),
            hit_rate: hits.map(|h| h.rate),
            hits: hits.map_or(0, |h| h.hits),
            n_active: hits.map_or(0, |h| h.n_active),
            p_value: hits.map(|h| h.p_value),
            n_months: n,
            mean_return: mean(&rets),
            stdev_return: (n >= 2).then(|| sample_stdev(&rets)),
        })
    }
}

/// A report, or the reason none could be produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ReportOutcome {
    Report(StrategyReport),
    InsufficientData { n_months: usize },
    Missing,
}

impl ReportOutcome {
    /// Full report when at least two returns exist, otherwise an
    /// insufficient-data marker.
    pub fn from_path(path: &PortfolioPath, risk_free: &RiskFree) -> Result<Self, EvalError> {
        let n = path.period_returns.len();
        if n < 2 {
            return Ok(ReportOutcome::InsufficientData { n_months: n });
        }
        StrategyReport::from_path(path, risk_free).map(ReportOutcome::Report)
    }

    pub fn report(&self) -> Option<&StrategyReport> {
        match self {
            ReportOutcome::Report(r) => Some(r),
            _ => None,
        }
    }

    pub fn sharpe(&self) -> Option<f64> {
        self.report().and_then(|r| r.sharpe)
    }
}

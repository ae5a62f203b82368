//! Position signals and portfolio simulation.
//!
//! A signal formed at the end of month `t` earns the asset return realized
//! over `t -> t+1`. All path quantities are keyed by that realization month.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::StrategyError;
use crate::series::{Month, MonthlySeries};

pub const START_VALUE: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Position {
    Short,
    Flat,
    Long,
}

impl Position {
    pub fn value(self) -> i8 {
        match self {
            Position::Short => -1,
            Position::Flat => 0,
            Position::Long => 1,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.value() as f64
    }

    /// Sign of `x`; zero (and NaN) map to flat.
    pub fn from_sign(x: f64) -> Self {
        if x > 0.0 {
            Position::Long
        } else if x < 0.0 {
            Position::Short
        } else {
            Position::Flat
        }
    }

    pub fn is_active(self) -> bool {
        self != Position::Flat
    }
}

impl std::ops::Neg for Position {
    type Output = Position;

    fn neg(self) -> Position {
        match self {
            Position::Short => Position::Long,
            Position::Flat => Position::Flat,
            Position::Long => Position::Short,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalOrigin {
    SentimentOnly,
    PriceBased,
    BuyAndHold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSeries {
    pub origin: SignalOrigin,
    pub entries: BTreeMap<Month, Position>,
}

impl SignalSeries {
    pub fn new(origin: SignalOrigin) -> Self {
        Self {
            origin,
            entries: BTreeMap::new(),
        }
    }

    pub fn get(&self, month: Month) -> Option<Position> {
        self.entries.get(&month).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Month, Position)> + '_ {
        self.entries.iter().map(|(&m, &p)| (m, p))
    }

    pub fn negated(&self) -> Self {
        Self {
            origin: self.origin,
            entries: self.entries.iter().map(|(&m, &p)| (m, -p)).collect(),
        }
    }
}

/// What a sentiment strategy does in a month with no score.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    #[default]
    Flat,
    HoldLast,
}

/// Sign of the sentiment score, only for months that have a score.
pub fn sentiment_signal(sent: &MonthlySeries) -> SignalSeries {
    SignalSeries {
        origin: SignalOrigin::SentimentOnly,
        entries: sent.iter().map(|(m, s)| (m, Position::from_sign(s))).collect(),
    }
}

/// Sentiment signal over a full calendar, filling months without a score
/// according to `policy`.
pub fn sentiment_signal_over(
    sent: &MonthlySeries,
    calendar: impl IntoIterator<Item = Month>,
    policy: MissingPolicy,
) -> SignalSeries {
    let mut out = SignalSeries::new(SignalOrigin::SentimentOnly);
    let mut last = Position::Flat;
    for m in calendar {
        let pos = match (sent.get(m), policy) {
            (Some(s), _) => Position::from_sign(s),
            (None, MissingPolicy::Flat) => Position::Flat,
            (None, MissingPolicy::HoldLast) => last,
        };
        last = pos;
        out.entries.insert(m, pos);
    }
    out
}

/// Long when the forecast is above today's price, short when below.
pub fn price_signal(pred_next: f64, true_now: f64) -> Result<Position, StrategyError> {
    if !(pred_next > 0.0 && true_now > 0.0) {
        return Err(StrategyError::NonPositivePrice {
            pred: pred_next,
            now: true_now,
        });
    }
    Ok(if pred_next > true_now {
        Position::Long
    } else if pred_next < true_now {
        Position::Short
    } else {
        Position::Flat
    })
}

/// Signals from forecasts keyed by the month they were issued in.
pub fn price_signals(
    predictions: &MonthlySeries,
    closes: &MonthlySeries,
) -> Result<SignalSeries, StrategyError> {
    let mut out = SignalSeries::new(SignalOrigin::PriceBased);
    for (m, pred) in predictions.iter() {
        let now = closes.get(m).ok_or(StrategyError::MissingPrice(m))?;
        out.entries.insert(m, price_signal(pred, now)?);
    }
    Ok(out)
}

pub fn buy_and_hold(calendar: impl IntoIterator<Item = Month>) -> SignalSeries {
    SignalSeries {
        origin: SignalOrigin::BuyAndHold,
        entries: calendar.into_iter().map(|m| (m, Position::Long)).collect(),
    }
}

/// Months that can carry a signal given a return series: every month whose
/// following month has a realized return.
pub fn signal_calendar(returns: &MonthlySeries) -> Vec<Month> {
    returns.months().map(Month::prev).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortfolioPath {
    /// Portfolio value, 100 at the first signal month.
    pub values: MonthlySeries,
    /// Strategy return per realization month.
    pub period_returns: MonthlySeries,
    /// Position held over each realization month.
    pub positions: BTreeMap<Month, Position>,
    /// Underlying asset return per realization month.
    pub asset_returns: MonthlySeries,
}

impl PortfolioPath {
    pub fn final_value(&self) -> f64 {
        self.values.iter().next_back().map_or(START_VALUE, |(_, v)| v)
    }

    pub fn start_month(&self) -> Option<Month> {
        self.values.first_month()
    }

    /// `month,value,period_return,signal`; the first row is the start month
    /// with empty return and signal.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("month,value,period_return,signal\n");
        for (m, v) in self.values.iter() {
            match (self.period_returns.get(m), self.positions.get(&m)) {
                (Some(r), Some(p)) => {
                    let _ = writeln!(out, "{m},{v},{r},{}", p.value());
                }
                _ => {
                    let _ = writeln!(out, "{m},{v},,");
                }
            }
        }
        out
    }
}

/// Compounds `signal_t * R_{t+1} - cost * |signal_t - signal_{t-1}|` from a
/// starting value of 100. A flat signal with no following return is skipped;
/// an active one is an error.
pub fn simulate(
    signals: &SignalSeries,
    returns: &MonthlySeries,
    cost_per_switch: f64,
) -> Result<PortfolioPath, StrategyError> {
    let mut values = MonthlySeries::new("value");
    let mut period_returns = MonthlySeries::new("strategy_return");
    let mut asset_returns = MonthlySeries::new("asset_return");
    let mut positions = BTreeMap::new();
    let mut value = START_VALUE;

    for (month, pos) in signals.iter() {
        let realized = month.next();
        let Some(asset) = returns.get(realized) else {
            if pos.is_active() {
                return Err(StrategyError::MissingReturn {
                    signal_month: month,
                    return_month: realized,
                });
            }
            continue;
        };
        if values.is_empty() {
            values.insert(month, value);
        }
        let prev = signals.get(month.prev()).unwrap_or(Position::Flat);
        let switch = (pos.value() - prev.value()).abs() as f64;
        let r = pos.as_f64() * asset - cost_per_switch * switch;
        value *= 1.0 + r;
        values.insert(realized, value);
        period_returns.insert(realized, r);
        asset_returns.insert(realized, asset);
        positions.insert(realized, pos);
    }

    Ok(PortfolioPath {
        values,
        period_returns,
        positions,
        asset_returns,
    })
}

//! Deterministic backtesting of sentiment-driven and forecast-driven trading
//! strategies on a monthly commodity price series.
//!
//! The pipeline runs daily prices and labeled headlines through
//! [`ingest`], aggregates monthly sentiment in [`sentiment`], produces
//! walk-forward price forecasts in [`forecast`], turns scores or forecasts
//! into positions and portfolio paths in [`strategy`], and scores them in
//! [`evaluation`]. [`regimes`] and [`topics`] slice the results by volatility
//! regime and by headline topic, event type or source.

pub mod error;
pub mod evaluation;
pub mod forecast;
pub mod ingest;
pub mod par;
pub mod regimes;
pub mod sentiment;
pub mod series;
pub mod strategy;
pub mod topics;

pub use error::Error;
pub use evaluation::{ReportOutcome, RiskFree, StrategyReport};
pub use ingest::{DailyBar, EventType, HeadlineRecord, Sentiment, Topic};
pub use sentiment::HeadlineFilter;
pub use series::{Month, MonthlySeries};
pub use strategy::{PortfolioPath, Position, SignalSeries};

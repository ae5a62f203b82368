//! Loading, imputing and monthly resampling of the daily price table and the
//! labeled headline table.
//!
//! Price CSV: header row, `date` (ISO day), `close`, then any number of named
//! feature columns. An empty cell is a missing value.
//!
//! Headline CSV: header row, `date`, `source`, `text`, `sentiment`, and the
//! optional `topic` and `event_type` columns.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{IngestError, SeriesError};
use crate::series::{Month, MonthlySeries};

const DATE_FORMAT: &str = "%Y-%m-%d";

/// One day of the price table. `None` marks a missing cell.
#[derive(Debug, Clone, PartialEq)]
pub struct DailyBar {
    pub date: NaiveDate,
    pub close: Option<f64>,
    pub features: BTreeMap<String, Option<f64>>,
}

/// Column names used to locate the date and close columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PriceSchema {
    pub date: String,
    pub close: String,
}

impl Default for PriceSchema {
    fn default() -> Self {
        Self {
            date: "date".into(),
            close: "close".into(),
        }
    }
}

fn open(path: &Path) -> Result<File, IngestError> {
    File::open(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn csv_err(e: csv::Error) -> IngestError {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    IngestError::Csv {
        line,
        message: e.to_string(),
    }
}

fn parse_date(raw: &str, line: u64) -> Result<NaiveDate, IngestError> {
    NaiveDate::parse_from_str(raw.trim(), DATE_FORMAT).map_err(|_| IngestError::MalformedDate {
        line,
        value: raw.to_string(),
    })
}

fn parse_cell(raw: &str, column: &str, line: u64) -> Result<Option<f64>, IngestError> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Ok(None);
    }
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        _ => Err(IngestError::NonNumeric {
            line,
            column: column.to_string(),
            value: raw.to_string(),
        }),
    }
}

pub fn load_prices(path: &Path, schema: &PriceSchema) -> Result<Vec<DailyBar>, IngestError> {
    parse_prices(open(path)?, schema)
}

/// Parses a price CSV. Rows come back sorted by date; a repeated date is an
/// error naming the later line.
pub fn parse_prices<R: Read>(reader: R, schema: &PriceSchema) -> Result<Vec<DailyBar>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::Headers)
        .from_reader(reader);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IngestError::MissingColumn(name.to_string()))
    };
    let date_idx = find(&schema.date)?;
    let close_idx = find(&schema.close)?;
    let feature_cols: Vec<(usize, String)> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != date_idx && *i != close_idx)
        .map(|(i, h)| (i, h.to_string()))
        .collect();

    let mut rows: Vec<(u64, DailyBar)> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let date = parse_date(record.get(date_idx).unwrap_or(""), line)?;
        let close = parse_cell(record.get(close_idx).unwrap_or(""), &schema.close, line)?;
        let mut features = BTreeMap::new();
        for (i, name) in &feature_cols {
            features.insert(name.clone(), parse_cell(record.get(*i).unwrap_or(""), name, line)?);
        }
        rows.push((line, DailyBar { date, close, features }));
    }

    rows.sort_by_key(|(line, bar)| (bar.date, *line));
    for pair in rows.windows(2) {
        if pair[0].1.date == pair[1].1.date {
            let line = pair[0].0.max(pair[1].0);
            return Err(IngestError::DuplicateDate {
                line,
                date: pair[1].1.date,
            });
        }
    }
    Ok(rows.into_iter().map(|(_, bar)| bar).collect())
}

fn fill_column(values: &mut [Option<f64>], column: &str) -> Result<(), IngestError> {
    let first = values
        .iter()
        .find_map(|v| *v)
        .ok_or_else(|| IngestError::AllMissing {
            column: column.to_string(),
        })?;
    let mut last = first;
    for v in values.iter_mut() {
        match v {
            Some(x) => last = *x,
            None => *v = Some(last),
        }
    }
    // leading gaps were filled with `first` above, which is the backward fill
    Ok(())
}

/// Forward-fills then backward-fills every column. A column with no value at
/// all is an error, as is a non-positive close after filling.
pub fn impute_missing(bars: &[DailyBar]) -> Result<Vec<DailyBar>, IngestError> {
    if bars.is_empty() {
        return Ok(Vec::new());
    }
    let mut closes: Vec<Option<f64>> = bars.iter().map(|b| b.close).collect();
    fill_column(&mut closes, "close")?;

    let names: Vec<String> = bars[0].features.keys().cloned().collect();
    let mut columns: BTreeMap<String, Vec<Option<f64>>> = BTreeMap::new();
    for name in &names {
        let mut col: Vec<Option<f64>> = bars
            .iter()
            .map(|b| b.features.get(name).copied().flatten())
            .collect();
        fill_column(&mut col, name)?;
        columns.insert(name.clone(), col);
    }

    bars.iter()
        .enumerate()
        .map(|(i, bar)| {
            let close = closes[i].expect("filled");
            if close <= 0.0 {
                return Err(IngestError::NonPositiveClose {
                    date: bar.date,
                    value: close,
                });
            }
            let features = columns
                .iter()
                .map(|(name, col)| (name.clone(), col[i]))
                .collect();
            Ok(DailyBar {
                date: bar.date,
                close: Some(close),
                features,
            })
        })
        .collect()
}

/// How daily values collapse into one monthly value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    Last,
    Mean,
}

impl Aggregation {
    fn apply(self, values: &[f64]) -> Option<f64> {
        match self {
            Aggregation::Last => values.last().copied(),
            Aggregation::Mean if values.is_empty() => None,
            Aggregation::Mean => Some(values.iter().sum::<f64>() / values.len() as f64),
        }
    }
}

impl FromStr for Aggregation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "last" => Ok(Self::Last),
            "mean" => Ok(Self::Mean),
            other => Err(format!("unknown aggregation `{other}` (expected last|mean)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct AggregationRules {
    pub close: Aggregation,
    pub features: Aggregation,
}

impl Default for AggregationRules {
    fn default() -> Self {
        Self {
            close: Aggregation::Last,
            features: Aggregation::Mean,
        }
    }
}

/// Monthly close plus one monthly series per feature column.
#[derive(Debug, Clone, PartialEq)]
pub struct MonthlyTable {
    pub close: MonthlySeries,
    pub features: BTreeMap<String, MonthlySeries>,
}

impl MonthlyTable {
    /// One bar per month dated on the first day, for feeding back into
    /// [`resample_monthly`].
    pub fn to_bars(&self) -> Vec<DailyBar> {
        self.close
            .iter()
            .map(|(m, close)| DailyBar {
                date: NaiveDate::from_ymd_opt(m.year(), m.month(), 1).expect("valid month"),
                close: Some(close),
                features: self
                    .features
                    .iter()
                    .map(|(name, s)| (name.clone(), s.get(m)))
                    .collect(),
            })
            .collect()
    }
}

pub fn resample_monthly(bars: &[DailyBar], rules: AggregationRules) -> MonthlyTable {
    let mut close_by_month: BTreeMap<Month, Vec<f64>> = BTreeMap::new();
    let mut features_by_month: BTreeMap<String, BTreeMap<Month, Vec<f64>>> = BTreeMap::new();
    for bar in bars {
        let m = Month::of_date(bar.date);
        let closes = close_by_month.entry(m).or_default();
        if let Some(c) = bar.close {
            closes.push(c);
        }
        for (name, v) in &bar.features {
            let slot = features_by_month.entry(name.clone()).or_default().entry(m).or_default();
            if let Some(v) = v {
                slot.push(*v);
            }
        }
    }
    let collapse = |label: &str, by_month: &BTreeMap<Month, Vec<f64>>, agg: Aggregation| {
        MonthlySeries::from_pairs(
            label,
            by_month
                .iter()
                .filter_map(|(m, vals)| agg.apply(vals).map(|v| (*m, v))),
        )
    };
    MonthlyTable {
        close: collapse("close", &close_by_month, rules.close),
        features: features_by_month
            .iter()
            .map(|(name, by_month)| (name.clone(), collapse(name, by_month, rules.features)))
            .collect(),
    }
}

/// `R_t = P_t / P_{t-1} - 1`, keyed to the later month. Requires a contiguous
/// series of at least two months.
pub fn simple_returns(prices: &MonthlySeries) -> Result<MonthlySeries, SeriesError> {
    if prices.len() < 2 {
        return Err(SeriesError::TooShort {
            label: prices.label.clone(),
            needed: 2,
            got: prices.len(),
        });
    }
    if let Some(month) = prices.first_gap() {
        return Err(SeriesError::Gap {
            label: prices.label.clone(),
            month,
        });
    }
    let points: Vec<(Month, f64)> = prices.iter().collect();
    Ok(MonthlySeries::from_pairs(
        format!("{} returns", prices.label),
        points.windows(2).map(|w| (w[1].0, w[1].1 / w[0].1 - 1.0)),
    ))
}

/// Like [`simple_returns`] but tolerates gaps: a month gets a return only
/// when the month before it has a price.
pub fn returns_where_defined(prices: &MonthlySeries) -> MonthlySeries {
    MonthlySeries::from_pairs(
        format!("{} returns", prices.label),
        prices
            .iter()
            .filter_map(|(m, p)| prices.get(m.prev()).map(|prev| (m, p / prev - 1.0))),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sentiment {
    Positive,
    Neutral,
    Negative,
}

impl FromStr for Sentiment {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "positive" => Ok(Self::Positive),
            "neutral" => Ok(Self::Neutral),
            "negative" => Ok(Self::Negative),
            _ => Err(()),
        }
    }
}

/// The twelve headline topic categories, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topic {
    PriceMovement,
    Environmental,
    MarketAnalysis,
    ProductionOutput,
    Macroeconomic,
    InventoryStocks,
    DemandOutlook,
    SupplyDisruption,
    CompanyNews,
    TradePolicy,
    Geopolitical,
    Other,
}

impl Topic {
    pub const ALL: [Topic; 12] = [
        Topic::PriceMovement,
        Topic::Environmental,
        Topic::MarketAnalysis,
        Topic::ProductionOutput,
        Topic::Macroeconomic,
        Topic::InventoryStocks,
        Topic::DemandOutlook,
        Topic::SupplyDisruption,
        Topic::CompanyNews,
        Topic::TradePolicy,
        Topic::Geopolitical,
        Topic::Other,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn id(self) -> &'static str {
        match self {
            Topic::PriceMovement => "price_movement",
            Topic::Environmental => "environmental",
            Topic::MarketAnalysis => "market_analysis",
            Topic::ProductionOutput => "production_output",
            Topic::Macroeconomic => "macroeconomic",
            Topic::InventoryStocks => "inventory_stocks",
            Topic::DemandOutlook => "demand_outlook",
            Topic::SupplyDisruption => "supply_disruption",
            Topic::CompanyNews => "company_news",
            Topic::TradePolicy => "trade_policy",
            Topic::Geopolitical => "geopolitical",
            Topic::Other => "other",
        }
    }
}

impl fmt::Display for Topic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

fn normalize_label(s: &str) -> String {
    s.trim()
        .to_ascii_lowercase()
        .replace([' ', '-'], "_")
}

impl FromStr for Topic {
    type Err = String;

    /// Accepts the snake_case id or its spaced form (`Price Movement`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = normalize_label(s);
        Topic::ALL
            .into_iter()
            .find(|t| t.id() == norm)
            .ok_or_else(|| s.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventType {
    ForwardLooking,
    Occurred,
}

impl EventType {
    pub const ALL: [EventType; 2] = [EventType::ForwardLooking, EventType::Occurred];

    pub fn id(self) -> &'static str {
        match self {
            EventType::ForwardLooking => "forward_looking",
            EventType::Occurred => "occurred",
        }
    }
}

impl fmt::Display for EventType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for EventType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match normalize_label(s).as_str() {
            "forward_looking" => Ok(Self::ForwardLooking),
            "occurred" => Ok(Self::Occurred),
            _ => Err(s.to_string()),
        }
    }
}

/// A dated, labeled headline. `None` topic or event type means unlabeled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadlineRecord {
    pub date: NaiveDate,
    pub source: String,
    pub text: String,
    pub sentiment: Sentiment,
    pub topic: Option<Topic>,
    pub event_type: Option<EventType>,
}

impl HeadlineRecord {
    pub fn month(&self) -> Month {
        Month::of_date(self.date)
    }
}

/// Source ids are compared case-insensitively; this is the canonical form.
pub fn normalize_source(s: &str) -> String {
    s.trim().to_ascii_lowercase()
}

pub fn load_headlines(path: &Path) -> Result<Vec<HeadlineRecord>, IngestError> {
    parse_headlines(open(path)?)
}

pub fn parse_headlines<R: Read>(reader: R) -> Result<Vec<HeadlineRecord>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::Headers)
        .from_reader(reader);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let required = |name: &str| find(name).ok_or_else(|| IngestError::MissingColumn(name.to_string()));
    let date_idx = required("date")?;
    let source_idx = required("source")?;
    let text_idx = required("text")?;
    let sentiment_idx = required("sentiment")?;
    let topic_idx = find("topic");
    let event_idx = find("event_type");

    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let get = |i: usize| record.get(i).unwrap_or("").trim();

        let date = parse_date(get(date_idx), line)?;
        let source = normalize_source(get(source_idx));
        if source.is_empty() {
            return Err(IngestError::MissingField { line, field: "source" });
        }
        let raw_sent = get(sentiment_idx);
        let sentiment = raw_sent.parse::<Sentiment>().map_err(|_| IngestError::UnknownLabel {
            line,
            field: "sentiment",
            value: raw_sent.to_string(),
        })?;
        let topic = match topic_idx.map(get) {
            None | Some("") => None,
            Some(raw) if raw.eq_ignore_ascii_case("unlabeled") => None,
            Some(raw) => Some(raw.parse::<Topic>().map_err(|value| IngestError::UnknownLabel {
                line,
                field: "topic",
                value,
            })?),
        };
        let event_type = match event_idx.map(get) {
            None | Some("") => None,
            Some(raw) if raw.eq_ignore_ascii_case("unlabeled") => None,
            Some(raw) => Some(raw.parse::<EventType>().map_err(|value| {
                IngestError::UnknownLabel {
                    line,
                    field: "event_type",
                    value,
                }
            })?),
        };
        out.push(HeadlineRecord {
            date,
            source,
            text: get(text_idx).to_string(),
            sentiment,
            topic,
            event_type,
        });
    }
    Ok(out)
}

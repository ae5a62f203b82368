//! Topic-filtered sentiment portfolios, event-type and source comparisons,
//! and exhaustive search over topic subsets.
//!
//! A topic portfolio only trades in months where at least one headline of the
//! selected topics exists; other months carry no position and no return.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{EvalError, TopicError};
use crate::evaluation::{ReportOutcome, RiskFree};
use crate::ingest::{EventType, HeadlineRecord, Topic};
use crate::par;
use crate::sentiment::{monthly_counts, HeadlineFilter, LabelCounts};
use crate::series::{Month, MonthlySeries};
use crate::strategy::{simulate, Position, SignalOrigin, SignalSeries};

/// A set of topics stored as a bitmask over canonical topic indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct TopicSet(u16);

impl TopicSet {
    pub const EMPTY: TopicSet = TopicSet(0);

    pub fn all() -> Self {
        Self::from_topics(Topic::ALL)
    }

    pub fn from_topics(topics: impl IntoIterator<Item = Topic>) -> Self {
        TopicSet(topics.into_iter().fold(0, |acc, t| acc | (1 << t.index())))
    }

    pub fn contains(self, topic: Topic) -> bool {
        self.0 & (1 << topic.index()) != 0
    }

    pub fn with(self, topic: Topic) -> Self {
        TopicSet(self.0 | (1 << topic.index()))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset_of(self, other: TopicSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn topics(self) -> impl Iterator<Item = Topic> {
        Topic::ALL.into_iter().filter(move |t| self.contains(*t))
    }

    /// Lexicographic order on the ascending canonical index lists.
    pub fn lex_cmp(self, other: TopicSet) -> std::cmp::Ordering {
        self.topics().map(Topic::index).cmp(other.topics().map(Topic::index))
    }

    pub fn parse_list(s: &str) -> Result<Self, TopicError> {
        s.split(['+', ',', ';'])
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(|p| p.parse::<Topic>().map_err(TopicError::UnknownTopic))
            .collect::<Result<Vec<_>, _>>()
            .map(Self::from_topics)
    }
}

impl fmt::Display for TopicSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<&str> = self.topics().map(Topic::id).collect();
        f.write_str(&ids.join("+"))
    }
}

impl Serialize for TopicSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.topics())
    }
}

/// Per-month, per-topic label counts for one headline population. Any
/// subset's monthly score is a ratio of summed counts.
#[derive(Debug, Clone)]
pub struct CountCache {
    months: Vec<Month>,
    counts: Vec<[LabelCounts; 12]>,
}

impl CountCache {
    /// Counts labeled headlines passing `base` (its topic set is ignored)
    /// in the months that have a realized return the following month.
    pub fn build(headlines: &[HeadlineRecord], base: &HeadlineFilter, returns: &MonthlySeries) -> Self {
        let filter = HeadlineFilter {
            topics: Default::default(),
            ..base.clone()
        };
        let mut by_month: BTreeMap<Month, [LabelCounts; 12]> = BTreeMap::new();
        for h in headlines.iter().filter(|h| filter.matches(h)) {
            let Some(topic) = h.topic else { continue };
            let m = h.month();
            if !returns.contains(m.next()) {
                continue;
            }
            by_month.entry(m).or_insert([LabelCounts::default(); 12])[topic.index()].add(h.sentiment);
        }
        Self {
            months: by_month.keys().copied().collect(),
            counts: by_month.into_values().collect(),
        }
    }

    pub fn months(&self) -> &[Month] {
        &self.months
    }

    /// Headline count per topic across all months.
    pub fn topic_totals(&self) -> [u32; 12] {
        let mut out = [0u32; 12];
        for row in &self.counts {
            for (i, c) in row.iter().enumerate() {
                out[i] += c.total();
            }
        }
        out
    }

    pub fn signals(&self, subset: TopicSet) -> SignalSeries {
        let idx: Vec<usize> = subset.topics().map(Topic::index).collect();
        let mut out = SignalSeries::new(SignalOrigin::SentimentOnly);
        for (m, row) in self.months.iter().zip(&self.counts) {
            let mut c = LabelCounts::default();
            for &i in &idx {
                c += row[i];
            }
            if let Some(score) = c.score() {
                out.entries.insert(*m, Position::from_sign(score));
            }
        }
        out
    }
}

/// Sentiment-only portfolio restricted to months with a matching headline.
/// Returns the outcome and the number of months traded.
pub fn sentiment_portfolio(
    headlines: &[HeadlineRecord],
    filter: &HeadlineFilter,
    returns: &MonthlySeries,
    risk_free: &RiskFree,
) -> Result<(ReportOutcome, usize), EvalError> {
    let mut signals = SignalSeries::new(SignalOrigin::SentimentOnly);
    for (m, c) in monthly_counts(headlines, filter) {
        if let (Some(score), true) = (c.score(), returns.contains(m.next())) {
            signals.entries.insert(m, Position::from_sign(score));
        }
    }
    outcome_for(&signals, returns, risk_free)
}

fn outcome_for(
    signals: &SignalSeries,
    returns: &MonthlySeries,
    risk_free: &RiskFree,
) -> Result<(ReportOutcome, usize), EvalError> {
    let path = simulate(signals, returns, 0.0).expect("signals restricted to months with returns");
    let n = path.period_returns.len();
    Ok((ReportOutcome::from_path(&path, risk_free)?, n))
}

pub fn topic_portfolio(
    headlines: &[HeadlineRecord],
    topics: TopicSet,
    base: &HeadlineFilter,
    returns: &MonthlySeries,
    risk_free: &RiskFree,
) -> Result<(ReportOutcome, usize), TopicPortfolioError> {
    if topics.is_empty() {
        return Err(TopicPortfolioError::Topic(TopicError::EmptyTopicSet));
    }
    let filter = base.clone().with_topics(topics.topics());
    Ok(sentiment_portfolio(headlines, &filter, returns, risk_free)?)
}

#[derive(Debug, thiserror::Error)]
pub enum TopicPortfolioError {
    #[error(transparent)]
    Topic(#[from] TopicError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetResult {
    pub subset: TopicSet,
    pub sharpe: Option<f64>,
    pub n_months: usize,
    pub outcome: ReportOutcome,
}

impl SubsetResult {
    pub fn cumulative_return(&self) -> Option<f64> {
        self.outcome.report().map(|r| r.cumulative_return)
    }
}

pub fn evaluate_subset(
    cache: &CountCache,
    subset: TopicSet,
    returns: &MonthlySeries,
    risk_free: &RiskFree,
) -> Result<SubsetResult, EvalError> {
    let (outcome, n_months) = outcome_for(&cache.signals(subset), returns, risk_free)?;
    Ok(SubsetResult {
        subset,
        sharpe: outcome.sharpe(),
        n_months,
        outcome,
    })
}

/// Inclusive range of subset sizes to enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeRange {
    pub min: usize,
    pub max: usize,
}

impl SizeRange {
    /// Every non-empty proper subset of a universe of `n` topics.
    pub fn proper(n: usize) -> Self {
        Self { min: 1, max: n.saturating_sub(1) }
    }

    pub fn validate(&self, universe: usize) -> Result<(), TopicError> {
        if self.min >= 1 && self.min <= self.max && self.max <= universe {
            Ok(())
        } else {
            Err(TopicError::InvalidSizeRange {
                min: self.min,
                max: self.max,
                universe,
            })
        }
    }
}

impl std::str::FromStr for SizeRange {
    type Err = String;

    /// `a-b` or a single size `a`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |x: &str| x.trim().parse::<usize>().map_err(|_| format!("invalid size range `{s}`"));
        match s.split_once('-') {
            Some((a, b)) => Ok(Self { min: parse(a)?, max: parse(b)? }),
            None => {
                let n = parse(s)?;
                Ok(Self { min: n, max: n })
            }
        }
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// `sum_{k=min}^{max} C(n, k)`.
pub fn candidate_count(n: usize, range: SizeRange) -> u128 {
    (range.min..=range.max).map(|k| binomial(n, k)).sum()
}

/// All subsets of `universe` whose size lies in `range`, in mask order.
pub fn subsets_in_range(universe: &[Topic], range: SizeRange) -> Result<Vec<TopicSet>, TopicError> {
    range.validate(universe.len())?;
    let n = universe.len();
    Ok((1u32..(1u32 << n))
        .filter(|mask| (range.min..=range.max).contains(&(mask.count_ones() as usize)))
        .map(|mask| {
            TopicSet::from_topics(
                universe
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, t)| *t),
            )
        })
        .collect())
}

/// Sharpe descending (undefined last), then smaller subsets, then
/// lexicographic topic order.
pub fn rank_cmp(a: &SubsetResult, b: &SubsetResult) -> std::cmp::Ordering {
    let by_sharpe = match (a.sharpe, b.sharpe) {
        (Some(x), Some(y)) => y.total_cmp(&x),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    };
    by_sharpe
        .then(a.subset.len().cmp(&b.subset.len()))
        .then(a.subset.lex_cmp(b.subset))
}

#[derive(Debug, Clone, Serialize)]
pub struct SubsetSearch {
    pub candidates: usize,
    pub ranked: Vec<SubsetResult>,
}

impl SubsetSearch {
    pub fn best(&self) -> Option<&SubsetResult> {
        self.ranked.first()
    }

    /// `rank,subset,sharpe,n_months,cum_return`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rank,subset,sharpe,n_months,cum_return\n");
        for (i, r) in self.ranked.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                i + 1,
                r.subset,
                opt(r.sharpe),
                r.n_months,
                opt(r.cumulative_return())
            ));
        }
        out
    }
}

pub(crate) fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Evaluates every subset of `universe` with a size in `range` and ranks them.
pub fn enumerate_topic_subsets(
    universe: &[Topic],
    range: SizeRange,
    cache: &CountCache,
    returns: &MonthlySeries,
    risk_free: &RiskFree,
) -> Result<SubsetSearch, TopicPortfolioError> {
    let subsets = subsets_in_range(universe, range)?;
    let results = par::map(&subsets, |s| evaluate_subset(cache, *s, returns, risk_free));
    let mut ranked = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    ranked.sort_by(rank_cmp);
    Ok(SubsetSearch {
        candidates: subsets.len(),
        ranked,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventTypeReport {
    pub forward_looking: ReportOutcome,
    pub occurred: ReportOutcome,
}

impl EventTypeReport {
    pub fn get(&self, kind: EventType) -> &ReportOutcome {
        match kind {
            EventType::ForwardLooking => &self.forward_looking,
            EventType::Occurred => &self.occurred,
        }
    }
}

/// Forward-looking versus occurred portfolios under `base`. A class with no
/// headlines at all is reported as missing.
pub fn event_type_report(
    headlines: &[HeadlineRecord],
    base: &HeadlineFilter,
    returns: &MonthlySeries,
    risk_free: &RiskFree,
) -> Result<EventTypeReport, EvalError> {
    let one = |kind: EventType| -> Result<ReportOutcome, EvalError> {
        let filter = base.clone().with_event_types([kind]);
        if !headlines.iter().any(|h| filter.matches(h)) {
            return Ok(ReportOutcome::Missing);
        }
        Ok(sentiment_portfolio(headlines, &filter, returns, risk_free)?.0)
    };
    Ok(EventTypeReport {
        forward_looking: one(EventType::ForwardLooking)?,
        occurred: one(EventType::Occurred)?,
    })
}

/// Event-type split within each topic.
pub fn event_type_by_topic(
    headlines: &[HeadlineRecord],
    base: &HeadlineFilter,
    returns: &MonthlySeries,
    risk_free: &RiskFree,
) -> Result<BTreeMap<Topic, EventTypeReport>, EvalError> {
    Topic::ALL
        .iter()
        .map(|&t| {
            let filter = base.clone().with_topics([t]);
            event_type_report(headlines, &filter, returns, risk_free).map(|r| (t, r))
        })
        .collect()
}

/// `(other - bench) / |bench| * 100`; undefined for a zero benchmark.
pub fn improvement_pct(other: f64, bench: f64) -> Option<f64> {
    (bench != 0.0).then(|| (other - bench) / bench.abs() * 100.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct SourceMatrixRow {
    /// `None` is the all-topics portfolio.
    pub topic: Option<Topic>,
    pub cells: Vec<ReportOutcome>,
}

/// Sharpe ratios per (topic, source). The first source is the benchmark.
#[derive(Debug, Clone, Serialize)]
pub struct SourceMatrix {
    pub sources: Vec<String>,
    pub rows: Vec<SourceMatrixRow>,
}

impl SourceMatrix {
    /// Improvement of `sources[col]` over the benchmark in each row.
    pub fn improvements(&self, col: usize) -> Vec<Option<f64>> {
        self.rows
            .iter()
            .map(|row| match (row.cells[col].sharpe(), row.cells[0].sharpe()) {
                (Some(o), Some(b)) => improvement_pct(o, b),
                _ => None,
            })
            .collect()
    }

    /// `topic,<source>...,<source>_improvement_pct...`; missing cells are empty.
    pub fn to_csv(&self) -> String {
        let mut header = vec!["topic".to_string()];
        header.extend(self.sources.iter().cloned());
        header.extend(self.sources.iter().skip(1).map(|s| format!("{s}_improvement_pct")));
        let mut out = header.join(",");
        out.push('\n');
        let improvements: Vec<Vec<Option<f64>>> = (1..self.sources.len()).map(|c| self.improvements(c)).collect();
        for (r, row) in self.rows.iter().enumerate() {
            let mut fields = vec![row.topic.map_or("all_topics".to_string(), |t| t.id().to_string())];
            fields.extend(row.cells.iter().map(|c| opt(c.sharpe())));
            fields.extend(improvements.iter().map(|col| opt(col[r])));
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }
}

/// For each source, the all-topics portfolio and one portfolio per topic.
pub fn source_comparison(
    headlines: &[HeadlineRecord],
    sources: &[String],
    returns: &MonthlySeries,
    risk_free: &RiskFree,
) -> Result<SourceMatrix, EvalError> {
    let row_keys: Vec<Option<Topic>> = std::iter::once(None).chain(Topic::ALL.map(Some)).collect();
    let rows = par::map(&row_keys, |topic| -> Result<SourceMatrixRow, EvalError> {
        let cells = sources
            .iter()
            .map(|src| {
                let mut filter = HeadlineFilter::all().with_sources([src]);
                if let Some(t) = topic {
                    filter = filter.with_topics([*t]);
                }
                if !headlines.iter().any(|h| filter.matches(h)) {
                    return Ok(ReportOutcome::Missing);
                }
                sentiment_portfolio(headlines, &filter, returns, risk_free).map(|(o, _)| o)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SourceMatrixRow { topic: *topic, cells })
    });
    Ok(SourceMatrix {
        sources: sources.to_vec(),
        rows: rows.into_iter().collect::<Result<_, _>>()?,
    })
}

/// Fails when no headline carries a topic label.
pub fn ensure_labeled(headlines: &[HeadlineRecord]) -> Result<(), TopicError> {
    if headlines.iter().any(|h| h.topic.is_some()) {
        Ok(())
    } else {
        Err(TopicError::NoLabeledTopics)
    }
}

//! Headline filtering and monthly sentiment aggregation.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ingest::{normalize_source, EventType, HeadlineRecord, Sentiment, Topic};
use crate::series::{Month, MonthlySeries};

pub fn label_to_score(label: Sentiment) -> i8 {
    match label {
        Sentiment::Positive => 1,
        Sentiment::Neutral => 0,
        Sentiment::Negative => -1,
    }
}

/// Membership filter over headlines. An empty set passes everything; a
/// non-empty set never matches an unlabeled headline.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct HeadlineFilter {
    pub sources: BTreeSet<String>,
    pub topics: BTreeSet<Topic>,
    pub event_types: BTreeSet<EventType>,
}

impl HeadlineFilter {
    pub fn all() -> Self {
        Self::default()
    }

    pub fn with_sources<I, S>(mut self, sources: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.sources = sources.into_iter().map(|s| normalize_source(s.as_ref())).collect();
        self
    }

    pub fn with_topics(mut self, topics: impl IntoIterator<Item = Topic>) -> Self {
        self.topics = topics.into_iter().collect();
        self
    }

    pub fn with_event_types(mut self, kinds: impl IntoIterator<Item = EventType>) -> Self {
        self.event_types = kinds.into_iter().collect();
        self
    }

    pub fn matches(&self, h: &HeadlineRecord) -> bool {
        (self.sources.is_empty() || self.sources.contains(&h.source))
            && (self.topics.is_empty() || h.topic.is_some_and(|t| self.topics.contains(&t)))
            && (self.event_types.is_empty()
                || h.event_type.is_some_and(|e| self.event_types.contains(&e)))
    }
}

pub fn filter_headlines<'a>(
    headlines: &'a [HeadlineRecord],
    filter: &HeadlineFilter,
) -> Vec<&'a HeadlineRecord> {
    headlines.iter().filter(|h| filter.matches(h)).collect()
}

/// Per-month label counts. The monthly score is a ratio of these, so counts
/// for disjoint headline sets can simply be added.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCounts {
    pub positive: u32,
    pub neutral: u32,
    pub negative: u32,
}

impl LabelCounts {
    pub fn add(&mut self, label: Sentiment) {
        match label {
            Sentiment::Positive => self.positive += 1,
            Sentiment::Neutral => self.neutral += 1,
            Sentiment::Negative => self.negative += 1,
        }
    }

    pub fn total(&self) -> u32 {
        self.positive + self.neutral + self.negative
    }

    /// Mean of the {-1, 0, +1} labels, `None` when no headline was counted.
    pub fn score(&self) -> Option<f64> {
        match self.total() {
            0 => None,
            n => Some((self.positive as f64 - self.negative as f64) / n as f64),
        }
    }
}

impl std::ops::AddAssign for LabelCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.positive += rhs.positive;
        self.neutral += rhs.neutral;
        self.negative += rhs.negative;
    }
}

pub fn monthly_counts(
    headlines: &[HeadlineRecord],
    filter: &HeadlineFilter,
) -> BTreeMap<Month, LabelCounts> {
    let mut out: BTreeMap<Month, LabelCounts> = BTreeMap::new();
    for h in headlines.iter().filter(|h| filter.matches(h)) {
        out.entry(h.month()).or_default().add(h.sentiment);
    }
    out
}

/// Monthly sentiment score `(pos - neg) / total` over matching headlines.
/// Months without a matching headline are absent.
pub fn monthly_score(headlines: &[HeadlineRecord], filter: &HeadlineFilter) -> MonthlySeries {
    scores_from_counts("sentiment", &monthly_counts(headlines, filter))
}

pub fn scores_from_counts(label: &str, counts: &BTreeMap<Month, LabelCounts>) -> MonthlySeries {
    MonthlySeries::from_pairs(
        label,
        counts.iter().filter_map(|(m, c)| c.score().map(|s| (*m, s))),
    )
}

/// Coerces missing months in `months` to a neutral 0 score.
pub fn fill_empty_months_neutral(
    scores: &MonthlySeries,
    months: impl IntoIterator<Item = Month>,
) -> MonthlySeries {
    let mut out = scores.clone();
    for m in months {
        if !out.contains(m) {
            out.insert(m, 0.0);
        }
    }
    out
}

/// Renders `month,score,n_headlines`.
pub fn sentiment_csv(counts: &BTreeMap<Month, LabelCounts>) -> String {
    let mut out = String::from("month,score,n_headlines\n");
    for (m, c) in counts {
        if let Some(score) = c.score() {
            out.push_str(&format!("{m},{score},{}\n", c.total()));
        }
    }
    out
}

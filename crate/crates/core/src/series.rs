//! Calendar months and sparse month-keyed series.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::SeriesError;

/// A calendar month. Orders chronologically and renders as `YYYY-MM`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Month {
    year: i32,
    month: u32,
}

impl Month {
    pub fn new(year: i32, month: u32) -> Result<Self, SeriesError> {
        if !(1..=12).contains(&month) {
            return Err(SeriesError::InvalidMonth(format!("{year}-{month}")));
        }
        Ok(Self { year, month })
    }

    pub fn of_date(date: NaiveDate) -> Self {
        Self {
            year: date.year(),
            month: date.month(),
        }
    }

    pub fn year(self) -> i32 {
        self.year
    }

    pub fn month(self) -> u32 {
        self.month
    }

    pub fn next(self) -> Self {
        if self.month == 12 {
            Self {
                year: self.year + 1,
                month: 1,
            }
        } else {
            Self {
                year: self.year,
                month: self.month + 1,
            }
        }
    }

    pub fn prev(self) -> Self {
        if self.month == 1 {
            Self {
                year: self.year - 1,
                month: 12,
            }
        } else {
            Self {
                year: self.year,
                month: self.month - 1,
            }
        }
    }

    /// Months elapsed from `self` to `later` (negative if `later` is earlier).
    pub fn months_until(self, later: Month) -> i64 {
        (later.year as i64 - self.year as i64) * 12 + (later.month as i64 - self.month as i64)
    }

    /// `self` shifted by `n` months.
    pub fn offset(self, n: i64) -> Self {
        let idx = self.year as i64 * 12 + (self.month as i64 - 1) + n;
        Self {
            year: idx.div_euclid(12) as i32,
            month: (idx.rem_euclid(12) + 1) as u32,
        }
    }
}

impl fmt::Display for Month {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for Month {
    type Err = SeriesError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (y, m) = s
            .split_once('-')
            .ok_or_else(|| SeriesError::InvalidMonth(s.to_string()))?;
        if m.len() != 2 {
            return Err(SeriesError::InvalidMonth(s.to_string()));
        }
        let year = y
            .parse::<i32>()
            .map_err(|_| SeriesError::InvalidMonth(s.to_string()))?;
        let month = m
            .parse::<u32>()
            .map_err(|_| SeriesError::InvalidMonth(s.to_string()))?;
        Month::new(year, month).map_err(|_| SeriesError::InvalidMonth(s.to_string()))
    }
}

impl Serialize for Month {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Month {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Ordered month → value map. Absent months are "missing", which is distinct
/// from a stored zero.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MonthlySeries {
    pub label: String,
    entries: BTreeMap<Month, f64>,
}

impl MonthlySeries {
    pub fn new(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            entries: BTreeMap::new(),
        }
    }

    pub fn from_pairs(label: impl Into<String>, pairs: impl IntoIterator<Item = (Month, f64)>) -> Self {
        Self {
            label: label.into(),
            entries: pairs.into_iter().collect(),
        }
    }

    /// Builds a contiguous series starting at `start`.
    pub fn contiguous(label: impl Into<String>, start: Month, values: &[f64]) -> Self {
        Self::from_pairs(
            label,
            values
                .iter()
                .enumerate()
                .map(|(i, &v)| (start.offset(i as i64), v)),
        )
    }

    pub fn insert(&mut self, month: Month, value: f64) -> Option<f64> {
        self.entries.insert(month, value)
    }

    pub fn get(&self, month: Month) -> Option<f64> {
        self.entries.get(&month).copied()
    }

    pub fn contains(&self, month: Month) -> bool {
        self.entries.contains_key(&month)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn first_month(&self) -> Option<Month> {
        self.entries.keys().next().copied()
    }

    pub fn last_month(&self) -> Option<Month> {
        self.entries.keys().next_back().copied()
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = (Month, f64)> + '_ {
        self.entries.iter().map(|(&m, &v)| (m, v))
    }

    pub fn months(&self) -> impl DoubleEndedIterator<Item = Month> + '_ {
        self.entries.keys().copied()
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.values().copied().collect()
    }

    pub fn as_map(&self) -> &BTreeMap<Month, f64> {
        &self.entries
    }

    /// True when every month between the first and last key is present.
    pub fn is_contiguous(&self) -> bool {
        self.first_gap().is_none()
    }

    /// First month absent from an otherwise increasing run, if any.
    pub fn first_gap(&self) -> Option<Month> {
        let mut prev: Option<Month> = None;
        for m in self.entries.keys().copied() {
            if let Some(p) = prev {
                if p.next() != m {
                    return Some(p.next());
                }
            }
            prev = Some(m);
        }
        None
    }

    pub fn map_values(&self, label: impl Into<String>, f: impl Fn(f64) -> f64) -> Self {
        Self::from_pairs(label, self.iter().map(|(m, v)| (m, f(v))))
    }
}

impl FromIterator<(Month, f64)> for MonthlySeries {
    fn from_iter<I: IntoIterator<Item = (Month, f64)>>(iter: I) -> Self {
        Self::from_pairs("", iter)
    }
}

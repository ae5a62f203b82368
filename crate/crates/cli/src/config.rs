//! Run configuration: one TOML file, with command-line flags layered on top.
//! Relative paths resolve against the directory holding the config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use sentitrade_core::evaluation::RiskFree;
use sentitrade_core::forecast::{FeatureSet, Family, ForecasterSpec, GridSpec, GridTemplate, TrainingWindow, WalkForwardConfig, DEFAULT_INITIAL_TRAIN};
use sentitrade_core::ingest::{AggregationRules, EventType, PriceSchema, Topic};
use sentitrade_core::regimes::{DEFAULT_HIGH_FRACTION, DEFAULT_LOW_FRACTION, DEFAULT_VOL_WINDOW};
use sentitrade_core::strategy::MissingPolicy;
use sentitrade_core::topics::SizeRange;
use sentitrade_core::HeadlineFilter;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum StrategyKind {
    SentimentOnly,
    PriceBased,
    Combined,
    BuyAndHold,
}

impl StrategyKind {
    pub fn id(self) -> &'static str {
        match self {
            StrategyKind::SentimentOnly => "sentiment_only",
            StrategyKind::PriceBased => "price_based",
            StrategyKind::Combined => "combined",
            StrategyKind::BuyAndHold => "buy_and_hold",
        }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub prices: Option<PathBuf>,
    pub headlines: Option<PathBuf>,
    /// External `month,predicted_close` file for price-based strategies.
    pub predictions: Option<PathBuf>,
    #[serde(default)]
    pub schema: PriceSchema,
    #[serde(default)]
    pub aggregation: AggregationRules,
    /// Feature columns fed to forecasters; all columns when absent.
    pub features: Option<Vec<String>>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct FilterConfig {
    pub sources: Vec<String>,
    pub topics: Vec<String>,
    pub event_types: Vec<String>,
}

impl FilterConfig {
    pub fn to_filter(&self) -> Result<HeadlineFilter> {
        let topics = self
            .topics
            .iter()
            .map(|t| t.parse::<Topic>().map_err(|v| anyhow::anyhow!("unknown topic `{v}`")))
            .collect::<Result<Vec<_>>>()?;
        let kinds = self
            .event_types
            .iter()
            .map(|t| t.parse::<EventType>().map_err(|v| anyhow::anyhow!("unknown event type `{v}`")))
            .collect::<Result<Vec<_>>>()?;
        Ok(HeadlineFilter::all()
            .with_sources(&self.sources)
            .with_topics(topics)
            .with_event_types(kinds))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForecasterConfig {
    pub family: Family,
    #[serde(default = "default_window")]
    pub window: usize,
    /// `no-sentiment` or a source id; defaults by strategy.
    pub feature_set: Option<String>,
    #[serde(default)]
    pub hyperparams: BTreeMap<String, f64>,
    #[serde(default = "default_initial_train")]
    pub initial_train: usize,
    /// Rolling training size; expanding when absent.
    pub rolling_train: Option<usize>,
}

fn default_window() -> usize {
    3
}

fn default_initial_train() -> usize {
    DEFAULT_INITIAL_TRAIN
}

impl ForecasterConfig {
    pub fn walk_config(&self) -> WalkForwardConfig {
        WalkForwardConfig {
            initial_train: self.initial_train,
            training: self.rolling_train.map_or(TrainingWindow::Expanding, TrainingWindow::Rolling),
        }
    }

    pub fn spec(&self, feature_set: FeatureSet) -> ForecasterSpec {
        ForecasterSpec {
            family: self.family.clone(),
            hyperparams: self.hyperparams.clone(),
            feature_set,
            window_len: self.window,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluationConfig {
    /// Constant monthly risk-free rate.
    pub risk_free: f64,
    pub cost_per_switch: f64,
    pub regime_fractions: [f64; 2],
    pub vol_window: usize,
    /// `min-max`; every non-empty proper subset when absent.
    pub subset_sizes: Option<String>,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self {
            risk_free: 0.0,
            cost_per_switch: 0.0,
            regime_fractions: [DEFAULT_LOW_FRACTION, DEFAULT_HIGH_FRACTION],
            vol_window: DEFAULT_VOL_WINDOW,
            subset_sizes: None,
        }
    }
}

impl EvaluationConfig {
    pub fn risk_free(&self) -> RiskFree {
        RiskFree::Constant(self.risk_free)
    }

    pub fn size_range(&self, universe: usize) -> Result<SizeRange> {
        match &self.subset_sizes {
            None => Ok(SizeRange::proper(universe)),
            Some(s) => s.parse::<SizeRange>().map_err(anyhow::Error::msg),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct TopicsConfig {
    /// Sources for the per-source matrix; the first is the benchmark.
    /// Defaults to every source in the headline file, sorted.
    pub sources: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub templates: Vec<GridTemplate>,
    #[serde(default = "default_feature_sets")]
    pub feature_sets: Vec<String>,
    #[serde(default = "default_windows")]
    pub windows: Vec<usize>,
    /// Directory holding replay files for external families.
    pub predictions_dir: Option<PathBuf>,
    #[serde(default = "default_initial_train")]
    pub initial_train: usize,
}

fn default_feature_sets() -> Vec<String> {
    vec!["no-sentiment".into()]
}

fn default_windows() -> Vec<usize> {
    sentitrade_core::forecast::DEFAULT_WINDOWS.to_vec()
}

impl GridConfig {
    pub fn spec(&self) -> Result<GridSpec> {
        if self.templates.is_empty() {
            bail!("grid needs at least one template");
        }
        Ok(GridSpec {
            templates: self.templates.clone(),
            feature_sets: self
                .feature_sets
                .iter()
                .map(|s| s.parse::<FeatureSet>())
                .collect::<Result<_, _>>()?,
            windows: self.windows.clone(),
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub data: DataConfig,
    #[serde(default = "default_strategy")]
    pub strategy: StrategyKind,
    #[serde(default)]
    pub missing_sentiment: MissingPolicy,
    #[serde(default)]
    pub filter: FilterConfig,
    pub forecaster: Option<ForecasterConfig>,
    #[serde(default)]
    pub evaluation: EvaluationConfig,
    #[serde(default)]
    pub topics: TopicsConfig,
    pub grid: Option<GridConfig>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_strategy() -> StrategyKind {
    StrategyKind::SentimentOnly
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for RunConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config is valid")
    }
}

impl RunConfig {
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).context("invalid config")?;
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [&mut self.data.prices, &mut self.data.headlines, &mut self.data.predictions]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
        if let Some(dir) = self.grid.as_mut().and_then(|g| g.predictions_dir.as_mut()) {
            fix(dir);
        }
        fix(&mut self.output_dir);
    }

    pub fn prices_path(&self) -> Result<&Path> {
        self.data
            .prices
            .as_deref()
            .ok_or_else(|| anyhow::anyhow!("config has no `data.prices` path"))
    }

    pub fn headlines_path(&self) -> Result<&Path> {
        self.data
            .headlines
            .as_deref()
            .ok_or_else(|| anyhow::anyhow!("config has no `data.headlines` path"))
    }

    /// Checks that strategy-specific sections are present and files exist.
    pub fn validate_for(&self, strategy: StrategyKind) -> Result<()> {
        for p in [&self.data.prices, &self.data.headlines, &self.data.predictions]
            .into_iter()
            .flatten()
        {
            if !p.exists() {
                bail!("file not found: {}", p.display());
            }
        }
        self.prices_path()?;
        match strategy {
            StrategyKind::SentimentOnly => {
                self.headlines_path()?;
            }
            StrategyKind::PriceBased => {
                if self.forecaster.is_none() && self.data.predictions.is_none() {
                    bail!("price_based strategy needs a [forecaster] section or `data.predictions`");
                }
            }
            StrategyKind::Combined => {
                if self.data.predictions.is_none() {
                    if self.forecaster.is_none() {
                        bail!("combined strategy needs a [forecaster] section or `data.predictions`");
                    }
                    self.headlines_path()?;
                    self.combined_source()?;
                }
            }
            StrategyKind::BuyAndHold => {}
        }
        let [lo, hi] = self.evaluation.regime_fractions;
        if !(0.0 <= lo && lo < hi && hi <= 1.0) {
            bail!("regime_fractions must satisfy 0 <= low < high <= 1");
        }
        Ok(())
    }

    /// Sentiment source used by the combined strategy's forecaster.
    pub fn combined_source(&self) -> Result<String> {
        if let Some(fs) = self.forecaster.as_ref().and_then(|f| f.feature_set.as_deref()) {
            if let Ok(FeatureSet::WithSentiment(src)) = fs.parse::<FeatureSet>() {
                return Ok(src);
            }
        }
        match self.filter.sources.as_slice() {
            [one] => Ok(one.trim().to_ascii_lowercase()),
            _ => bail!("combined strategy needs one sentiment source (`forecaster.feature_set` or a single `filter.sources`)"),
        }
    }
}

//! Loading inputs and turning a configured strategy into a portfolio path.

use std::collections::{BTreeMap, BTreeSet};

use anyhow::anyhow;

use sentitrade_core::forecast::{
    load_predictions, replay, CellEvaluator, FeatureSet, Family, ForecastData, ForecasterSpec, PredictionSeries,
    WalkForwardEvaluator,
};
use sentitrade_core::ingest::{
    impute_missing, load_headlines, load_prices, resample_monthly, returns_where_defined, MonthlyTable,
};
use sentitrade_core::sentiment::{monthly_counts, monthly_score, scores_from_counts, LabelCounts};
use sentitrade_core::strategy::{buy_and_hold, price_signals, sentiment_signal_over, signal_calendar, simulate};
use sentitrade_core::{HeadlineFilter, HeadlineRecord, Month, MonthlySeries, PortfolioPath};

use crate::config::{RunConfig, StrategyKind};
use crate::failure::{Classify, CmdResult, Failure};

pub struct Inputs {
    pub daily_rows: usize,
    pub table: MonthlyTable,
    pub returns: MonthlySeries,
    pub headlines: Option<Vec<HeadlineRecord>>,
    pub predictions: Option<MonthlySeries>,
    pub warnings: Vec<String>,
}

pub fn load_inputs(cfg: &RunConfig) -> CmdResult<Inputs> {
    let bars = load_prices(cfg.prices_path().usage()?, &cfg.data.schema).data()?;
    let bars = impute_missing(&bars).data()?;
    let table = resample_monthly(&bars, cfg.data.aggregation);
    if let Some(names) = &cfg.data.features {
        for name in names {
            if !table.features.contains_key(name) {
                return Err(Failure::Usage(anyhow!("feature column `{name}` not found in price file")));
            }
        }
    }
    let mut warnings = Vec::new();
    if let Some(gap) = table.close.first_gap() {
        warnings.push(format!("monthly prices have a gap before {gap}; returns are only formed between consecutive months"));
    }
    let returns = returns_where_defined(&table.close);
    if returns.is_empty() {
        return Err(Failure::Data(anyhow!("prices need at least two consecutive months")));
    }
    let headlines = cfg.data.headlines.as_deref().map(load_headlines).transpose().data()?;
    let predictions = cfg.data.predictions.as_deref().map(load_predictions).transpose().data()?;
    Ok(Inputs {
        daily_rows: bars.len(),
        table,
        returns,
        headlines,
        predictions,
        warnings,
    })
}

impl Inputs {
    pub fn close(&self) -> &MonthlySeries {
        &self.table.close
    }

    pub fn headlines(&self) -> CmdResult<&[HeadlineRecord]> {
        self.headlines
            .as_deref()
            .ok_or_else(|| Failure::Usage(anyhow!("config has no `data.headlines` path")))
    }

    /// Close plus the selected feature columns, in a fixed order.
    pub fn tabular(&self, cfg: &RunConfig) -> Vec<MonthlySeries> {
        let mut out = vec![self.table.close.clone()];
        match &cfg.data.features {
            Some(names) => out.extend(names.iter().map(|n| self.table.features[n].clone())),
            None => out.extend(self.table.features.values().cloned()),
        }
        out
    }

    /// Sentiment score per source for every sentiment feature set.
    pub fn sentiment_by_source<'a>(
        &self,
        cfg: &RunConfig,
        feature_sets: impl IntoIterator<Item = &'a FeatureSet>,
    ) -> CmdResult<BTreeMap<String, MonthlySeries>> {
        let mut out = BTreeMap::new();
        for fs in feature_sets {
            if let FeatureSet::WithSentiment(src) = fs {
                let filter = source_filter(cfg, src)?;
                out.insert(src.clone(), monthly_score(self.headlines()?, &filter));
            }
        }
        Ok(out)
    }
}

/// The configured filter with its sources replaced by `src`.
fn source_filter(cfg: &RunConfig, src: &str) -> CmdResult<HeadlineFilter> {
    let mut filter = cfg.filter.to_filter().usage()?;
    filter.sources = BTreeSet::new();
    Ok(filter.with_sources([src]))
}

pub struct StrategyRun {
    pub kind: StrategyKind,
    pub path: PortfolioPath,
    pub sentiment_counts: Option<BTreeMap<Month, LabelCounts>>,
    pub predictions: Option<PredictionSeries>,
    pub warnings: Vec<String>,
}

pub fn run_strategy(kind: StrategyKind, cfg: &RunConfig, inputs: &Inputs) -> CmdResult<StrategyRun> {
    let calendar = signal_calendar(&inputs.returns);
    let mut warnings = Vec::new();
    let mut sentiment_counts = None;
    let mut predictions = None;
    let signals = match kind {
        StrategyKind::BuyAndHold => buy_and_hold(calendar),
        StrategyKind::SentimentOnly => {
            let counts = monthly_counts(inputs.headlines()?, &cfg.filter.to_filter().usage()?);
            let score = scores_from_counts("sentiment", &counts);
            let missing = calendar.iter().filter(|m| !score.contains(**m)).count();
            if missing > 0 {
                warnings.push(format!("{missing} month(s) without matching headlines"));
            }
            sentiment_counts = Some(counts);
            sentiment_signal_over(&score, calendar, cfg.missing_sentiment)
        }
        StrategyKind::PriceBased | StrategyKind::Combined => {
            let (preds, w) = forecast(kind, cfg, inputs, &calendar)?;
            warnings.extend(w);
            let signals = price_signals(&preds.entries, inputs.close()).data()?;
            predictions = Some(preds);
            signals
        }
    };
    let path = simulate(&signals, &inputs.returns, cfg.evaluation.cost_per_switch).compute()?;
    Ok(StrategyRun {
        kind,
        path,
        sentiment_counts,
        predictions,
        warnings,
    })
}

fn feature_set_for(kind: StrategyKind, cfg: &RunConfig) -> CmdResult<FeatureSet> {
    match kind {
        StrategyKind::Combined => cfg.combined_source().usage().map(FeatureSet::WithSentiment),
        _ => match cfg.forecaster.as_ref().and_then(|f| f.feature_set.as_deref()) {
            Some(fs) => fs.parse().usage(),
            None => Ok(FeatureSet::TabularOnly),
        },
    }
}

/// Replays the external predictions file when one is configured, otherwise
/// runs the configured forecaster walk-forward.
fn forecast(
    kind: StrategyKind,
    cfg: &RunConfig,
    inputs: &Inputs,
    calendar: &[Month],
) -> CmdResult<(PredictionSeries, Vec<String>)> {
    if let Some(file) = &inputs.predictions {
        let feature_set = feature_set_for(kind, cfg).unwrap_or(FeatureSet::TabularOnly);
        let window = cfg.forecaster.as_ref().map_or(1, |f| f.window);
        let spec = ForecasterSpec::new(Family::External("external".into()), feature_set, window);
        let usable: BTreeSet<Month> = calendar.iter().copied().collect();
        let kept = MonthlySeries::from_pairs(
            file.label.clone(),
            file.iter().filter(|(m, _)| usable.contains(m)),
        );
        let mut warnings = Vec::new();
        let dropped = file.len() - kept.len();
        if dropped > 0 {
            warnings.push(format!("{dropped} prediction(s) issued in months without a next-month return were ignored"));
        }
        if kept.is_empty() {
            return Err(Failure::Data(anyhow!("no prediction falls in a month with a next-month return")));
        }
        return Ok((replay(spec, &kept), warnings));
    }
    let fc = cfg
        .forecaster
        .as_ref()
        .ok_or_else(|| Failure::Usage(anyhow!("{} needs a [forecaster] section", kind.id())))?;
    let spec = fc.spec(feature_set_for(kind, cfg)?);
    spec.validate().usage()?;
    let data = ForecastData {
        close: inputs.close().clone(),
        tabular: inputs.tabular(cfg),
        sentiment: inputs.sentiment_by_source(cfg, [&spec.feature_set])?,
    };
    let evaluator = WalkForwardEvaluator {
        data: &data,
        config: fc.walk_config(),
        replays: BTreeMap::new(),
    };
    evaluator.evaluate(&spec).compute()
}

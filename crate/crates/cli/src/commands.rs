use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::anyhow;
use serde::Serialize;

use sentitrade_core::evaluation::ReportOutcome;
use sentitrade_core::forecast::{
    grid_search, load_predictions, Family, ForecastData, ForecastRun, ForecasterSpec, GridResult, WalkForwardConfig,
    WalkForwardEvaluator,
};
use sentitrade_core::error::RegimeError;
use sentitrade_core::regimes::{classify_regimes, regime_report, regime_thresholds, rolling_volatility, Regime, Thresholds};
use sentitrade_core::sentiment::sentiment_csv;
use sentitrade_core::topics::{
    candidate_count, ensure_labeled, enumerate_topic_subsets, event_type_by_topic, event_type_report,
    sentiment_portfolio, source_comparison, CountCache, EventTypeReport, SizeRange, TopicPortfolioError,
};
use sentitrade_core::{HeadlineFilter, Month, Topic};

use crate::config::{RunConfig, StrategyKind};
use crate::failure::{Classify, CmdResult, Failure};
use crate::output::Output;
use crate::pipeline::{load_inputs, run_strategy, StrategyRun};

/// Flag values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out_dir: Option<PathBuf>,
    pub strategy: Option<StrategyKind>,
    pub source: Option<String>,
    pub window: Option<usize>,
    pub subset_sizes: Option<String>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(dir) = &self.out_dir {
            cfg.output_dir = dir.clone();
        }
        if let Some(s) = self.strategy {
            cfg.strategy = s;
        }
        if let Some(src) = &self.source {
            cfg.filter.sources = vec![src.clone()];
            if let Some(fc) = cfg.forecaster.as_mut() {
                if fc.feature_set.as_deref().is_some_and(|fs| !matches!(fs, "no-sentiment" | "none" | "tabular")) {
                    fc.feature_set = Some(src.clone());
                }
            }
        }
        if let Some(w) = self.window {
            if let Some(fc) = cfg.forecaster.as_mut() {
                fc.window = w;
            }
            if let Some(g) = cfg.grid.as_mut() {
                g.windows = vec![w];
            }
        }
        if let Some(sizes) = &self.subset_sizes {
            cfg.evaluation.subset_sizes = Some(sizes.clone());
        }
    }
}

fn file_name(p: &Option<PathBuf>) -> Option<String> {
    p.as_deref()
        .and_then(Path::file_name)
        .map(|n| n.to_string_lossy().into_owned())
}

fn fmt_opt(x: Option<f64>, digits: usize) -> String {
    x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.digits$}"))
}

fn pct(x: f64) -> String {
    format!("{:.2}%", x * 100.0)
}

#[derive(Serialize)]
struct Inputs<'a> {
    prices: Option<String>,
    headlines: Option<String>,
    predictions: Option<String>,
    filter: &'a HeadlineFilter,
}

#[derive(Serialize)]
struct BacktestReport<'a> {
    strategy: &'static str,
    inputs: Inputs<'a>,
    first_month: Option<Month>,
    last_month: Option<Month>,
    final_value: f64,
    cost_per_switch: f64,
    risk_free: f64,
    forecaster: Option<&'a ForecasterSpec>,
    outcome: &'a ReportOutcome,
    warnings: &'a [String],
}

pub fn backtest(cfg: &RunConfig) -> CmdResult<Output> {
    cfg.validate_for(cfg.strategy).usage()?;
    let filter = cfg.filter.to_filter().usage()?;
    let inputs = load_inputs(cfg)?;
    let run = run_strategy(cfg.strategy, cfg, &inputs)?;
    let outcome = ReportOutcome::from_path(&run.path, &cfg.evaluation.risk_free()).compute()?;

    let mut warnings = inputs.warnings.clone();
    warnings.extend(run.warnings.iter().cloned());
    let report = BacktestReport {
        strategy: run.kind.id(),
        inputs: Inputs {
            prices: file_name(&cfg.data.prices),
            headlines: file_name(&cfg.data.headlines),
            predictions: file_name(&cfg.data.predictions),
            filter: &filter,
        },
        first_month: run.path.start_month(),
        last_month: run.path.values.last_month(),
        final_value: run.path.final_value(),
        cost_per_switch: cfg.evaluation.cost_per_switch,
        risk_free: cfg.evaluation.risk_free,
        forecaster: run.predictions.as_ref().map(|p| &p.spec),
        outcome: &outcome,
        warnings: &warnings,
    };

    let mut out = Output::default();
    out.json("report.json", &report);
    out.file("path.csv", run.path.to_csv());
    out.file("plot.tsv", plot_tsv(&run, inputs.close()));
    if let Some(counts) = &run.sentiment_counts {
        out.file("sentiment.csv", sentiment_csv(counts));
    }
    if let Some(p) = &run.predictions {
        out.file("predictions.csv", p.to_csv());
    }

    for w in &warnings {
        out.say(format!("warning: {w}"));
    }
    out.say(summary_line(run.kind.id(), &outcome, run.path.final_value()));
    Ok(out)
}

fn summary_line(name: &str, outcome: &ReportOutcome, final_value: f64) -> String {
    match outcome {
        ReportOutcome::Report(r) => format!(
            "{name}: {} months, final value {final_value:.2}, cumulative return {}, Sharpe {} ± {} (annualized {}), hit rate {} (p = {})",
            r.n_months,
            pct(r.cumulative_return),
            fmt_opt(r.sharpe, 4),
            fmt_opt(r.sharpe_se, 4),
            fmt_opt(r.sharpe_annualized, 4),
            r.hit_rate.map_or_else(|| "n/a".into(), pct),
            fmt_opt(r.p_value, 4),
        ),
        ReportOutcome::InsufficientData { n_months } => {
            format!("{name}: {n_months} month(s) traded, final value {final_value:.2}, too few for statistics")
        }
        ReportOutcome::Missing => format!("{name}: no data"),
    }
}

/// `month<TAB>portfolio_value<TAB>price_index`, both indexed to 100 at the
/// first month of the path.
fn plot_tsv(run: &StrategyRun, close: &sentitrade_core::MonthlySeries) -> String {
    let mut out = String::from("month\tportfolio_value\tprice_index\n");
    let base = run.path.start_month().and_then(|m| close.get(m));
    for (m, v) in run.path.values.iter() {
        let index = match (base, close.get(m)) {
            (Some(b), Some(p)) => (p / b * 100.0).to_string(),
            _ => String::new(),
        };
        let _ = writeln!(out, "{m}\t{v}\t{index}");
    }
    out
}

#[derive(Serialize)]
struct RegimeFile<'a> {
    vol_window: usize,
    fractions: [f64; 2],
    volatility_min: f64,
    volatility_max: f64,
    thresholds: Thresholds,
    months: &'a BTreeMap<Regime, usize>,
    strategies: BTreeMap<&'static str, BTreeMap<Regime, ReportOutcome>>,
}

pub fn regimes(cfg: &RunConfig) -> CmdResult<Output> {
    cfg.validate_for(cfg.strategy).usage()?;
    let inputs = load_inputs(cfg)?;
    let mut kinds: BTreeSet<StrategyKind> = [StrategyKind::BuyAndHold, cfg.strategy].into();
    if inputs.headlines.is_some() {
        kinds.insert(StrategyKind::SentimentOnly);
    }

    let vol = rolling_volatility(&inputs.returns, cfg.evaluation.vol_window);
    let [lo, hi] = cfg.evaluation.regime_fractions;
    let mut warnings = inputs.warnings.clone();
    let thresholds = match regime_thresholds(&vol, lo, hi) {
        Ok(t) => t,
        Err(RegimeError::DegenerateRange(v)) => {
            warnings.push(format!("volatility is constant at {}; every month is in the low regime", pct(v)));
            Thresholds {
                low_medium: v,
                medium_high: v,
            }
        }
        Err(e) => return Err(Failure::Compute(e.into())),
    };
    let partition = classify_regimes(&vol, thresholds);
    let rf = cfg.evaluation.risk_free();

    let mut strategies = BTreeMap::new();
    for kind in kinds {
        let run = run_strategy(kind, cfg, &inputs)?;
        strategies.insert(kind.id(), regime_report(&run.path, &partition, &rf).compute()?);
    }

    let (vmin, vmax) = vol
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (_, v)| (a.min(v), b.max(v)));
    let mut tsv = String::from("strategy\tregime\tn_months\tsharpe\tsharpe_se\n");
    let mut table = format!("{:<16}", "strategy");
    for r in Regime::ALL {
        let _ = write!(table, "{:>22}", r.id());
    }
    table.push('\n');
    for (name, by_regime) in &strategies {
        let _ = write!(table, "{name:<16}");
        for r in Regime::ALL {
            let o = &by_regime[&r];
            let (n, sr, se) = match o {
                ReportOutcome::Report(rep) => (rep.n_months, rep.sharpe, rep.sharpe_se),
                ReportOutcome::InsufficientData { n_months } => (*n_months, None, None),
                ReportOutcome::Missing => (0, None, None),
            };
            let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(tsv, "{name}\t{}\t{n}\t{}\t{}", r.id(), opt(sr), opt(se));
            let cell = match (sr, se) {
                (Some(a), Some(b)) => format!("{a:.3} ± {b:.3}"),
                _ => format!("n/a (n={n})"),
            };
            let _ = write!(table, "{cell:>22}");
        }
        table.push('\n');
    }

    let mut out = Output::default();
    out.file("regimes.csv", partition.to_csv());
    out.json(
        "regime_reports.json",
        &RegimeFile {
            vol_window: cfg.evaluation.vol_window,
            fractions: cfg.evaluation.regime_fractions,
            volatility_min: vmin,
            volatility_max: vmax,
            thresholds,
            months: &partition.counts,
            strategies,
        },
    );
    out.file("regime_sharpe.tsv", tsv);

    for w in &warnings {
        out.say(format!("warning: {w}"));
    }
    out.say(format!("volatility range: {} to {}", pct(vmin), pct(vmax)));
    out.say(format!(
        "thresholds: low/medium {}, medium/high {}",
        pct(thresholds.low_medium),
        pct(thresholds.medium_high)
    ));
    out.say(format!(
        "months: {}",
        Regime::ALL
            .iter()
            .map(|r| format!("{} {}", r.id(), partition.counts[r]))
            .collect::<Vec<_>>()
            .join(", ")
    ));
    out.stdout.push_str(&table);
    Ok(out)
}

#[derive(Serialize)]
struct BestSubset {
    subset: Vec<Topic>,
    label: String,
    sharpe: Option<f64>,
    n_months: usize,
    outcome: ReportOutcome,
}

#[derive(Serialize)]
struct TopicsSummary {
    universe: Vec<Topic>,
    size_range: SizeRange,
    candidates: usize,
    closed_form_count: u128,
    topic_headlines: BTreeMap<Topic, u32>,
    all_topics: ReportOutcome,
    best: Option<BestSubset>,
}

#[derive(Serialize)]
struct EventTypeFile {
    overall: EventTypeReport,
    by_topic: BTreeMap<Topic, EventTypeReport>,
}

fn topic_failure(e: TopicPortfolioError) -> Failure {
    match e {
        TopicPortfolioError::Topic(t) => Failure::Usage(t.into()),
        TopicPortfolioError::Eval(e) => Failure::Compute(e.into()),
    }
}

pub fn topics(cfg: &RunConfig) -> CmdResult<Output> {
    cfg.headlines_path().usage()?;
    let base = cfg.filter.to_filter().usage()?;
    let range_text = cfg.evaluation.subset_sizes.clone();
    let inputs = load_inputs(cfg)?;
    let headlines = inputs.headlines()?;
    ensure_labeled(headlines)
        .map_err(|e| anyhow!("{e}; subset search needs topic labels"))
        .data()?;

    let universe: Vec<Topic> = if base.topics.is_empty() {
        Topic::ALL.to_vec()
    } else {
        base.topics.iter().copied().collect()
    };
    let range = cfg.evaluation.size_range(universe.len()).usage()?;
    range.validate(universe.len()).usage()?;
    let rf = cfg.evaluation.risk_free();
    let returns = &inputs.returns;

    let cache = CountCache::build(headlines, &base, returns);
    let search = enumerate_topic_subsets(&universe, range, &cache, returns, &rf).map_err(topic_failure)?;
    let all_topics_filter = HeadlineFilter {
        topics: BTreeSet::new(),
        ..base.clone()
    };
    let (all_topics, _) = sentiment_portfolio(headlines, &all_topics_filter, returns, &rf).compute()?;
    let events = EventTypeFile {
        overall: event_type_report(headlines, &all_topics_filter, returns, &rf).compute()?,
        by_topic: event_type_by_topic(headlines, &all_topics_filter, returns, &rf).compute()?,
    };

    let sources: Vec<String> = if cfg.topics.sources.is_empty() {
        headlines
            .iter()
            .map(|h| h.source.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    } else {
        cfg.topics.sources.iter().map(|s| s.trim().to_ascii_lowercase()).collect()
    };
    let matrix = source_comparison(headlines, &sources, returns, &rf).compute()?;

    let totals = cache.topic_totals();
    let summary = TopicsSummary {
        universe: universe.clone(),
        size_range: range,
        candidates: search.candidates,
        closed_form_count: candidate_count(universe.len(), range),
        topic_headlines: universe.iter().map(|t| (*t, totals[t.index()])).collect(),
        all_topics: all_topics.clone(),
        best: search.best().map(|b| BestSubset {
            subset: b.subset.topics().collect(),
            label: b.subset.to_string(),
            sharpe: b.sharpe,
            n_months: b.n_months,
            outcome: b.outcome.clone(),
        }),
    };

    let mut out = Output::default();
    out.file("subsets.csv", search.to_csv());
    out.json("event_types.json", &events);
    out.file("source_matrix.csv", matrix.to_csv());
    out.json("topics.json", &summary);

    for w in &inputs.warnings {
        out.say(format!("warning: {w}"));
    }
    let sizes = range_text.unwrap_or_else(|| format!("{}-{}", range.min, range.max));
    out.say(format!(
        "{} candidates (subset sizes {sizes} of {} topics)",
        search.candidates,
        universe.len()
    ));
    match search.best() {
        Some(b) if b.sharpe.is_some() => {
            out.say(format!("best subset: {}", b.subset));
            out.say(format!("best Sharpe: {} over {} months", fmt_opt(b.sharpe, 4), b.n_months));
        }
        _ => out.say("best subset: none with a defined Sharpe ratio"),
    }
    out.say(format!("all topics Sharpe: {}", fmt_opt(all_topics.sharpe(), 4)));
    Ok(out)
}

/// Replay file for an external grid cell:
/// `<family>_<feature set>_w<window>[_<k=v>_<k=v>...].csv`.
pub fn replay_file_name(spec: &ForecasterSpec) -> String {
    let mut name = format!("{}_{}_w{}", spec.family.id(), spec.feature_set, spec.window_len);
    let hp = spec.hyperparam_key();
    if !hp.is_empty() {
        name.push('_');
        name.push_str(&hp.replace(';', "_"));
    }
    name.push_str(".csv");
    name
}

#[derive(Serialize)]
struct GridFile<'a> {
    total_cells: usize,
    failed_cells: usize,
    best: &'a [ForecastRun],
}

pub fn grid(cfg: &RunConfig) -> CmdResult<Output> {
    let g = cfg
        .grid
        .as_ref()
        .ok_or_else(|| Failure::Usage(anyhow!("config has no [grid] section")))?;
    let spec = g.spec().usage()?;
    cfg.prices_path().usage()?;
    let cells = spec.cells();
    let external = cells.iter().any(|c| matches!(c.family, Family::External(_)));
    if external && g.predictions_dir.is_none() {
        return Err(Failure::Usage(anyhow!("grid has external families but no `grid.predictions_dir`")));
    }
    for c in &cells {
        c.validate().usage()?;
    }
    let inputs = load_inputs(cfg)?;

    let mut replays = BTreeMap::new();
    if let Some(dir) = &g.predictions_dir {
        for c in cells.iter().filter(|c| matches!(c.family, Family::External(_))) {
            let path = dir.join(replay_file_name(c));
            if path.exists() {
                replays.insert(c.cell_key(), load_predictions(&path).data()?);
            }
        }
    }
    let data = ForecastData {
        close: inputs.close().clone(),
        tabular: inputs.tabular(cfg),
        sentiment: inputs.sentiment_by_source(cfg, &spec.feature_sets)?,
    };
    let evaluator = WalkForwardEvaluator {
        data: &data,
        config: WalkForwardConfig {
            initial_train: g.initial_train,
            ..Default::default()
        },
        replays,
    };
    let result = grid_search(&spec, &evaluator);
    let failed = result.ranked.iter().filter(|r| r.metrics.is_none()).count();

    let mut out = Output::default();
    out.file("grid_all.csv", GridResult::to_csv(&result.ranked));
    out.file("grid_best.csv", GridResult::to_csv(&result.best));
    out.json(
        "grid.json",
        &GridFile {
            total_cells: result.total_cells,
            failed_cells: failed,
            best: &result.best,
        },
    );

    for w in &inputs.warnings {
        out.say(format!("warning: {w}"));
    }
    out.say(format!("{} cells", result.total_cells));
    if failed > 0 {
        out.say(format!("{failed} cells failed (see grid.json)"));
    }
    out.say(format!("{} best-per-group rows", result.best.len()));
    out.say(format!(
        "{:<14} {:<14} {:>6} {:<28} {:>10} {:>10}",
        "family", "source", "window", "hyperparams", "r2", "rmse"
    ));
    for r in &result.best {
        out.say(format!(
            "{:<14} {:<14} {:>6} {:<28} {:>10} {:>10}",
            r.spec.family.id(),
            r.spec.feature_set.to_string(),
            r.spec.window_len,
            r.spec.hyperparam_key(),
            fmt_opt(r.metrics.and_then(|m| m.r2), 4),
            fmt_opt(r.metrics.map(|m| m.rmse), 4),
        ));
    }
    Ok(out)
}

/// Parses every configured input and reports what was found.
pub fn validate(cfg: &RunConfig) -> CmdResult<Output> {
    cfg.validate_for(cfg.strategy).usage()?;
    cfg.filter.to_filter().usage()?;
    if let Some(fc) = &cfg.forecaster {
        fc.spec(sentitrade_core::forecast::FeatureSet::TabularOnly).validate().usage()?;
    }
    if let Some(g) = &cfg.grid {
        for c in g.spec().usage()?.cells() {
            c.validate().usage()?;
        }
    }
    if let Some(s) = &cfg.evaluation.subset_sizes {
        s.parse::<SizeRange>().map_err(anyhow::Error::msg).usage()?;
    }
    let inputs = load_inputs(cfg)?;

    let mut out = Output::default();
    let close = inputs.close();
    out.say(format!(
        "prices: {} daily rows, {} months ({} to {}), {} feature column(s)",
        inputs.daily_rows,
        close.len(),
        close.first_month().map(|m| m.to_string()).unwrap_or_default(),
        close.last_month().map(|m| m.to_string()).unwrap_or_default(),
        inputs.table.features.len()
    ));
    if let Some(h) = &inputs.headlines {
        let sources: BTreeSet<&str> = h.iter().map(|x| x.source.as_str()).collect();
        let labeled = h.iter().filter(|x| x.topic.is_some()).count();
        out.say(format!(
            "headlines: {} rows, sources [{}], {} with a topic label",
            h.len(),
            sources.into_iter().collect::<Vec<_>>().join(", "),
            labeled
        ));
    }
    if let Some(p) = &inputs.predictions {
        out.say(format!("predictions: {} months", p.len()));
    }
    for w in &inputs.warnings {
        out.say(format!("warning: {w}"));
    }
    out.say("ok");
    Ok(out)
}

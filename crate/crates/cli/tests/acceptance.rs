//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sentitrade_core::evaluation::{binomial_test_two_sided, cumulative_return, hit_rate, sharpe_of, RiskFree};
use sentitrade_core::forecast::{
    build_windows, grid_search, point_metrics_aligned, walk_forward, FeatureSet, Family, ForecastData,
    ForecasterSpec, GridSpec, GridTemplate, TrainingWindow, WalkForwardConfig, WalkForwardEvaluator,
};
use sentitrade_core::ingest::{
    impute_missing, parse_headlines, parse_prices, resample_monthly, returns_where_defined, simple_returns,
    AggregationRules, PriceSchema,
};
use sentitrade_core::regimes::{regime_thresholds, rolling_volatility};
use sentitrade_core::sentiment::monthly_score;
use sentitrade_core::strategy::{buy_and_hold, price_signals, signal_calendar, simulate, SignalOrigin};
use sentitrade_core::topics::{
    candidate_count, enumerate_topic_subsets, improvement_pct, subsets_in_range, topic_portfolio, CountCache,
    SizeRange,
};
use sentitrade_core::{HeadlineFilter, Month, MonthlySeries, Position, SignalSeries, Topic};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn month(s: &str) -> Month {
    s.parse().unwrap()
}

fn close_enough(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()) + 1e-12
}

fn worked_example_trades() -> Outcome {
    let close = MonthlySeries::from_pairs(
        "close",
        common::WORKED_PRICES
            .iter()
            .map(|(d, c)| (Month::of_date(d.parse().unwrap()), *c)),
    );
    let returns = returns_where_defined(&close);
    let expected_pct = [9.33, 9.64, 8.97];
    let mut detail = Vec::new();
    for (with_sentiment, sign, positions) in [
        (true, 1.0, [Position::Short, Position::Long, Position::Short]),
        (false, -1.0, [Position::Long, Position::Short, Position::Long]),
    ] {
        let preds = MonthlySeries::from_pairs(
            "pred",
            common::WORKED_PREDICTIONS
                .iter()
                .map(|(m, plain, sent)| (month(m), if with_sentiment { *sent } else { *plain })),
        );
        let signals = price_signals(&preds, &close).map_err(|e| e.to_string())?;
        let got: Vec<Position> = signals.iter().map(|(_, p)| p).collect();
        ensure(got == positions, || format!("signals {got:?}, expected {positions:?}"))?;
        let path = simulate(&signals, &returns, 0.0).map_err(|e| e.to_string())?;
        let rets = path.period_returns.values();
        ensure(rets.len() == 3, || format!("{} period returns", rets.len()))?;
        for (r, e) in rets.iter().zip(expected_pct) {
            let want = sign * e;
            ensure((r * 100.0 - want).abs() <= 0.01, || {
                format!("period return {:.4}% vs {want}%", r * 100.0)
            })?;
        }
        detail.push(
            rets.iter()
                .map(|r| format!("{:+.3}%", r * 100.0))
                .collect::<Vec<_>>()
                .join(" "),
        );
    }
    Ok(format!("sentiment model {}; no-sentiment model {}", detail[0], detail[1]))
}

fn sentiment_aggregation() -> Outcome {
    let mut rows = Vec::new();
    for (i, label) in ["positive"; 6]
        .iter()
        .chain(&["neutral"; 2])
        .chain(&["negative"; 2])
        .enumerate()
    {
        rows.push(common::Headline {
            date: ["2019-05-03", "2019-05-10", "2019-05-17", "2019-05-24", "2019-05-31"][i % 5],
            source: "reuters",
            text: "aluminium",
            sentiment: label,
            topic: "",
            event_type: "",
        });
    }
    let score_of = |rows: &[common::Headline]| -> Result<Vec<f64>, String> {
        let parsed = parse_headlines(common::headlines_csv(rows).as_bytes()).map_err(|e| e.to_string())?;
        Ok(monthly_score(&parsed, &HeadlineFilter::all()).values())
    };
    let ten = score_of(&rows)?;
    ensure(ten == vec![0.4], || format!("6/2/2 month scored {ten:?}"))?;
    let feb = score_of(&common::feb_2020())?;
    ensure(feb == vec![-1.0], || format!("February 2020 scored {feb:?}"))?;
    let dec = score_of(&common::dec_2021())?;
    ensure(dec.len() == 1 && (dec[0] - 0.1818).abs() <= 0.005, || {
        format!("December 2021 scored {dec:?}")
    })?;
    Ok(format!("0.4, {}, {:.4}", feb[0], dec[0]))
}

/// Alternating returns whose six-month annualized volatility is exactly
/// `low` in the first part and `high` in the second.
fn two_level_returns(low: f64, high: f64) -> MonthlySeries {
    let scale = 14.4f64.sqrt();
    let values: Vec<f64> = (0..40)
        .map(|i| {
            let amp = if i < 20 { low } else { high } / scale;
            if i % 2 == 0 {
                amp
            } else {
                -amp
            }
        })
        .collect();
    MonthlySeries::contiguous("r", month("2010-01"), &values)
}

fn regime_threshold_echo() -> Outcome {
    let vol = MonthlySeries::from_pairs(
        "vol",
        [(month("2020-01"), 0.1), (month("2020-02"), 0.0113), (month("2020-03"), 0.3747)],
    );
    let t = regime_thresholds(&vol, 0.2, 0.5).map_err(|e| e.to_string())?;
    let check = |t: sentitrade_core::regimes::Thresholds| {
        ensure(
            (t.low_medium * 100.0 - 8.40).abs() <= 0.01 && (t.medium_high * 100.0 - 19.30).abs() <= 0.01,
            || format!("thresholds {:.4}% / {:.4}%", t.low_medium * 100.0, t.medium_high * 100.0),
        )
    };
    check(t)?;
    let rolled = rolling_volatility(&two_level_returns(0.0113, 0.3747), 6);
    let t2 = regime_thresholds(&rolled, 0.2, 0.5).map_err(|e| e.to_string())?;
    check(t2)?;
    Ok(format!(
        "{:.2}% / {:.2}% (direct), {:.2}% / {:.2}% (from returns)",
        t.low_medium * 100.0,
        t.medium_high * 100.0,
        t2.low_medium * 100.0,
        t2.medium_high * 100.0
    ))
}

fn pascal_sum(n: usize, min: usize, max: usize) -> u128 {
    let mut row = vec![1u128];
    for _ in 0..n {
        let mut next = vec![1u128; row.len() + 1];
        for k in 1..row.len() {
            next[k] = row[k - 1] + row[k];
        }
        row = next;
    }
    row[min..=max].iter().sum()
}

fn load_corpus(seed: u64, months: usize) -> (MonthlySeries, Vec<sentitrade_core::HeadlineRecord>) {
    let corpus = common::synthetic_corpus(seed, months);
    let bars = parse_prices(corpus.prices.as_bytes(), &PriceSchema::default()).unwrap();
    let table = resample_monthly(&impute_missing(&bars).unwrap(), AggregationRules::default());
    let headlines = parse_headlines(corpus.headlines.as_bytes()).unwrap();
    (simple_returns(&table.close).unwrap(), headlines)
}

fn subset_counts() -> Outcome {
    let start = Instant::now();
    let topics = Topic::ALL;
    let default = SizeRange::proper(12);
    let narrow = SizeRange { min: 2, max: 11 };
    let n_default = subsets_in_range(&topics, default).map_err(|e| e.to_string())?.len();
    let n_narrow = subsets_in_range(&topics, narrow).map_err(|e| e.to_string())?.len();
    ensure(n_default == 4094 && candidate_count(12, default) == 4094 && pascal_sum(12, 1, 11) == 4094, || {
        format!("default mode gives {n_default}")
    })?;
    ensure(n_narrow == 4082 && candidate_count(12, narrow) == 4082 && pascal_sum(12, 2, 11) == 4082, || {
        format!("sizes 2-11 give {n_narrow}")
    })?;
    let counting = start.elapsed();
    ensure(counting < Duration::from_secs(1), || format!("counting took {counting:?}"))?;

    let (returns, headlines) = load_corpus(11, 207);
    ensure(returns.len() == 206, || format!("{} return months", returns.len()))?;
    let rf = RiskFree::default();
    let start = Instant::now();
    let cache = CountCache::build(&headlines, &HeadlineFilter::all(), &returns);
    let search = enumerate_topic_subsets(&topics, default, &cache, &returns, &rf).map_err(|e| e.to_string())?;
    let eval = start.elapsed();
    ensure(search.ranked.len() == 4094, || format!("{} evaluated", search.ranked.len()))?;
    ensure(eval < Duration::from_secs(10), || format!("evaluation took {eval:?}"))?;
    let best = search.best().unwrap();
    let (direct, _) = topic_portfolio(&headlines, best.subset, &HeadlineFilter::all(), &returns, &rf)
        .map_err(|e| e.to_string())?;
    ensure(direct.sharpe() == best.sharpe, || "best subset disagrees with direct recomputation".into())?;
    Ok(format!("4094 / 4082 candidates in {counting:?}; 4094 subsets over 206 months in {eval:?}"))
}

fn improvement_convention() -> Outcome {
    let a = improvement_pct(0.525, 0.714).ok_or("undefined")?;
    let b = improvement_pct(0.164, -0.073).ok_or("undefined")?;
    let msg = format!("{a:+.2}% (expected -26.6%), {b:+.2}% (expected +323.9%)");
    ensure((a - -26.6).abs() <= 0.5 && (b - 323.9).abs() <= 0.5, || msg.clone())?;
    Ok(msg)
}

fn oracle_point_metrics(y: &[f64], p: &[f64]) -> (Option<f64>, f64, f64) {
    let n = y.len() as f64;
    let ybar = y.iter().sum::<f64>() / n;
    let ss_res: f64 = y.iter().zip(p).map(|(a, b)| (a - b).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|a| (a - ybar).powi(2)).sum();
    let mae = y.iter().zip(p).map(|(a, b)| (a - b).abs()).sum::<f64>() / n;
    ((ss_tot > 0.0).then(|| 1.0 - ss_res / ss_tot), (ss_res / n).sqrt(), mae)
}

fn oracle_sharpe(r: &[f64], rf: f64) -> (f64, f64) {
    let n = r.len() as f64;
    let ex: Vec<f64> = r.iter().map(|x| x - rf).collect();
    let m = ex.iter().sum::<f64>() / n;
    let var = ex.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    let sr = m / var.sqrt();
    (sr, ((1.0 + sr * sr / 2.0) / n).sqrt())
}

fn binom(n: u64, k: u64) -> BigUint {
    let mut c = BigUint::one();
    for i in 0..k {
        c = c * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    c
}

/// Exact two-sided p-value at p = 1/2: total mass of outcomes no more likely
/// than the observed one.
fn oracle_p_value(k: u64, n: u64) -> f64 {
    let observed = binom(n, k);
    let mut mass = BigUint::zero();
    for i in 0..=n {
        let c = binom(n, i);
        if c <= observed {
            mass += c;
        }
    }
    let denom = BigUint::one() << n as usize;
    if mass >= denom {
        return 1.0;
    }
    mass.to_f64().unwrap() / denom.to_f64().unwrap()
}

fn metric_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let rel = 1e-9;
    let jan = month("2000-01");
    let mut checked = 0;
    for trial in 0..1000 {
        let n = rng.gen_range(2..=50);
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.2..0.2)).collect();
        let p: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.2..0.2)).collect();

        let m = point_metrics_aligned(&y, &p).map_err(|e| e.to_string())?;
        let (r2, rmse, mae) = oracle_point_metrics(&y, &p);
        ensure(
            close_enough(m.r2.unwrap(), r2.unwrap(), rel) && close_enough(m.rmse, rmse, rel) && close_enough(m.mae, mae, rel),
            || format!("trial {trial}: point metrics {m:?} vs {r2:?} {rmse} {mae}"),
        )?;

        let rf = rng.gen_range(0.0..0.01);
        let s = sharpe_of(&y, rf).map_err(|e| e.to_string())?;
        let (sr, se) = oracle_sharpe(&y, rf);
        ensure(close_enough(s.sharpe, sr, rel) && close_enough(s.se, se, rel), || {
            format!("trial {trial}: Sharpe {} ± {} vs {sr} ± {se}", s.sharpe, s.se)
        })?;
        ensure(close_enough(s.se, ((1.0 + s.sharpe.powi(2) / 2.0) / n as f64).sqrt(), rel), || {
            format!("trial {trial}: standard error off closed form")
        })?;
        ensure(close_enough(s.annualized, sr * 12f64.sqrt(), rel), || format!("trial {trial}: annualized"))?;

        let series = MonthlySeries::contiguous("r", jan, &y);
        let cr = cumulative_return(&series).map_err(|e| e.to_string())?;
        let mut growth = 1.0;
        for r in &y {
            growth *= 1.0 + r;
        }
        ensure(close_enough(cr, growth - 1.0, rel), || format!("trial {trial}: cumulative {cr} vs {}", growth - 1.0))?;

        let mut signals = SignalSeries::new(SignalOrigin::SentimentOnly);
        for i in 0..n {
            let pos = [Position::Short, Position::Flat, Position::Long][rng.gen_range(0..3)];
            signals.entries.insert(jan.offset(i as i64 - 1), pos);
        }
        if signals.iter().any(|(_, p)| p.is_active()) {
            let h = hit_rate(&signals, &series).map_err(|e| e.to_string())?;
            let hits = signals
                .iter()
                .filter(|(m, pos)| pos.is_active() && (pos.as_f64() * series.get(m.next()).unwrap()) > 0.0)
                .count() as u64;
            let active = signals.iter().filter(|(_, p)| p.is_active()).count() as u64;
            ensure(h.hits == hits && h.n_active == active, || format!("trial {trial}: hit counts"))?;
            let want = oracle_p_value(hits, active);
            ensure(close_enough(h.p_value, want, rel), || {
                format!("trial {trial}: p-value {} vs {want} (k={hits}, n={active})", h.p_value)
            })?;
            ensure(close_enough(binomial_test_two_sided(hits, active, 0.5), want, rel), || {
                format!("trial {trial}: binomial test")
            })?;
        }
        checked += 1;
    }
    Ok(format!("{checked} random vectors, relative tolerance {rel:e}"))
}

fn no_leakage() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let start = month("2001-01");
    for trial in 0..100 {
        let len = rng.gen_range(30..60);
        let mut level = 100.0;
        let close: Vec<f64> = (0..len)
            .map(|_| {
                level *= 1.0 + rng.gen_range(-0.08..0.08);
                level
            })
            .collect();
        let exo: Vec<f64> = (0..len).map(|_| rng.gen_range(0.0..10.0)).collect();
        let sent: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let window = rng.gen_range(1..=6);
        let spec = match rng.gen_range(0..3) {
            0 => ForecasterSpec::new(Family::Persistence, FeatureSet::TabularOnly, window),
            1 => ForecasterSpec::new(Family::ArLs, FeatureSet::TabularOnly, window).with_param("order", rng.gen_range(1..=window) as f64),
            _ => ForecasterSpec::new(Family::RidgeWindow, FeatureSet::TabularOnly, window).with_param("lambda", rng.gen_range(0.0..5.0)),
        };
        let config = WalkForwardConfig {
            initial_train: rng.gen_range(3..10),
            training: if rng.gen_bool(0.5) {
                TrainingWindow::Expanding
            } else {
                TrainingWindow::Rolling(rng.gen_range(4..12))
            },
        };
        let predict = |close: &[f64], exo: &[f64], sent: &[f64]| {
            let c = MonthlySeries::contiguous("close", start, close);
            let features = [
                c.clone(),
                MonthlySeries::contiguous("exo", start, exo),
                MonthlySeries::contiguous("sent", start, sent),
            ];
            let ds = build_windows(&features, &c, spec.window_len).unwrap();
            let model = spec.build(None).unwrap();
            walk_forward(&spec, model.as_ref(), &ds, &config).unwrap().predictions.entries
        };
        let base = predict(&close, &exo, &sent);
        let months: Vec<Month> = base.months().collect();
        let cut = months[rng.gen_range(0..months.len())];
        let cut_idx = start.months_until(cut) as usize;
        let (mut c2, mut e2, mut s2) = (close.clone(), exo.clone(), sent.clone());
        for i in cut_idx + 1..len {
            c2[i] *= rng.gen_range(0.5..1.5);
            e2[i] = rng.gen_range(-100.0..100.0);
            s2[i] = -s2[i];
        }
        let perturbed = predict(&c2, &e2, &s2);
        for (m, v) in base.iter().filter(|(m, _)| *m <= cut) {
            let w = perturbed.get(m).unwrap();
            ensure(v.to_bits() == w.to_bits(), || {
                format!("trial {trial} ({}): prediction issued {m} changed after perturbing data past {cut}", spec.cell_key())
            })?;
        }
    }
    Ok("100 randomized runs, earlier predictions bit-identical".into())
}

fn full_grid_data() -> (ForecastData, BTreeMap<String, MonthlySeries>, GridSpec) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let start = month("2012-01");
    let n = 48;
    let mut level = 2000.0;
    let close: Vec<f64> = (0..n)
        .map(|_| {
            level *= 1.0 + rng.gen_range(-0.05..0.05);
            level
        })
        .collect();
    let close = MonthlySeries::contiguous("close", start, &close);
    let exo = MonthlySeries::contiguous("inventory", start, &(0..n).map(|_| rng.gen_range(400.0..600.0)).collect::<Vec<_>>());
    let mut sentiment = BTreeMap::new();
    for src in common::SOURCES {
        let s: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        sentiment.insert(src.to_string(), MonthlySeries::contiguous(src, start, &s));
    }
    let sweep: BTreeMap<String, Vec<f64>> = [
        ("hidden_size".to_string(), vec![16.0, 32.0, 64.0, 128.0, 256.0]),
        ("num_layers".to_string(), vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]),
    ]
    .into();
    let template = |family: Family, base: &[(&str, f64)]| GridTemplate {
        family,
        base: base.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        sweep: sweep.clone(),
    };
    let grid = GridSpec {
        templates: vec![
            template(Family::Persistence, &[]),
            template(Family::ArLs, &[("order", 1.0)]),
            template(Family::RidgeWindow, &[("lambda", 1.0)]),
            template(Family::External("lstm".into()), &[]),
            template(Family::External("gru".into()), &[]),
        ],
        feature_sets: std::iter::once(FeatureSet::TabularOnly)
            .chain(common::SOURCES.iter().map(|s| FeatureSet::WithSentiment(s.to_string())))
            .collect(),
        windows: vec![1, 3, 6, 12],
    };
    let mut replays = BTreeMap::new();
    for cell in grid.cells().iter().filter(|c| matches!(c.family, Family::External(_))) {
        let noise = cell.param("hidden_size").unwrap() * 0.01 + cell.param("num_layers").unwrap();
        let preds = MonthlySeries::from_pairs(
            "predicted_close",
            close.iter().map(|(m, c)| (m, c * (1.0 + noise * 0.001 * rng.gen_range(-1.0..1.0)))),
        );
        replays.insert(cell.cell_key(), preds);
    }
    let data = ForecastData {
        close: close.clone(),
        tabular: vec![close, exo],
        sentiment,
    };
    (data, replays, grid)
}

fn grid_bookkeeping() -> Outcome {
    let (data, replays, grid) = full_grid_data();
    let evaluator = WalkForwardEvaluator {
        data: &data,
        config: WalkForwardConfig::default(),
        replays,
    };
    let result = grid_search(&grid, &evaluator);
    let failed: Vec<String> = result
        .ranked
        .iter()
        .filter(|r| r.metrics.is_none())
        .map(|r| format!("{}: {}", r.spec.cell_key(), r.error.clone().unwrap_or_default()))
        .collect();
    ensure(result.total_cells == 2400 && result.ranked.len() == 2400, || {
        format!("{} cells", result.total_cells)
    })?;
    ensure(result.best.len() == 80, || format!("{} best-per-group rows", result.best.len()))?;
    ensure(failed.is_empty(), || format!("{} failed cells, first: {}", failed.len(), failed[0]))?;
    Ok("2400 cells, 80 best-per-group rows".into())
}

fn read_tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = common::synthetic_workspace(dir.path(), 90);
    let runs: Vec<(&str, Vec<&str>)> = vec![
        ("backtest", vec!["--strategy", "sentiment_only"]),
        ("backtest", vec!["--strategy", "price_based"]),
        ("backtest", vec!["--strategy", "combined"]),
        ("backtest", vec!["--strategy", "buy_and_hold"]),
        ("regimes", vec![]),
        ("topics", vec!["--subset-sizes", "1-11"]),
        ("grid", vec![]),
        ("validate", vec![]),
    ];
    let mut files = 0;
    for (i, (cmd, extra)) in runs.iter().enumerate() {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let out_dir = dir.path().join(format!("run{i}_{rep}"));
            let mut args = vec![*cmd, "--out-dir", out_dir.to_str().unwrap()];
            args.extend(extra);
            let o = common::run(&config, &args);
            ensure(o.status.success(), || format!("{cmd} {extra:?} failed: {}", common::stderr(&o)))?;
            let tree = if out_dir.exists() { read_tree(&out_dir) } else { BTreeMap::new() };
            outputs.push((o.stdout, tree));
        }
        ensure(outputs[0] == outputs[1], || format!("{cmd} {extra:?} differs between runs"))?;
        files += outputs[0].1.len();
    }
    Ok(format!(
        "{} command runs, {files} output files byte-identical (parallel: {})",
        runs.len(),
        sentitrade_core::par::is_parallel()
    ))
}

fn sign_symmetry() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let jan = month("1995-01");
    for trial in 0..200 {
        let n = rng.gen_range(2..80);
        let mut level = rng.gen_range(50.0..5000.0);
        let prices: Vec<f64> = (0..n)
            .map(|_| {
                let p = level;
                level *= 1.0 + rng.gen_range(-0.15..0.15);
                p
            })
            .collect();
        let close = MonthlySeries::contiguous("close", jan, &prices);
        let returns = simple_returns(&close).map_err(|e| e.to_string())?;

        let mut signals = SignalSeries::new(SignalOrigin::SentimentOnly);
        for i in 0..n - 1 {
            signals.entries.insert(jan.offset(i as i64), [Position::Short, Position::Flat, Position::Long][rng.gen_range(0..3)]);
        }
        let a = simulate(&signals, &returns, 0.0).map_err(|e| e.to_string())?;
        let b = simulate(&signals.negated(), &returns, 0.0).map_err(|e| e.to_string())?;
        for ((m, x), (_, y)) in a.period_returns.iter().zip(b.period_returns.iter()) {
            ensure(x == -y, || format!("trial {trial}: {m} returns {x} and {y}"))?;
        }

        let bh = simulate(&buy_and_hold(signal_calendar(&returns)), &returns, 0.0)
            .map_err(|e| e.to_string())?;
        for (m, v) in bh.values.iter() {
            let want = close.get(m).unwrap() / prices[0] * 100.0;
            ensure((v - want).abs() <= 1e-12 * want, || format!("trial {trial}: buy-and-hold {m} {v} vs {want}"))?;
        }

        let flat = SignalSeries {
            origin: SignalOrigin::SentimentOnly,
            entries: signals.entries.keys().map(|m| (*m, Position::Flat)).collect(),
        };
        let f = simulate(&flat, &returns, 0.0).map_err(|e| e.to_string())?;
        ensure(f.values.iter().all(|(_, v)| v == 100.0), || format!("trial {trial}: all-flat path moved"))?;
    }
    Ok("200 random paths".into())
}

fn main() {
    let criteria: Vec<(&str, Option<Duration>, fn() -> Outcome)> = vec![
        ("worked example trades", Some(Duration::from_secs(1)), worked_example_trades),
        ("sentiment aggregation", Some(Duration::from_secs(1)), sentiment_aggregation),
        ("regime thresholds", Some(Duration::from_secs(1)), regime_threshold_echo),
        ("subset enumeration counts", None, subset_counts),
        ("improvement percentage convention", None, improvement_convention),
        ("metric oracles", None, metric_oracles),
        ("no leakage in walk-forward", None, no_leakage),
        ("grid bookkeeping", None, grid_bookkeeping),
        ("determinism of every command", None, determinism),
        ("sign symmetry", None, sign_symmetry),
    ];
    let mut failures = 0;
    for (name, limit, check) in criteria {
        let start = Instant::now();
        let mut outcome = check();
        let elapsed = start.elapsed();
        if let (Ok(_), Some(limit)) = (&outcome, limit) {
            if elapsed > limit {
                outcome = Err(format!("took {elapsed:?}, limit {limit:?}"));
            }
        }
        match outcome {
            Ok(detail) => println!("PASS  {name:<36} {:>9.3}s  {detail}", elapsed.as_secs_f64()),
            Err(detail) => {
                failures += 1;
                println!("FAIL  {name:<36} {:>9.3}s  {detail}", elapsed.as_secs_f64());
            }
        }
    }
    if failures > 0 {
        println!("{failures} criterion(s) failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}

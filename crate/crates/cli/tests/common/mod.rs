#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TOPICS: [&str; 12] = [
    "price_movement",
    "environmental",
    "other",
    "market_analysis",
    "production_output",
    "macroeconomic",
    "inventory_stocks",
    "demand_outlook",
    "supply_disruption",
    "company_news",
    "trade_policy",
    "geopolitical",
];

pub const SOURCES: [&str; 3] = ["reuters", "dowjones", "chinaservice"];

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sentitrade"))
}

pub fn run(config: &Path, args: &[&str]) -> Output {
    bin()
        .arg("--config")
        .arg(config)
        .args(args)
        .env_remove("SENTITRADE_CONFIG")
        .output()
        .expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

pub struct Headline<'a> {
    pub date: &'a str,
    pub source: &'a str,
    pub text: &'a str,
    pub sentiment: &'a str,
    pub topic: &'a str,
    pub event_type: &'a str,
}

pub fn headlines_csv(rows: &[Headline]) -> String {
    let mut out = String::from("date,source,text,sentiment,topic,event_type\n");
    for h in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            h.date,
            h.source,
            quote(h.text),
            h.sentiment,
            h.topic,
            h.event_type
        ));
    }
    out
}

fn reuters<'a>(date: &'a str, text: &'a str, sentiment: &'a str) -> Headline<'a> {
    Headline {
        date,
        source: "Reuters",
        text,
        sentiment,
        topic: "",
        event_type: "",
    }
}

/// February 2020: seven negative headlines.
pub fn feb_2020() -> Vec<Headline<'static>> {
    vec![
        reuters("2020-02-28", "Coronavirus will negatively affect aluminum market in China", "negative"),
        reuters("2020-02-24", "Coronavirus double shock for aluminium sector", "negative"),
        reuters("2020-02-24", "LME aluminium can test support at $1,688", "negative"),
        reuters("2020-02-18", "Japan aluminium stocks down 2.8%", "negative"),
        reuters("2020-02-10", "LME aluminium testing support at $1,709", "negative"),
        reuters("2020-02-03", "LME aluminium seeking support at $1,709", "negative"),
        reuters("2020-02-03", "Shanghai metals limit-down amid coronavirus fears", "negative"),
    ]
}

/// December 2021: five positive, three neutral, three negative.
pub fn dec_2021() -> Vec<Headline<'static>> {
    vec![
        reuters("2021-12-30", "Norway's Hydro to cut Slovakia aluminium output further due to power prices", "negative"),
        reuters("2021-12-30", "Copper slips in range-bound trade, aluminium shines on supply worries", "negative"),
        reuters("2021-12-23", "Power price surge pushes aluminium to 2-month high", "positive"),
        reuters("2021-12-15", "China Nov aluminium output at 3.10 mln tonnes -- stats bureau", "neutral"),
        reuters("2021-12-15", "Scarce supplies to propel aluminium to top LME leaderboard", "positive"),
        reuters("2021-12-07", "Marubeni sees Japanese aluminium premiums at $140-$250/T in 2022", "neutral"),
        reuters("2021-12-03", "Aluminium prices firm as China plans hiking coal contract prices", "positive"),
        reuters("2021-12-03", "Japan aluminium stocks in October up 1.1% m/m -- Marubeni", "positive"),
        reuters("2021-12-02", "London aluminium edges higher as stockpiles fall, demand recovers", "positive"),
        reuters("2021-12-02", "Aluminium dips on Omicron fears, but low inventories cushion fall", "negative"),
        reuters("2021-12-01", "Carbon brakes aluminium supply response to booming prices: Andy Home", "neutral"),
    ]
}

/// April 2022: one positive, one neutral, seven negative.
pub fn apr_2022() -> Vec<Headline<'static>> {
    vec![
        reuters("2022-04-29", "London aluminium poised for worst month in over a decade on growth risks", "negative"),
        reuters("2022-04-26", "China Shenhuo to raise aluminium output in Yunnan as power curbs ease", "positive"),
        reuters("2022-04-20", "Global aluminium output falls 1.55% in March year on year, IAI says", "negative"),
        reuters("2022-04-12", "Shanghai aluminium hits 3-month low on strong dollar, demand woes", "negative"),
        reuters("2022-04-12", "Shanghai aluminium sinks to 3-month low as demand woes linger", "negative"),
        reuters("2022-04-11", "China demand angst hits aluminium prices", "negative"),
        reuters("2022-04-08", "Shanghai aluminium slips to over 3-week low as demand concerns weigh", "negative"),
        reuters("2022-04-07", "Japan aluminium buyers to pay lower premiums for April-June imports", "negative"),
        reuters("2022-04-07", "Japan buyers agree to Q2 aluminium premium of $172/T, sources say", "neutral"),
    ]
}

/// Month-end closes around the three worked months.
pub const WORKED_PRICES: [(&str, f64); 6] = [
    ("2020-02-28", 1940.50),
    ("2020-03-31", 1759.43),
    ("2021-12-31", 3052.88),
    ("2022-01-31", 3347.41),
    ("2022-04-29", 3345.02),
    ("2022-05-31", 3044.82),
];

/// Forecasts issued in each worked month: (month, without sentiment, with sentiment).
pub const WORKED_PREDICTIONS: [(&str, f64, f64); 3] = [
    ("2020-02", 1974.37, 1899.57),
    ("2021-12", 3044.21, 3088.49),
    ("2022-04", 3374.74, 3326.42),
];

pub fn prices_csv(rows: &[(String, f64)]) -> String {
    let mut out = String::from("date,close\n");
    for (d, c) in rows {
        out.push_str(&format!("{d},{c}\n"));
    }
    out
}

pub fn worked_prices_csv() -> String {
    prices_csv(&WORKED_PRICES.iter().map(|(d, c)| (d.to_string(), *c)).collect::<Vec<_>>())
}

pub fn worked_predictions_csv(with_sentiment: bool) -> String {
    let mut out = String::from("month,predicted_close\n");
    for (m, plain, sent) in WORKED_PREDICTIONS {
        out.push_str(&format!("{m},{}\n", if with_sentiment { sent } else { plain }));
    }
    out
}

/// A seeded synthetic market: `months` month-end closes plus a daily
/// exogenous column, and a labeled multi-source headline corpus.
pub struct Corpus {
    pub prices: String,
    pub headlines: String,
}

pub fn synthetic_corpus(seed: u64, months: usize) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut prices = String::from("date,close,inventory\n");
    let mut headlines = String::from("date,source,text,sentiment,topic,event_type\n");
    let mut close = 1800.0f64;
    let mut inventory = 500.0f64;
    let (mut year, mut month) = (2005, 1u32);
    for i in 0..months {
        let vol = if (i / 40) % 2 == 0 { 0.02 } else { 0.08 };
        let r: f64 = rng.gen_range(-1.0..1.0) * vol * 1.7;
        for day in [10u32, 20, 28] {
            inventory *= 1.0 + rng.gen_range(-0.03..0.03);
            let c = close * (1.0 + r * day as f64 / 28.0);
            prices.push_str(&format!("{year}-{month:02}-{day:02},{c:.4},{inventory:.3}\n"));
        }
        close *= 1.0 + r;
        let n = rng.gen_range(0..7);
        for k in 0..n {
            let source = SOURCES[rng.gen_range(0..3)];
            let topic = TOPICS[rng.gen_range(0..12)];
            let bias = if r > 0.0 { 0.6 } else { 0.4 };
            let u: f64 = rng.gen();
            let sentiment = if u < bias * 0.8 {
                "positive"
            } else if u < bias * 0.8 + 0.2 {
                "neutral"
            } else {
                "negative"
            };
            let event = if rng.gen_bool(0.5) { "forward_looking" } else { "occurred" };
            let day = 1 + (k as u32 * 4) % 27;
            headlines.push_str(&format!(
                "{year}-{month:02}-{day:02},{source},\"headline {i}-{k}\",{sentiment},{topic},{event}\n"
            ));
        }
        month += 1;
        if month > 12 {
            month = 1;
            year += 1;
        }
    }
    Corpus { prices, headlines }
}

/// Writes the synthetic corpus and a config covering every command.
pub fn synthetic_workspace(dir: &Path, months: usize) -> PathBuf {
    let corpus = synthetic_corpus(7, months);
    write(dir, "prices.csv", &corpus.prices);
    write(dir, "headlines.csv", &corpus.headlines);
    write(
        dir,
        "run.toml",
        r#"
strategy = "combined"
output_dir = "out"

[data]
prices = "prices.csv"
headlines = "headlines.csv"

[filter]
sources = ["reuters"]

[forecaster]
family = "ridge_window"
window = 3
hyperparams = { lambda = 0.5 }

[evaluation]
cost_per_switch = 0.001
subset_sizes = "1-3"

[grid]
feature_sets = ["no-sentiment", "reuters", "dowjones"]
windows = [1, 3, 6]

[[grid.templates]]
family = "persistence"

[[grid.templates]]
family = "ar_ls"
sweep = { order = [1, 2] }

[[grid.templates]]
family = "ridge_window"
sweep = { lambda = [0.1, 1.0, 10.0] }
"#,
    )
}

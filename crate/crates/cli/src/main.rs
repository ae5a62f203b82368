//! `sentitrade`: run backtests, regime and topic analyses and forecaster
//! grids from a TOML config.

mod commands;
mod config;
mod failure;
mod output;
mod pipeline;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Overrides;
use config::{RunConfig, StrategyKind};
use failure::{Classify, CmdResult};

#[derive(Parser, Debug)]
#[command(name = "sentitrade", version, about = "Sentiment and forecast driven commodity backtests")]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true, env = "SENTITRADE_CONFIG")]
    config: Option<PathBuf>,

    /// Directory for output files; overrides `output_dir`.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    strategy: Option<StrategyKind>,

    /// Restrict headlines to one source.
    #[arg(long, global = true)]
    source: Option<String>,

    /// Forecaster input window in months.
    #[arg(long, global = true)]
    window: Option<usize>,

    /// Subset size range for topic search, e.g. `2-11`.
    #[arg(long, global = true)]
    subset_sizes: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Simulate the configured strategy and write its report, path and plot data.
    Backtest,
    /// Split returns into volatility regimes and report each strategy per regime.
    Regimes,
    /// Rank topic subsets and compare event types and sources.
    Topics,
    /// Evaluate every forecaster configuration in the grid.
    Grid,
    /// Check the config and parse all inputs without computing anything.
    Validate,
}

fn run(cli: &Cli) -> CmdResult<()> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path).usage()?,
        None => RunConfig::default(),
    };
    Overrides {
        out_dir: cli.out_dir.clone(),
        strategy: cli.strategy,
        source: cli.source.clone(),
        window: cli.window,
        subset_sizes: cli.subset_sizes.clone(),
    }
    .apply(&mut cfg);

    let out = match cli.command {
        Command::Backtest => commands::backtest(&cfg)?,
        Command::Regimes => commands::regimes(&cfg)?,
        Command::Topics => commands::topics(&cfg)?,
        Command::Grid => commands::grid(&cfg)?,
        Command::Validate => commands::validate(&cfg)?,
    };
    out.write_to(&cfg.output_dir).data()?;
    print!("{}", out.stdout);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code() as u8)
        }
    }
}

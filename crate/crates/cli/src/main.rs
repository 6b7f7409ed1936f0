//! `leadlag`: lead/lag analytics on tick data from the command line.

mod commands;
mod data;
mod error;
mod output;

use clap::{Parser, Subcommand};
use error::CliError;
use output::{Format, Run};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "leadlag", version, about = "High-frequency lead/lag analytics")]
struct Cli {
    /// Seed for every random stream of the run.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Format of the main result table.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output directory.
    #[arg(long, global = true, default_value = "leadlag-out")]
    out: PathBuf,
    /// Validate inputs and parameters, compute nothing.
    #[arg(long, global = true)]
    dry_run: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Clean raw trades and quotes into per-day tick series.
    Ingest(commands::market::IngestArgs),
    /// Liquidity summary statistics per instrument.
    Stats(commands::market::StatsArgs),
    /// Lagged cross-correlation curve, LLR and maximum lag of a pair.
    Xcorr(commands::pair::XcorrArgs),
    /// Lead/lag summary per intraday time slice.
    Intraday(commands::pair::IntradayArgs),
    /// Thresholded cross-correlation curves.
    Threshold(commands::pair::ThresholdArgs),
    /// Response of the lagger's book to leader midquote moves.
    Response(commands::pair::ResponseArgs),
    /// One-tick-ahead forecasting backtest.
    Backtest(commands::backtest::BacktestArgs),
    /// Simulation study of the estimators on Poisson-sampled Brownian motions.
    Simulate(commands::sim::SimulateArgs),
    /// Closed-form expected covariance against Monte Carlo.
    Oracle(commands::sim::OracleArgs),
    /// Surrogate tick files with the real epochs and no lead/lag.
    Surrogate(commands::sim::SurrogateArgs),
    /// Minimum spanning tree of pairwise lead/lag relations.
    Network(commands::network::NetworkArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Ingest(_) => "ingest",
            Command::Stats(_) => "stats",
            Command::Xcorr(_) => "xcorr",
            Command::Intraday(_) => "intraday",
            Command::Threshold(_) => "threshold",
            Command::Response(_) => "response",
            Command::Backtest(_) => "backtest",
            Command::Simulate(_) => "simulate",
            Command::Oracle(_) => "oracle",
            Command::Surrogate(_) => "surrogate",
            Command::Network(_) => "network",
        }
    }

    fn parameters(&self) -> Result<serde_json::Value, CliError> {
        Ok(match self {
            Command::Ingest(a) => serde_json::to_value(a)?,
            Command::Stats(a) => serde_json::to_value(a)?,
            Command::Xcorr(a) => serde_json::to_value(a)?,
            Command::Intraday(a) => serde_json::to_value(a)?,
            Command::Threshold(a) => serde_json::to_value(a)?,
            Command::Response(a) => serde_json::to_value(a)?,
            Command::Backtest(a) => serde_json::to_value(a)?,
            Command::Simulate(a) => serde_json::to_value(a)?,
            Command::Oracle(a) => serde_json::to_value(a)?,
            Command::Surrogate(a) => serde_json::to_value(a)?,
            Command::Network(a) => serde_json::to_value(a)?,
        })
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(CliError::usage("--jobs must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::usage(e.to_string()))?;
    }
    let mut run = Run::new(
        cli.command.name(),
        cli.out.clone(),
        cli.format,
        cli.seed,
        cli.dry_run,
        cli.command.parameters()?,
    );
    let done = match &cli.command {
        Command::Ingest(a) => commands::market::ingest(a, &mut run)?,
        Command::Stats(a) => commands::market::stats(a, &mut run)?,
        Command::Xcorr(a) => commands::pair::xcorr(a, &mut run)?,
        Command::Intraday(a) => commands::pair::intraday(a, &mut run)?,
        Command::Threshold(a) => commands::pair::threshold(a, &mut run)?,
        Command::Response(a) => commands::pair::response(a, &mut run)?,
        Command::Backtest(a) => commands::backtest::backtest(a, &mut run)?,
        Command::Simulate(a) => commands::sim::simulate(a, &mut run)?,
        Command::Oracle(a) => commands::sim::oracle(a, &mut run)?,
        Command::Surrogate(a) => commands::sim::surrogate(a, &mut run)?,
        Command::Network(a) => commands::network::network(a, &mut run)?,
    };
    match done {
        commands::Outcome::DryRun => run.report_dry_run(),
        commands::Outcome::Written => run.finish(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("leadlag: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

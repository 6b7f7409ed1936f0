use super::{DataArgs, GridArgs, Outcome};
use crate::error::CliError;
use crate::output::{fmt_num, fmt_opt, Format, Run, Table};
use clap::{Args, ValueEnum};
use leadlag::forecast::{
    backtest as run_backtest, coarse_tick_sweep, compare_reports, BacktestConfig, BacktestReport, Execution,
    ForecastDay, ForecasterParams, ForecasterRegistry, SignificanceRule,
};
use serde::Serialize;
use serde_json::json;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExecutionArg {
    Midquote,
    CrossSpread,
}

impl From<ExecutionArg> for Execution {
    fn from(e: ExecutionArg) -> Self {
        match e {
            ExecutionArg::Midquote => Execution::Midquote,
            ExecutionArg::CrossSpread => Execution::CrossSpread,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BacktestArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub leader: String,
    #[arg(long)]
    pub lagger: String,
    /// Forecaster under test.
    #[arg(long, default_value = "leadlag")]
    pub forecaster: String,
    /// Benchmarks compared against the forecaster.
    #[arg(long, value_delimiter = ',', default_values_t = ["random".to_string(), "autocorrelation".to_string()])]
    pub benchmarks: Vec<String>,
    #[arg(long, value_enum, default_value_t = ExecutionArg::Midquote)]
    pub execution: ExecutionArg,
    /// Calibration window in days.
    #[arg(long, default_value_t = 20)]
    pub window: usize,
    /// Significance multiplier of the lag-selection rule.
    #[arg(long, default_value_t = 1.96)]
    pub z: f64,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Also backtest in coarse tick time at these thresholds (half-ticks).
    #[arg(long, value_delimiter = ',')]
    pub coarse_halfticks: Vec<u32>,
}

fn summary_row(r: &BacktestReport) -> Vec<String> {
    vec![
        r.forecaster.clone(),
        r.execution.name().to_string(),
        fmt_opt(r.accuracy),
        r.n_trades.to_string(),
        r.n_abstained.to_string(),
        r.n_skipped.to_string(),
        fmt_opt(r.mean_return_bp),
        fmt_opt(r.median_return_bp),
        fmt_opt(r.sharpe_annualized),
    ]
}

const SUMMARY_HEADER: [&str; 9] = [
    "forecaster",
    "execution",
    "accuracy",
    "n_trades",
    "n_abstained",
    "n_skipped",
    "mean_return_bp",
    "median_return_bp",
    "sharpe_annualized",
];

pub fn backtest(args: &BacktestArgs, run: &mut Run) -> Result<Outcome, CliError> {
    let ds = args.data.open()?;
    let (lead_tick, lag_tick) = (ds.meta(&args.leader)?.tick_size, ds.meta(&args.lagger)?.tick_size);
    if args.leader == args.lagger {
        return Err(CliError::usage("leader and lagger must differ"));
    }
    if !(args.z > 0.0) {
        return Err(CliError::usage("--z must be positive"));
    }
    let params = ForecasterParams {
        grid: args.grid.grid(300.0)?,
        rule: SignificanceRule { z: args.z },
        seed: run.seed,
    };
    let registry = ForecasterRegistry::default();
    let main = registry.build(&args.forecaster, &params)?;
    let benches = args
        .benchmarks
        .iter()
        .map(|b| registry.build(b, &params))
        .collect::<Result<Vec<_>, _>>()?;
    let rics = [args.leader.clone(), args.lagger.clone()];
    ds.window(&rics)?;
    ds.register_inputs(run, &rics);
    if run.dry_run {
        return Ok(Outcome::DryRun);
    }
    let days: Vec<ForecastDay> = ds
        .pair_days(&args.leader, &args.lagger)?
        .into_iter()
        .map(|(_, lead, lag)| ForecastDay::new(lead.ticks, lag.ticks).with_quotes(lag.stream.quotes))
        .collect();
    let cfg = BacktestConfig {
        window_days: args.window,
        execution: args.execution.into(),
    };
    let mut report = run_backtest(&days, main.as_ref(), &cfg)?;
    let mut bench_reports = Vec::new();
    for b in &benches {
        bench_reports.push(run_backtest(&days, b.as_ref(), &cfg)?);
    }
    let mut comparisons = Vec::new();
    for b in &bench_reports {
        match compare_reports(&report, b) {
            Ok(c) => comparisons.push(json!({ "benchmark": b.forecaster, "comparison": c })),
            Err(e) => comparisons.push(json!({ "benchmark": b.forecaster, "error": e.to_string() })),
        }
    }
    if let Some(b) = bench_reports.iter().find(|b| b.forecaster == "random") {
        report.ks_distance_vs_random = compare_reports(&report, b).ok().map(|c| c.ks_distance);
    }
    if let Some(b) = bench_reports.first() {
        report.t_stat_vs_benchmark = compare_reports(&report, b).ok().map(|c| c.t_stat);
    }

    let mut trades = Table::new(&["epoch_ts", "forecast", "realized_sign", "return", "execution", "day"]);
    for t in &report.trades {
        trades.push(vec![
            fmt_num(t.epoch_ts),
            t.forecast.to_string(),
            t.realized_sign.to_string(),
            fmt_num(t.ret),
            report.execution.name().to_string(),
            t.day.to_string(),
        ]);
    }
    run.write_table("trades.csv", &trades)?;

    let coarse: Vec<f64> = args.coarse_halfticks.iter().map(|&i| i as f64 / 2.0).collect();
    let sweep = (!coarse.is_empty())
        .then(|| coarse_tick_sweep(&days, &coarse, lead_tick, lag_tick, main.as_ref(), &cfg));

    match run.format {
        Format::Json => {
            let mut v = json!({
                "leader": args.leader,
                "lagger": args.lagger,
                "window_days": args.window,
                "n_days": days.len(),
                "report": report,
                "benchmarks": bench_reports,
                "comparisons": comparisons,
            });
            if let Some(s) = &sweep {
                let points: Vec<_> = s
                    .iter()
                    .map(|p| match &p.report {
                        Ok(r) => json!({ "theta_ticks": p.theta, "report": r }),
                        Err(e) => json!({ "theta_ticks": p.theta, "error": e.to_string() }),
                    })
                    .collect();
                v["coarse"] = json!(points);
            }
            run.write_json("backtest.json", &v)?;
        }
        Format::Csv => {
            let mut t = Table::new(&SUMMARY_HEADER);
            t.push(summary_row(&report));
            for b in &bench_reports {
                t.push(summary_row(b));
            }
            run.write_table("backtest.csv", &t)?;
            if let Some(s) = &sweep {
                let mut c = Table::new(&["theta_ticks", "accuracy", "n_trades", "mean_return_bp", "median_return_bp"]);
                for p in s {
                    let r = p.report.as_ref().ok();
                    c.push(vec![
                        fmt_num(p.theta),
                        fmt_opt(r.and_then(|r| r.accuracy)),
                        r.map_or(String::new(), |r| r.n_trades.to_string()),
                        fmt_opt(r.and_then(|r| r.mean_return_bp)),
                        fmt_opt(r.and_then(|r| r.median_return_bp)),
                    ]);
                }
                run.write_table("coarse.csv", &c)?;
            }
        }
    }
    Ok(Outcome::Written)
}

use super::{positive, DataArgs, EstimatorArgs, GridArgs, Outcome};
use crate::data::{parse_pair, tick_files, Dataset};
use crate::error::CliError;
use crate::output::{fmt_num, fmt_opt, Format, Run, Table};
use clap::Args;
use leadlag::hycorr::{
    cross_correlation_curve, extract_summary, intraday_profile, thresholded_curve, CrossCorrelationCurve,
    IntradayConfig, LeadLagSummary, PairDay, SummaryOptions,
};
use leadlag::response::{response_curves, ResponseConfig, ResponseDay};
use serde::Serialize;
use serde_json::{json, Value};
use std::path::PathBuf;

/// Where the two legs come from: a dataset and a pair of instruments, or
/// tick files given directly.
#[derive(Debug, Clone, Args, Serialize)]
pub struct PairSource {
    /// Dataset root (with --pair).
    #[arg(long, requires = "pair", conflicts_with_all = ["x", "y"])]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub instruments: Option<PathBuf>,
    /// Instruments as `X,Y`; positive lags mean X leads.
    #[arg(long)]
    pub pair: Option<String>,
    /// Tick file of the first leg, once per day.
    #[arg(long)]
    pub x: Vec<PathBuf>,
    /// Tick file of the second leg, once per day.
    #[arg(long)]
    pub y: Vec<PathBuf>,
}

pub struct LoadedPair {
    pub names: (String, String),
    pub days: Vec<PairDay>,
    /// Day names, or the position of the file pair.
    pub labels: Vec<String>,
    /// Shared trimmed session in seconds, when known.
    pub session: Option<(f64, f64)>,
}

impl PairSource {
    /// Registers the inputs and, unless `run` is a dry run, loads every day.
    pub fn load(&self, run: &Run) -> Result<Option<LoadedPair>, CliError> {
        match (&self.data, &self.pair) {
            (Some(root), Some(pair)) => {
                let (a, b) = parse_pair(pair)?;
                let ds = Dataset::open(root, self.instruments.as_deref())?;
                let rics = [a.clone(), b.clone()];
                let window = ds.window(&rics)?;
                ds.register_inputs(run, &rics);
                if run.dry_run {
                    return Ok(None);
                }
                let (labels, days) = ds
                    .pair_days(&a, &b)?
                    .into_iter()
                    .map(|(d, x, y)| (d, PairDay::new(x.ticks, y.ticks)))
                    .unzip();
                Ok(Some(LoadedPair {
                    names: (a, b),
                    days,
                    labels,
                    session: Some((window.0 as f64 / 1000.0, window.1 as f64 / 1000.0)),
                }))
            }
            (None, _) => {
                if self.x.is_empty() {
                    return Err(CliError::usage("give either --data with --pair, or --x and --y tick files"));
                }
                if self.x.len() != self.y.len() {
                    return Err(CliError::usage("give as many --x as --y tick files"));
                }
                let names = match &self.pair {
                    Some(p) => parse_pair(p)?,
                    None => ("x".to_string(), "y".to_string()),
                };
                for p in self.x.iter().chain(&self.y) {
                    run.input(p);
                }
                if run.dry_run {
                    for p in self.x.iter().chain(&self.y) {
                        if !p.is_file() {
                            return Err(CliError::usage(format!("{}: no such file", p.display())));
                        }
                    }
                    return Ok(None);
                }
                let days: Vec<PairDay> = tick_files(run, &self.x, &self.y)?
                    .into_iter()
                    .map(|(x, y)| PairDay::new(x, y))
                    .collect();
                Ok(Some(LoadedPair {
                    names,
                    labels: (0..days.len()).map(|k| format!("{k:03}")).collect(),
                    days,
                    session: None,
                }))
            }
            (Some(_), None) => Err(CliError::usage("--data needs --pair")),
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct XcorrArgs {
    #[command(flatten)]
    pub source: PairSource,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    /// Step of the interpolation grid used to locate the maximum, seconds.
    #[arg(long, default_value_t = 0.1)]
    pub interp_mesh: f64,
    /// Locate the maximum of |ρ| rather than ρ.
    #[arg(long)]
    pub use_abs: bool,
    /// Include every single-day curve in the JSON output.
    #[arg(long)]
    pub per_day: bool,
}

fn summary_json(names: (&str, &str), s: Result<LeadLagSummary, String>) -> Value {
    match s {
        Ok(s) => json!({
            "pair": [names.0, names.1],
            "llr": s.llr,
            "llr_null_lags": s.llr_null_lags,
            "max_corr": s.max_corr,
            "max_lag_s": s.max_lag_s,
            "max_lag_sd": s.max_lag_sd,
        }),
        Err(e) => json!({
            "pair": [names.0, names.1],
            "llr": null,
            "max_corr": null,
            "max_lag_s": null,
            "error": e,
        }),
    }
}

fn curve_table(curve: &CrossCorrelationCurve) -> Table {
    let (clipped, _) = curve.clipped();
    let mut t = Table::new(&["lag_s", "rho", "ci95", "n_days"]);
    for (k, &lag) in curve.grid.lags().iter().enumerate() {
        t.push(vec![fmt_num(lag), fmt_opt(clipped[k]), fmt_opt(curve.ci95[k]), curve.n_obs[k].to_string()]);
    }
    t
}

pub fn xcorr(args: &XcorrArgs, run: &mut Run) -> Result<Outcome, CliError> {
    let grid = args.grid.grid(300.0)?;
    let estimator = args.estimator.build()?;
    let opts = SummaryOptions {
        mesh: positive("interp-mesh", args.interp_mesh)?,
        use_abs: args.use_abs,
    };
    let Some(pair) = args.source.load(run)? else {
        return Ok(Outcome::DryRun);
    };
    let (a, b) = (pair.names.0.as_str(), pair.names.1.as_str());
    let curve = cross_correlation_curve(&pair.days, &grid, estimator.as_ref())?;
    match run.format {
        Format::Csv => run.write_table("xcorr.csv", &curve_table(&curve))?,
        Format::Json => {
            let (clipped, n_clipped) = curve.clipped();
            let forward = extract_summary(&curve, &opts).map_err(|e| e.to_string());
            let reverse = extract_summary(&curve.mirrored(), &opts).map_err(|e| e.to_string());
            let mut v = json!({
                "pair": [a, b],
                "estimator": estimator.name(),
                "grid": curve.grid.lags(),
                "rho_mean": clipped,
                "ci95": curve.ci95,
                "n_obs": curve.n_obs,
                "n_days": curve.n_days,
                "skipped_days": curve.skipped_days,
                "clipped_points": n_clipped,
            });
            let f = summary_json((a, b), forward);
            for key in ["llr", "llr_null_lags", "max_corr", "max_lag_s", "max_lag_sd", "error"] {
                if let Some(x) = f.get(key) {
                    v[key] = x.clone();
                }
            }
            v["reverse"] = summary_json((b, a), reverse);
            if args.per_day {
                v["per_day"] = json!(curve.per_day);
            }
            run.write_json("xcorr.json", &v)?;
        }
    }
    Ok(Outcome::Written)
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct IntradayArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub pair: String,
    /// Slice width in minutes.
    #[arg(long, default_value_t = 5.0)]
    pub slice_minutes: f64,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
}

pub fn intraday(args: &IntradayArgs, run: &mut Run) -> Result<Outcome, CliError> {
    let source = PairSource {
        data: Some(args.data.data.clone()),
        instruments: args.data.instruments.clone(),
        pair: Some(args.pair.clone()),
        x: Vec::new(),
        y: Vec::new(),
    };
    let grid = args.grid.grid(60.0)?;
    let estimator = args.estimator.build()?;
    let slice = positive("slice-minutes", args.slice_minutes)? * 60.0;
    let Some(pair) = source.load(run)? else {
        return Ok(Outcome::DryRun);
    };
    let (start, end) = pair.session.expect("dataset pairs carry a session");
    let cfg = IntradayConfig {
        slice_seconds: slice,
        grid,
        ..IntradayConfig::new(start, end)
    };
    let slices = intraday_profile(&pair.days, &cfg, estimator.as_ref())?;
    let mut t = Table::new(&["start_s", "end_s", "n_days", "llr", "max_corr", "max_lag_s"]);
    let mut rows = Vec::new();
    for s in &slices {
        let n_days = s.curve.as_ref().map_or(0, |c| c.n_days);
        let (llr, mc, ml) = s.summary.map_or((None, None, None), |m| (Some(m.llr), Some(m.max_corr), Some(m.max_lag_s)));
        t.push(vec![fmt_num(s.start), fmt_num(s.end), n_days.to_string(), fmt_opt(llr), fmt_opt(mc), fmt_opt(ml)]);
        rows.push(json!({
            "start_s": s.start,
            "end_s": s.end,
            "n_days": n_days,
            "llr": llr,
            "max_corr": mc,
            "max_lag_s": ml,
            "rho_mean": s.curve.as_ref().map(|c| c.clipped().0),
        }));
    }
    match run.format {
        Format::Csv => run.write_table("intraday.csv", &t)?,
        Format::Json => run.write_json(
            "intraday.json",
            &json!({ "pair": [pair.names.0, pair.names.1], "grid": cfg.grid.lags(), "slices": rows }),
        )?,
    }
    Ok(Outcome::Written)
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ThresholdArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub pair: String,
    /// Thresholds in half-ticks of the first instrument.
    #[arg(long, value_delimiter = ',', default_values_t = [0u32, 1, 2, 3, 4, 5, 6])]
    pub halfticks: Vec<u32>,
    #[command(flatten)]
    pub grid: GridArgs,
}

pub fn threshold(args: &ThresholdArgs, run: &mut Run) -> Result<Outcome, CliError> {
    let (a, _) = parse_pair(&args.pair)?;
    let tick = Dataset::open(&args.data.data, args.data.instruments.as_deref())?.meta(&a)?.tick_size;
    let source = PairSource {
        data: Some(args.data.data.clone()),
        instruments: args.data.instruments.clone(),
        pair: Some(args.pair.clone()),
        x: Vec::new(),
        y: Vec::new(),
    };
    let grid = args.grid.grid(60.0)?;
    let Some(pair) = source.load(run)? else {
        return Ok(Outcome::DryRun);
    };
    let mut t = Table::new(&["theta_halfticks", "theta", "lag_s", "rho", "n_days"]);
    let mut out = Vec::new();
    for &i in &args.halfticks {
        let theta = i as f64 * tick / 2.0;
        let c = thresholded_curve(&pair.days, &grid, theta)?;
        let (clipped, n_clipped) = c.curve.clipped();
        for (k, &lag) in grid.lags().iter().enumerate() {
            t.push(vec![
                i.to_string(),
                fmt_num(theta),
                fmt_num(lag),
                fmt_opt(clipped[k]),
                c.curve.n_obs[k].to_string(),
            ]);
        }
        let summary = extract_summary(&c.curve, &SummaryOptions::default()).ok();
        out.push(json!({
            "theta_halfticks": i,
            "theta": theta,
            "rho_mean": clipped,
            "ci95": c.curve.ci95,
            "clipped_points": n_clipped,
            "zero_lag_x": c.zero_lag_x,
            "zero_lag_y": c.zero_lag_y,
            "llr": summary.map(|s| s.llr),
            "max_corr": summary.map(|s| s.max_corr),
            "max_lag_s": summary.map(|s| s.max_lag_s),
        }));
    }
    match run.format {
        Format::Csv => run.write_table("threshold.csv", &t)?,
        Format::Json => run.write_json(
            "threshold.json",
            &json!({ "pair": [pair.names.0, pair.names.1], "grid": grid.lags(), "curves": out }),
        )?,
    }
    Ok(Outcome::Written)
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ResponseArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub leader: String,
    #[arg(long)]
    pub lagger: String,
    /// Signed thresholds in leader half-ticks.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub thetas: Option<Vec<i32>>,
    /// Longest horizon, seconds.
    #[arg(long, default_value_t = 10.0)]
    pub max_lag: f64,
    /// Horizon step, seconds.
    #[arg(long, default_value_t = 0.1)]
    pub step: f64,
}

pub fn response(args: &ResponseArgs, run: &mut Run) -> Result<Outcome, CliError> {
    let ds = args.data.open()?;
    let (lt, gt) = (ds.meta(&args.leader)?.tick_size, ds.meta(&args.lagger)?.tick_size);
    if args.leader == args.lagger {
        return Err(CliError::usage("leader and lagger must differ"));
    }
    let step = positive("step", args.step)?;
    if !(args.max_lag >= 0.0) {
        return Err(CliError::usage("--max-lag must be >= 0"));
    }
    let n = (args.max_lag / step + 1e-9).floor() as usize;
    let mut cfg = ResponseConfig::new(lt, gt);
    cfg.lags = (0..=n).map(|k| ((k as f64 * step) * 1e9).round() / 1e9).collect();
    if let Some(t) = &args.thetas {
        cfg.thetas = t.clone();
    }
    let rics = [args.leader.clone(), args.lagger.clone()];
    ds.window(&rics)?;
    ds.register_inputs(run, &rics);
    if run.dry_run {
        return Ok(Outcome::DryRun);
    }
    let days: Vec<ResponseDay> = ds
        .pair_days(&args.leader, &args.lagger)?
        .into_iter()
        .map(|(_, lead, lag)| ResponseDay {
            leader: lead.ticks,
            lagger: lag.stream.quotes,
        })
        .collect();
    let curves = response_curves(&days, &cfg)?;
    let mut t = Table::new(&["variable", "theta_halfticks", "lag_s", "mean_dev_ticks", "n"]);
    let mut rows = Vec::new();
    for c in &curves {
        for (k, &lag) in c.lags.iter().enumerate() {
            t.push(vec![
                c.variable.name().to_string(),
                c.theta_halfticks.to_string(),
                fmt_num(lag),
                fmt_opt(c.values[k]),
                c.counts[k].to_string(),
            ]);
            rows.push(json!({
                "variable": c.variable.name(),
                "theta_halfticks": c.theta_halfticks,
                "lag_s": lag,
                "mean_dev_ticks": c.values[k],
                "n": c.counts[k],
            }));
        }
        if c.is_empty() {
            run.note(format!("{} at {} half-ticks: no qualifying leader move", c.variable.name(), c.theta_halfticks));
        }
    }
    match run.format {
        Format::Csv => run.write_table("response.csv", &t)?,
        Format::Json => run.write_json("response.json", &rows)?,
    }
    Ok(Outcome::Written)
}

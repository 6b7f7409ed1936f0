use super::pair::PairSource;
use super::{positive, Outcome};
use crate::error::CliError;
use crate::output::{fmt_num, fmt_opt, Format, Run, Table};
use clap::Args;
use leadlag::hycorr::{
    cross_correlation_curve, hy_correlation, llr, previous_tick_curve, CrossCorrelationCurve, HayashiYoshida,
    LagGrid, PairDay,
};
use leadlag::simkit::{
    expectation_brute_force, generate_lagged_pair_rep, generate_poisson_pair_rep, generate_surrogate,
    oracle_expected_cov, replicate, SimConfig,
};
use leadlag::tickdata::write_ticks;
use serde::Serialize;
use serde_json::json;
use std::path::PathBuf;

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    /// Arrival intensity of the first leg, per second.
    #[arg(long, default_value_t = 0.2)]
    pub lambda1: f64,
    /// Arrival intensities of the second leg, one study each.
    #[arg(long, value_delimiter = ',', default_values_t = [0.2, 0.1, 0.04, 0.02])]
    pub lambda2: Vec<f64>,
    #[arg(long, default_value_t = 0.8, allow_hyphen_values = true)]
    pub rho: f64,
    /// Horizon, seconds.
    #[arg(long, default_value_t = 30600.0)]
    pub t_end: f64,
    /// Brownian mesh and previous-tick sampling step, seconds.
    #[arg(long, default_value_t = 5.0)]
    pub mesh: f64,
    #[arg(long, default_value_t = 64)]
    pub reps: usize,
    /// Spacing of the uniform lag grid, seconds.
    #[arg(long, default_value_t = 5.0)]
    pub lag_step: f64,
    /// Number of positive lags on the grid.
    #[arg(long, default_value_t = 60)]
    pub n_lags: usize,
    /// Lead of the first leg over the second, seconds; 0 samples two
    /// correlated motions without lead/lag.
    #[arg(long, default_value_t = 0.0)]
    pub lead: f64,
}

struct Study {
    lambda2: f64,
    hy: CrossCorrelationCurve,
    pt: CrossCorrelationCurve,
}

pub fn simulate(args: &SimulateArgs, run: &mut Run) -> Result<Outcome, CliError> {
    let grid = LagGrid::uniform(positive("lag-step", args.lag_step)?, args.n_lags)?;
    let cfgs: Vec<SimConfig> = args
        .lambda2
        .iter()
        .map(|&l2| {
            let c = SimConfig {
                lambda1: args.lambda1,
                lambda2: l2,
                rho: args.rho,
                t_end: args.t_end,
                mesh: args.mesh,
                seed: run.seed,
                n_reps: args.reps,
            };
            c.validate().map(|_| c)
        })
        .collect::<Result<_, _>>()?;
    if cfgs.is_empty() {
        return Err(CliError::usage("--lambda2 needs at least one value"));
    }
    if !(args.lead >= 0.0) {
        return Err(CliError::usage("--lead must be >= 0"));
    }
    if run.dry_run {
        return Ok(Outcome::DryRun);
    }
    let mut studies = Vec::new();
    for cfg in &cfgs {
        let days: Vec<PairDay> = replicate(cfg.n_reps, |r| {
            let pair = if args.lead > 0.0 {
                generate_lagged_pair_rep(cfg, r, args.lead, 0.0)
            } else {
                generate_poisson_pair_rep(cfg, r)
            };
            pair.map(|(x, y)| PairDay::new(x, y))
        })
        .into_iter()
        .collect::<Result<_, _>>()?;
        studies.push(Study {
            lambda2: cfg.lambda2,
            hy: cross_correlation_curve(&days, &grid, &HayashiYoshida)?,
            pt: previous_tick_curve(&days, &grid, cfg.mesh)?,
        });
    }

    let mut curves = Table::new(&["lambda2", "estimator", "lag_s", "rho_mean", "ci95", "n_reps"]);
    let mut summary = Table::new(&["lambda2", "lambda_ratio", "estimator", "rho0", "llr"]);
    let mut out = Vec::new();
    for s in &studies {
        for (name, c) in [("hayashi-yoshida", &s.hy), ("previous-tick", &s.pt)] {
            for (k, &lag) in grid.lags().iter().enumerate() {
                curves.push(vec![
                    fmt_num(s.lambda2),
                    name.to_string(),
                    fmt_num(lag),
                    fmt_opt(c.rho[k]),
                    fmt_opt(c.ci95[k]),
                    c.n_obs[k].to_string(),
                ]);
            }
            let l = llr(c).ok();
            let rho0 = c.value_at(0.0);
            summary.push(vec![
                fmt_num(s.lambda2),
                fmt_num(args.lambda1 / s.lambda2),
                name.to_string(),
                fmt_opt(rho0),
                fmt_opt(l),
            ]);
            out.push(json!({
                "lambda1": args.lambda1,
                "lambda2": s.lambda2,
                "estimator": name,
                "rho0": rho0,
                "llr": l,
                "rho_mean": c.rho,
                "ci95": c.ci95,
            }));
        }
    }
    match run.format {
        Format::Csv => {
            run.write_table("simulate_curves.csv", &curves)?;
            run.write_table("simulate_summary.csv", &summary)?;
        }
        Format::Json => run.write_json("simulate.json", &json!({ "grid": grid.lags(), "studies": out }))?,
    }
    Ok(Outcome::Written)
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OracleArgs {
    #[arg(long, default_value_t = 0.3)]
    pub lambda1: f64,
    #[arg(long, default_value_t = 0.5)]
    pub lambda2: f64,
    #[arg(long, default_value_t = 0.8, allow_hyphen_values = true)]
    pub rho: f64,
    /// Horizon, seconds.
    #[arg(long, default_value_t = 20.0)]
    pub t_end: f64,
    /// Lags to evaluate, seconds.
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.5, 1.0, 2.0, 5.0, 10.0])]
    pub lag: Vec<f64>,
    /// Monte Carlo replications per lag; 0 skips the simulation.
    #[arg(long, default_value_t = 10_000)]
    pub mc_reps: usize,
    /// Truncation tolerance of the series evaluation.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

pub fn oracle(args: &OracleArgs, run: &mut Run) -> Result<Outcome, CliError> {
    if args.lag.is_empty() {
        return Err(CliError::usage("--lag needs at least one value"));
    }
    // Evaluating the closed form is cheap and runs the parameter and
    // overflow checks, so a dry run does it too.
    let values = args
        .lag
        .iter()
        .map(|&l| oracle_expected_cov(args.lambda1, args.lambda2, args.rho, args.t_end, l, args.tol))
        .collect::<Result<Vec<_>, _>>()?;
    if run.dry_run {
        return Ok(Outcome::DryRun);
    }
    let mut t = Table::new(&[
        "lag_s",
        "branch",
        "expected_cov",
        "series_value",
        "mc_mean",
        "mc_stderr",
        "mc_reps",
        "z",
    ]);
    let mut rows = Vec::new();
    for (k, v) in values.iter().enumerate() {
        let mc = if args.mc_reps > 0 {
            Some(expectation_brute_force(
                args.lambda1,
                args.lambda2,
                args.rho,
                args.t_end,
                v.lag,
                args.mc_reps,
                run.seed.wrapping_add(k as u64),
            )?)
        } else {
            None
        };
        let z = mc.and_then(|m| (m.stderr > 0.0).then(|| (m.mean - v.expected_cov) / m.stderr));
        let branch = serde_json::to_value(v.branch)?.as_str().unwrap_or_default().to_string();
        t.push(vec![
            fmt_num(args.lag[k]),
            branch.clone(),
            fmt_num(v.expected_cov),
            fmt_num(v.series_value),
            fmt_opt(mc.map(|m| m.mean)),
            fmt_opt(mc.map(|m| m.stderr)),
            mc.map_or(String::new(), |m| m.n_reps.to_string()),
            fmt_opt(z),
        ]);
        rows.push(json!({
            "lag_s": args.lag[k],
            "branch": branch,
            "expected_cov": v.expected_cov,
            "series_value": v.series_value,
            "truncation_n": v.truncation_n,
            "tail_bound": v.tail_bound,
            "monte_carlo": mc,
            "z": z,
        }));
    }
    match run.format {
        Format::Csv => run.write_table("oracle.csv", &t)?,
        Format::Json => run.write_json("oracle.json", &rows)?,
    }
    Ok(Outcome::Written)
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SurrogateArgs {
    #[command(flatten)]
    pub source: PairSource,
    /// Correlation of the surrogate motions; by default each day's
    /// lag-0 estimate.
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<f64>,
    /// Brownian mesh, seconds.
    #[arg(long, default_value_t = 1.0)]
    pub mesh: f64,
}

pub fn surrogate(args: &SurrogateArgs, run: &mut Run) -> Result<Outcome, CliError> {
    positive("mesh", args.mesh)?;
    if let Some(r) = args.rho {
        if !(-1.0..=1.0).contains(&r) {
            return Err(CliError::usage("--rho must lie in [-1, 1]"));
        }
    }
    let Some(pair) = args.source.load(run)? else {
        return Ok(Outcome::DryRun);
    };
    let mut t = Table::new(&["day", "rho", "x_file", "y_file"]);
    let mut rows = Vec::new();
    for (k, (day, label)) in pair.days.iter().zip(&pair.labels).enumerate() {
        let rho = match args.rho {
            Some(r) => r,
            None => hy_correlation(&day.x, &day.y, 0.0)
                .map_err(|e| CliError::data(format!("day {label}: {e}")))?
                .clamp(-1.0, 1.0),
        };
        let (sx, sy) = generate_surrogate(&day.x, &day.y, rho, args.mesh, run.seed.wrapping_add(k as u64))?;
        let dir = PathBuf::from(label);
        let files = [
            dir.join(format!("{}.ticks.csv", pair.names.0)),
            dir.join(format!("{}.ticks.csv", pair.names.1)),
        ];
        std::fs::create_dir_all(run.out.join(&dir))?;
        write_ticks(&run.out.join(&files[0]), &sx)?;
        write_ticks(&run.out.join(&files[1]), &sy)?;
        t.push(vec![
            label.clone(),
            fmt_num(rho),
            files[0].display().to_string(),
            files[1].display().to_string(),
        ]);
        rows.push(json!({
            "day": label,
            "rho": rho,
            "x_file": files[0].display().to_string(),
            "y_file": files[1].display().to_string(),
        }));
        for f in files {
            run.record(f);
        }
    }
    match run.format {
        Format::Csv => run.write_table("surrogate.csv", &t)?,
        Format::Json => run.write_json("surrogate.json", &rows)?,
    }
    Ok(Outcome::Written)
}

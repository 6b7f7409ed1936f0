use super::{GridArgs, Outcome};
use crate::data::Dataset;
use crate::error::CliError;
use crate::output::{fmt_num, Run, Table};
use clap::{Args, ValueEnum};
use leadlag::hycorr::{cross_correlation_curve, extract_summary, HayashiYoshida, PairDay, SummaryOptions};
use leadlag::network::{build_mst, CorrelationInput, PairSummary};
use serde::Serialize;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputArg {
    MaxCorr,
    Rho0,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct NetworkArgs {
    /// Dataset root; every pair of the selected instruments is measured.
    #[arg(long, conflicts_with = "pairs")]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub instruments: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub rics: Vec<String>,
    /// Precomputed pair summaries, CSV with `a,b,max_corr,rho0,llr`.
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    /// Correlation feeding the tree distance.
    #[arg(long, value_enum, default_value_t = InputArg::MaxCorr)]
    pub input: InputArg,
    #[command(flatten)]
    pub grid: GridArgs,
}

fn read_pairs(path: &PathBuf) -> Result<Vec<PairSummary>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default().trim();
    if header != "a,b,max_corr,rho0,llr" {
        return Err(CliError::data(format!("{}: expected header `a,b,max_corr,rho0,llr`", path.display())));
    }
    let mut out = Vec::new();
    for (k, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        let num = |s: &str| s.parse::<f64>().ok().filter(|v| v.is_finite());
        match f.as_slice() {
            [a, b, mc, r0, l] => match (num(mc), num(r0), num(l)) {
                (Some(max_corr), Some(rho0), Some(llr)) => out.push(PairSummary {
                    a: a.to_string(),
                    b: b.to_string(),
                    max_corr,
                    rho0,
                    llr,
                }),
                _ => return Err(CliError::data(format!("{}:{}: bad number", path.display(), k + 2))),
            },
            _ => return Err(CliError::data(format!("{}:{}: expected 5 fields", path.display(), k + 2))),
        }
    }
    Ok(out)
}

fn measure(ds: &Dataset, a: &str, b: &str, grid: &GridArgs) -> Result<PairSummary, CliError> {
    let days: Vec<PairDay> = ds
        .pair_days(a, b)?
        .into_iter()
        .map(|(_, x, y)| PairDay::new(x.ticks, y.ticks))
        .collect();
    let curve = cross_correlation_curve(&days, &grid.grid(300.0)?, &HayashiYoshida)?;
    let s = extract_summary(&curve, &SummaryOptions::default())?;
    Ok(PairSummary {
        a: a.to_string(),
        b: b.to_string(),
        max_corr: s.max_corr,
        rho0: curve.value_at(0.0).ok_or_else(|| CliError::data(format!("{a}/{b}: no lag-0 value")))?,
        llr: s.llr,
    })
}

pub fn network(args: &NetworkArgs, run: &mut Run) -> Result<Outcome, CliError> {
    let input = match args.input {
        InputArg::MaxCorr => CorrelationInput::MaxCorr,
        InputArg::Rho0 => CorrelationInput::Rho0,
    };
    let pairs = match (&args.data, &args.pairs) {
        (_, Some(p)) => {
            if !p.is_file() {
                return Err(CliError::usage(format!("{}: no such file", p.display())));
            }
            run.input(p);
            if run.dry_run {
                return Ok(Outcome::DryRun);
            }
            read_pairs(p)?
        }
        (Some(root), None) => {
            let ds = Dataset::open(root, args.instruments.as_deref())?;
            let rics = if args.rics.is_empty() { ds.rics() } else { args.rics.clone() };
            for r in &rics {
                ds.meta(r)?;
            }
            if rics.len() < 2 {
                return Err(CliError::usage("a network needs at least two instruments"));
            }
            args.grid.grid(300.0)?;
            ds.register_inputs(run, &rics);
            if run.dry_run {
                return Ok(Outcome::DryRun);
            }
            let mut pairs = Vec::new();
            for i in 0..rics.len() {
                for j in i + 1..rics.len() {
                    pairs.push(measure(&ds, &rics[i], &rics[j], &args.grid)?);
                }
            }
            let mut t = Table::new(&["a", "b", "max_corr", "rho0", "llr"]);
            for p in &pairs {
                t.push(vec![p.a.clone(), p.b.clone(), fmt_num(p.max_corr), fmt_num(p.rho0), fmt_num(p.llr)]);
            }
            run.write_table("pairs.csv", &t)?;
            pairs
        }
        (None, None) => return Err(CliError::usage("give --data or --pairs")),
    };
    let graph = build_mst(&pairs, input)?;
    run.write("edges.csv", &graph.to_csv())?;
    run.write("network.dot", &graph.to_dot())?;
    run.write_json("network.json", &graph)?;
    Ok(Outcome::Written)
}

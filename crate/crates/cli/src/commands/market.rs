use super::{DataArgs, Outcome};
use crate::data::Dataset;
use crate::error::CliError;
use crate::output::{fmt_opt, Format, Run, Table};
use clap::Args;
use leadlag::liquidity::{compute_liquidity_stats, DayBook, LiquidityStats};
use leadlag::tickdata::{write_quotes, write_ticks, write_trades};
use rayon::prelude::*;
use serde::Serialize;
use std::path::PathBuf;

#[derive(Debug, Clone, Args, Serialize)]
pub struct IngestArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Instruments to process; all with metadata by default.
    #[arg(long, value_delimiter = ',')]
    pub rics: Vec<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct StatsArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_delimiter = ',')]
    pub rics: Vec<String>,
}

fn selected(ds: &Dataset, rics: &[String]) -> Result<Vec<String>, CliError> {
    if rics.is_empty() {
        return Ok(ds.rics());
    }
    for r in rics {
        ds.meta(r)?;
    }
    Ok(rics.to_vec())
}

#[derive(Serialize)]
struct IngestRow {
    day: String,
    ric: String,
    trades: usize,
    quotes: usize,
    ticks: usize,
    trades_without_quote: usize,
    skipped_rows: usize,
}

/// Writes cleaned trades and quotes and the tick-time midquote series of
/// every instrument-day, each inside its own trimmed session.
pub fn ingest(args: &IngestArgs, run: &mut Run) -> Result<Outcome, CliError> {
    let ds = args.data.open()?;
    let rics = selected(&ds, &args.rics)?;
    ds.register_inputs(run, &rics);
    if run.dry_run {
        return Ok(Outcome::DryRun);
    }
    let mut rows = Vec::new();
    for day in &ds.days {
        for ric in &rics {
            let window = ds.window(std::slice::from_ref(ric))?;
            let Some(leg) = ds.leg(day, ric, window)? else {
                continue;
            };
            let dir = PathBuf::from(day);
            std::fs::create_dir_all(run.out.join(&dir))?;
            let files = [
                dir.join(format!("{ric}.trades.csv")),
                dir.join(format!("{ric}.quotes.csv")),
                dir.join(format!("{ric}.ticks.csv")),
            ];
            write_trades(&run.out.join(&files[0]), &leg.trades)?;
            write_quotes(&run.out.join(&files[1]), &leg.quotes)?;
            write_ticks(&run.out.join(&files[2]), &leg.ticks)?;
            for f in files {
                run.record(f);
            }
            rows.push(IngestRow {
                day: day.clone(),
                ric: ric.clone(),
                trades: leg.trades.len(),
                quotes: leg.quotes.len(),
                ticks: leg.ticks.len(),
                trades_without_quote: leg.stream.excluded_trades,
                skipped_rows: leg.warnings,
            });
        }
    }
    match run.format {
        Format::Json => run.write_json("ingest.json", &rows)?,
        Format::Csv => {
            let mut t = Table::new(&["day", "ric", "trades", "quotes", "ticks", "trades_without_quote", "skipped_rows"]);
            for r in &rows {
                t.push(vec![
                    r.day.clone(),
                    r.ric.clone(),
                    r.trades.to_string(),
                    r.quotes.to_string(),
                    r.ticks.to_string(),
                    r.trades_without_quote.to_string(),
                    r.skipped_rows.to_string(),
                ]);
            }
            run.write_table("ingest.csv", &t)?;
        }
    }
    Ok(Outcome::Written)
}

pub fn stats(args: &StatsArgs, run: &mut Run) -> Result<Outcome, CliError> {
    let ds = args.data.open()?;
    let rics = selected(&ds, &args.rics)?;
    ds.register_inputs(run, &rics);
    if run.dry_run {
        return Ok(Outcome::DryRun);
    }
    let rows: Vec<LiquidityStats> = rics
        .par_iter()
        .map(|ric| {
            let window = ds.window(std::slice::from_ref(ric))?;
            let mut books = Vec::new();
            for day in &ds.days {
                if let Some(leg) = ds.leg(day, ric, window)? {
                    books.push(DayBook {
                        trades: leg.trades,
                        quotes: leg.quotes,
                    });
                }
            }
            Ok(compute_liquidity_stats(&books, ds.meta(ric)?))
        })
        .collect::<Result<_, CliError>>()?;
    match run.format {
        Format::Json => run.write_json("stats.json", &rows)?,
        Format::Csv => run.write_table("stats.csv", &stats_table(&rows))?,
    }
    Ok(Outcome::Written)
}

/// Columns in the order of the usual liquidity summary table.
fn stats_table(rows: &[LiquidityStats]) -> Table {
    let mut t = Table::new(&[
        "ric",
        "mean_intertrade_s",
        "tick_over_mid_bp",
        "spread_in_ticks",
        "unit_spread_freq",
        "trade_through_freq",
        "vol_in_ticks",
        "turnover_per_trade",
        "currency",
        "n_days",
    ]);
    for r in rows {
        t.push(vec![
            r.ric.clone(),
            fmt_opt(r.mean_intertrade_s),
            fmt_opt(r.tick_over_mid_bp),
            fmt_opt(r.spread_in_ticks),
            fmt_opt(r.unit_spread_freq),
            fmt_opt(r.trade_through_freq),
            fmt_opt(r.vol_in_ticks),
            fmt_opt(r.turnover_per_trade),
            r.currency.clone(),
            r.n_days.to_string(),
        ]);
    }
    t
}

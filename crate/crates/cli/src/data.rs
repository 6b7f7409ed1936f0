//! On-disk dataset layout.
//!
//! ```text
//! DATA/instruments.json
//! DATA/<day>/<RIC>.trades.csv
//! DATA/<day>/<RIC>.quotes.csv
//! ```
//!
//! Days are the sub-directories of `DATA`, in lexicographic order.

use crate::error::CliError;
use crate::output::Run;
use leadlag::tickdata::{
    aggregate_same_timestamp, build_midquote_series, intersect_windows, load_instruments, parse_quotes,
    parse_ticks, parse_trades, session_filter, session_window, to_tick_time, InstrumentMeta, Millis,
    MidquoteStream, ParseOptions, QuoteEvent, TickSeries, TickThreshold, TradeEvent,
};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub struct Dataset {
    pub root: PathBuf,
    pub metas: BTreeMap<String, InstrumentMeta>,
    pub days: Vec<String>,
    instruments_path: PathBuf,
}

/// One instrument on one day after cleaning.
#[derive(Debug, Clone)]
pub struct Leg {
    pub trades: Vec<TradeEvent>,
    pub quotes: Vec<QuoteEvent>,
    pub stream: MidquoteStream,
    pub ticks: TickSeries,
    pub warnings: usize,
}

impl Dataset {
    pub fn open(root: &Path, instruments: Option<&Path>) -> Result<Self, CliError> {
        if !root.is_dir() {
            return Err(CliError::usage(format!("{} is not a directory", root.display())));
        }
        let instruments_path = instruments
            .map(Path::to_path_buf)
            .unwrap_or_else(|| root.join("instruments.json"));
        let metas = load_instruments(&instruments_path)?
            .into_iter()
            .map(|m| (m.ric.clone(), m))
            .collect();
        let mut days: Vec<String> = std::fs::read_dir(root)?
            .filter_map(Result::ok)
            .filter(|e| e.path().is_dir())
            .filter_map(|e| e.file_name().into_string().ok())
            .collect();
        days.sort();
        if days.is_empty() {
            return Err(CliError::data(format!("{}: no day directories", root.display())));
        }
        Ok(Self {
            root: root.to_path_buf(),
            metas,
            days,
            instruments_path,
        })
    }

    pub fn meta(&self, ric: &str) -> Result<&InstrumentMeta, CliError> {
        self.metas
            .get(ric)
            .ok_or_else(|| CliError::usage(format!("no metadata for instrument `{ric}`")))
    }

    pub fn rics(&self) -> Vec<String> {
        self.metas.keys().cloned().collect()
    }

    fn trades_path(&self, day: &str, ric: &str) -> PathBuf {
        self.root.join(day).join(format!("{ric}.trades.csv"))
    }

    fn quotes_path(&self, day: &str, ric: &str) -> PathBuf {
        self.root.join(day).join(format!("{ric}.quotes.csv"))
    }

    /// Registers every existing file of `rics` as an input of `run`.
    pub fn register_inputs(&self, run: &Run, rics: &[String]) {
        run.input(&self.instruments_path);
        for day in &self.days {
            for ric in rics {
                for p in [self.trades_path(day, ric), self.quotes_path(day, ric)] {
                    if p.is_file() {
                        run.input(&p);
                    }
                }
            }
        }
    }

    /// Trimmed session shared by all `rics`.
    pub fn window(&self, rics: &[String]) -> Result<(Millis, Millis), CliError> {
        let ws: Vec<_> = rics
            .iter()
            .map(|r| self.meta(r).map(session_window))
            .collect::<Result<_, _>>()?;
        intersect_windows(&ws).ok_or_else(|| CliError::data(format!("sessions of {} do not overlap", rics.join(", "))))
    }

    /// Cleans one instrument-day; `None` when either file is missing.
    pub fn leg(&self, day: &str, ric: &str, window: (Millis, Millis)) -> Result<Option<Leg>, CliError> {
        let meta = self.meta(ric)?;
        let (tp, qp) = (self.trades_path(day, ric), self.quotes_path(day, ric));
        if !tp.is_file() || !qp.is_file() {
            return Ok(None);
        }
        let trades = parse_trades(&tp, meta, ParseOptions::default())?;
        let quotes = parse_quotes(&qp, meta, ParseOptions::default())?;
        let warnings = trades.warnings.len() + quotes.warnings.len();
        let trades = session_filter(&aggregate_same_timestamp(&trades.events), window);
        let quotes = session_filter(&quotes.events, window);
        let stream = build_midquote_series(&quotes, &trades);
        let ticks = to_tick_time(&stream.samples, TickThreshold::AnyChange, meta.tick_size);
        Ok(Some(Leg {
            trades,
            quotes,
            stream,
            ticks,
            warnings,
        }))
    }

    /// Both legs of a pair on every day where both exist, in day order.
    pub fn pair_days(&self, x: &str, y: &str) -> Result<Vec<(String, Leg, Leg)>, CliError> {
        let window = self.window(&[x.to_string(), y.to_string()])?;
        let loaded: Vec<Result<Option<(String, Leg, Leg)>, CliError>> = self
            .days
            .par_iter()
            .map(|d| {
                let lx = self.leg(d, x, window)?;
                let ly = self.leg(d, y, window)?;
                Ok(lx.zip(ly).map(|(a, b)| (d.clone(), a, b)))
            })
            .collect();
        let mut out = Vec::new();
        for r in loaded {
            out.extend(r?);
        }
        if out.is_empty() {
            return Err(CliError::data(format!("no day with data for both {x} and {y}")));
        }
        Ok(out)
    }
}

/// Tick files given directly, one per day and leg.
pub fn tick_files(run: &Run, xs: &[PathBuf], ys: &[PathBuf]) -> Result<Vec<(TickSeries, TickSeries)>, CliError> {
    if xs.len() != ys.len() || xs.is_empty() {
        return Err(CliError::usage("give as many --x as --y tick files, at least one each"));
    }
    for p in xs.iter().chain(ys) {
        if !p.is_file() {
            return Err(CliError::usage(format!("{}: no such file", p.display())));
        }
        run.input(p);
    }
    xs.iter()
        .zip(ys)
        .map(|(a, b)| Ok((parse_ticks(a)?, parse_ticks(b)?)))
        .collect()
}

/// `A,B` into its two names.
pub fn parse_pair(s: &str) -> Result<(String, String), CliError> {
    match s.split_once(',') {
        Some((a, b)) if !a.is_empty() && !b.is_empty() && a != b => Ok((a.to_string(), b.to_string())),
        _ => Err(CliError::usage(format!("pair `{s}` must read A,B with A != B"))),
    }
}

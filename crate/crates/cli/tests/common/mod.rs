//! Synthetic on-disk dataset and helpers for driving the binary.

#![allow(dead_code)]

use leadlag::simkit::{generate_lagged_pair_rep, SimConfig};
use leadlag::tickdata::{write_quotes, write_trades, QuoteEvent, TickSeries, TradeEvent};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const OPEN_MS: i64 = 9 * 3_600_000;
pub const CLOSE_MS: i64 = OPEN_MS + 5_400_000;
const TICK: f64 = 0.01;

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn leadlag(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_leadlag"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

/// Best quotes two ticks wide around the simulated value, then one trade at
/// the ask a millisecond later, at every epoch of `s`. Simulated time 0 is
/// the start of the trimmed session.
fn book(s: &TickSeries) -> (Vec<QuoteEvent>, Vec<TradeEvent>) {
    let start = OPEN_MS + 1_800_000;
    let mut quotes = Vec::new();
    let mut trades = Vec::new();
    let mut last_ts = i64::MIN;
    for (&t, &v) in s.times().iter().zip(s.values()) {
        let ts = (start + (t * 1000.0).round() as i64).max(last_ts + 2);
        if ts + 1 > CLOSE_MS - 1_800_000 {
            break;
        }
        last_ts = ts;
        let mid = ((100.0 + 0.05 * v) / TICK).round() * TICK;
        let (bid, ask) = (((mid - TICK) * 100.0).round() / 100.0, ((mid + TICK) * 100.0).round() / 100.0);
        quotes.push(QuoteEvent { ts, bid, bid_qty: 500, ask, ask_qty: 500 });
        trades.push(TradeEvent::new(ts + 1, ask, 100));
    }
    (quotes, trades)
}

/// `AAA` leads `BBB` by 0.6 s; `CCC` is driven by an unrelated factor.
pub fn dataset(root: &Path, n_days: usize) {
    std::fs::create_dir_all(root).unwrap();
    let metas: Vec<_> = ["AAA", "BBB", "CCC"]
        .iter()
        .map(|r| {
            serde_json::json!({
                "ric": r, "tick_size": TICK, "session_open_ms": OPEN_MS,
                "session_close_ms": CLOSE_MS, "currency": "EUR"
            })
        })
        .collect();
    std::fs::write(root.join("instruments.json"), serde_json::to_string(&metas).unwrap()).unwrap();
    let cfg = SimConfig { lambda1: 2.0, lambda2: 1.0, rho: 0.8, t_end: 1799.0, mesh: 0.05, seed: 11, n_reps: n_days };
    for d in 0..n_days {
        let day = root.join(format!("2024-01-{:02}", d + 2));
        std::fs::create_dir_all(&day).unwrap();
        let (a, b) = generate_lagged_pair_rep(&cfg, d as u64, 0.6, 0.0).unwrap();
        let (_, c) = generate_lagged_pair_rep(&cfg, 1000 + d as u64, 0.0, 0.0).unwrap();
        for (ric, s) in [("AAA", &a), ("BBB", &b), ("CCC", &c)] {
            let (q, t) = book(s);
            write_quotes(&day.join(format!("{ric}.quotes.csv")), &q).unwrap();
            write_trades(&day.join(format!("{ric}.trades.csv")), &t).unwrap();
        }
    }
}

pub fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

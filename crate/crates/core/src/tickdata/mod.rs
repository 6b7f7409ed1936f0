//! Trades/quotes ingestion, preprocessing and tick-time series.

mod io;
mod preprocess;
mod series;

pub use io::{
    load_instruments, parse_quotes, parse_ticks, parse_trades, write_quotes, write_ticks,
    write_trades, ParseOptions, Parsed, RowIssue,
};
pub use preprocess::{
    aggregate_same_timestamp, build_midquote_series, intersect_windows, session_filter,
    session_window, to_tick_time, MidSample, MidquoteStream, Timestamped, SESSION_TRIM_MS,
};
pub use series::{QuotePoint, QuoteTrack, TickSeries, TickThreshold};

use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use thiserror::Error;

/// Milliseconds since the session epoch (midnight, exchange-local).
pub type Millis = i64;

pub fn millis_to_secs(ts: Millis) -> f64 {
    ts as f64 / 1000.0
}

#[derive(Debug, Error)]
pub enum TickDataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: unexpected header, expected `{expected}`")]
    Header { path: PathBuf, expected: &'static str },
    #[error("{path}:{line}: timestamp {ts} is {behind} ms behind the stream (tolerance {tolerance} ms)")]
    NonMonotone {
        path: PathBuf,
        line: u64,
        ts: Millis,
        behind: Millis,
        tolerance: Millis,
    },
    #[error("{path}:{line}: negative {field}")]
    Negative {
        path: PathBuf,
        line: u64,
        field: &'static str,
    },
    #[error("invalid instrument metadata: {0}")]
    Meta(String),
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("invalid tick series: {0}")]
    Series(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TradeFlags {
    pub regular: bool,
    pub trade_through: bool,
}

impl Default for TradeFlags {
    fn default() -> Self {
        Self {
            regular: true,
            trade_through: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeEvent {
    pub ts: Millis,
    pub price: f64,
    pub qty: u64,
    pub flags: TradeFlags,
}

impl TradeEvent {
    pub fn new(ts: Millis, price: f64, qty: u64) -> Self {
        Self {
            ts,
            price,
            qty,
            flags: TradeFlags::default(),
        }
    }

    pub fn turnover(&self) -> f64 {
        self.price * self.qty as f64
    }
}

/// Best bid/ask update. Crossed or locked books never get past ingestion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuoteEvent {
    pub ts: Millis,
    pub bid: f64,
    pub bid_qty: u64,
    pub ask: f64,
    pub ask_qty: u64,
}

impl QuoteEvent {
    pub fn spread(&self) -> f64 {
        self.ask - self.bid
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.bid + self.ask)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstrumentMeta {
    pub ric: String,
    pub tick_size: f64,
    pub session_open_ms: Millis,
    pub session_close_ms: Millis,
    pub currency: String,
}

impl InstrumentMeta {
    pub fn validate(&self) -> Result<(), TickDataError> {
        if !(self.tick_size > 0.0 && self.tick_size.is_finite()) {
            return Err(TickDataError::Meta(format!(
                "{}: tick_size must be positive, got {}",
                self.ric, self.tick_size
            )));
        }
        if self.session_open_ms >= self.session_close_ms {
            return Err(TickDataError::Meta(format!(
                "{}: session_open_ms must precede session_close_ms",
                self.ric
            )));
        }
        Ok(())
    }
}

impl Timestamped for TradeEvent {
    fn ts(&self) -> Millis {
        self.ts
    }
}

impl Timestamped for QuoteEvent {
    fn ts(&self) -> Millis {
        self.ts
    }
}

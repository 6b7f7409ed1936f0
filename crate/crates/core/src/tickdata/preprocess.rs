use super::series::tick_time_walk;
use super::{
    millis_to_secs, InstrumentMeta, Millis, QuoteEvent, QuotePoint, QuoteTrack, TickSeries,
    TickThreshold, TradeEvent, TradeFlags,
};

/// First and last half hour of every session are discarded.
pub const SESSION_TRIM_MS: Millis = 30 * 60 * 1000;

pub trait Timestamped {
    fn ts(&self) -> Millis;
}

/// Collapses trades sharing a timestamp into one VWAP trade.
///
/// The group is flagged as a trade-through when it contains at least two
/// different consecutive prices. Input must be sorted by timestamp.
pub fn aggregate_same_timestamp(trades: &[TradeEvent]) -> Vec<TradeEvent> {
    let mut out = Vec::with_capacity(trades.len());
    for group in trades.chunk_by(|a, b| a.ts == b.ts) {
        if let [single] = group {
            out.push(single.clone());
            continue;
        }
        let qty: u64 = group.iter().map(|t| t.qty).sum();
        let notional: f64 = group.iter().map(|t| t.price * t.qty as f64).sum();
        let trade_through = group.windows(2).any(|w| w[0].price != w[1].price)
            || group.iter().any(|t| t.flags.trade_through);
        out.push(TradeEvent {
            ts: group[0].ts,
            price: notional / qty as f64,
            qty,
            flags: TradeFlags {
                regular: group.iter().all(|t| t.flags.regular),
                trade_through,
            },
        });
    }
    out
}

/// Inclusive `[open + 30 min, close - 30 min]` window of a session.
pub fn session_window(meta: &InstrumentMeta) -> (Millis, Millis) {
    (
        meta.session_open_ms + SESSION_TRIM_MS,
        meta.session_close_ms - SESSION_TRIM_MS,
    )
}

/// Intersection of several trimmed sessions; `None` when they do not overlap.
pub fn intersect_windows(windows: &[(Millis, Millis)]) -> Option<(Millis, Millis)> {
    let start = windows.iter().map(|w| w.0).max()?;
    let end = windows.iter().map(|w| w.1).min()?;
    (start <= end).then_some((start, end))
}

/// Keeps events inside `window` (both bounds inclusive).
pub fn session_filter<T: Timestamped + Clone>(events: &[T], window: (Millis, Millis)) -> Vec<T> {
    events
        .iter()
        .filter(|e| (window.0..=window.1).contains(&e.ts()))
        .cloned()
        .collect()
}

/// Prevailing quotes attached to one trade.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MidSample {
    pub ts: Millis,
    pub mid: f64,
    pub bid: f64,
    pub ask: f64,
    pub trade_index: usize,
}

impl MidSample {
    pub fn spread(&self) -> f64 {
        self.ask - self.bid
    }
}

#[derive(Debug, Clone)]
pub struct MidquoteStream {
    /// One sample per trade that has a quote strictly before it.
    pub samples: Vec<MidSample>,
    /// Trades dropped because no quote preceded them.
    pub excluded_trades: usize,
    /// Continuous quote stream (seconds), for post-trade quote lookups.
    pub quotes: QuoteTrack,
}

/// Attaches to every trade the last quote strictly before it. Both inputs
/// must be sorted by timestamp.
pub fn build_midquote_series(quotes: &[QuoteEvent], trades: &[TradeEvent]) -> MidquoteStream {
    let mut samples = Vec::with_capacity(trades.len());
    let mut excluded = 0;
    let mut q = 0;
    for (idx, tr) in trades.iter().enumerate() {
        while q < quotes.len() && quotes[q].ts < tr.ts {
            q += 1;
        }
        match q.checked_sub(1).map(|k| &quotes[k]) {
            Some(prev) => samples.push(MidSample {
                ts: tr.ts,
                mid: prev.mid(),
                bid: prev.bid,
                ask: prev.ask,
                trade_index: idx,
            }),
            None => excluded += 1,
        }
    }
    let track = QuoteTrack::new(
        quotes
            .iter()
            .map(|e| QuotePoint {
                t: millis_to_secs(e.ts),
                bid: e.bid,
                ask: e.ask,
            })
            .collect(),
    );
    MidquoteStream {
        samples,
        excluded_trades: excluded,
        quotes: track,
    }
}

/// Tick-time (or coarse tick-time) epochs of a trade-sampled midquote stream.
///
/// With [`TickThreshold::AnyChange`] an epoch opens on every non-zero midquote
/// variation; with `Ticks(theta)` once the midquote has moved at least
/// `theta * tick_size` away from the last epoch.
pub fn to_tick_time(samples: &[MidSample], threshold: TickThreshold, tick_size: f64) -> TickSeries {
    tick_time_walk(
        samples.iter().map(|s| (millis_to_secs(s.ts), s.mid)),
        threshold,
        tick_size,
    )
}

//! Per-instrument liquidity statistics and the cross-sectional analyses of
//! lead/lag against liquidity ratios.

use crate::numeric::{mean, quantile_sorted, sample_sd};
use crate::tickdata::{build_midquote_series, InstrumentMeta, QuoteEvent, TradeEvent};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LiquidityError {
    #[error("no day with at least one event")]
    NoEvents,
    #[error("empty input")]
    Empty,
    #[error("need at least {needed} points, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("non-positive or non-finite value at index {0}")]
    InvalidValue(usize),
}

/// Mean of per-day means. Days without events do not count.
pub fn daily_average<D: AsRef<[f64]>>(days: &[D]) -> Result<f64, LiquidityError> {
    let per_day: Vec<f64> = days.iter().filter_map(|d| mean(d.as_ref())).collect();
    mean(&per_day).ok_or(LiquidityError::NoEvents)
}

/// One trading day of preprocessed trades and quotes, both sorted by time.
#[derive(Debug, Clone, Default)]
pub struct DayBook {
    pub trades: Vec<TradeEvent>,
    pub quotes: Vec<QuoteEvent>,
}

/// Quote-based fields are `None` when no trade could be matched to a
/// prevailing quote on any day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiquidityStats {
    pub ric: String,
    pub mean_intertrade_s: Option<f64>,
    pub tick_over_mid_bp: Option<f64>,
    pub spread_in_ticks: Option<f64>,
    pub unit_spread_freq: Option<f64>,
    pub trade_through_freq: Option<f64>,
    pub vol_in_ticks: Option<f64>,
    pub turnover_per_trade: Option<f64>,
    pub currency: String,
    pub n_days: usize,
}

impl LiquidityStats {
    pub fn indicator(&self, which: Indicator) -> Option<f64> {
        match which {
            Indicator::IntertradeDuration => self.mean_intertrade_s,
            Indicator::TickOverMid => self.tick_over_mid_bp,
            Indicator::TradeThrough => self.trade_through_freq,
            Indicator::Spread => self.spread_in_ticks,
            Indicator::Volatility => self.vol_in_ticks,
            Indicator::Turnover => self.turnover_per_trade,
        }
    }
}

/// Relative tolerance when testing `spread == tick`.
const UNIT_SPREAD_TOL: f64 = 1e-6;

pub fn compute_liquidity_stats(days: &[DayBook], meta: &InstrumentMeta) -> LiquidityStats {
    let tick = meta.tick_size;
    let mut durations = Vec::with_capacity(days.len());
    let mut tick_mid = Vec::with_capacity(days.len());
    let mut spread = Vec::with_capacity(days.len());
    let mut unit = Vec::with_capacity(days.len());
    let mut through = Vec::with_capacity(days.len());
    let mut vol = Vec::with_capacity(days.len());
    let mut turnover = Vec::with_capacity(days.len());

    for day in days {
        durations.push(
            day.trades
                .windows(2)
                .map(|w| (w[1].ts - w[0].ts) as f64 / 1000.0)
                .collect::<Vec<_>>(),
        );
        through.push(
            day.trades
                .iter()
                .map(|t| if t.flags.trade_through { 1.0 } else { 0.0 })
                .collect::<Vec<_>>(),
        );
        turnover.push(day.trades.iter().map(TradeEvent::turnover).collect::<Vec<_>>());

        let stream = build_midquote_series(&day.quotes, &day.trades);
        let s = &stream.samples;
        tick_mid.push(s.iter().map(|q| 1e4 * tick / q.mid).collect::<Vec<_>>());
        spread.push(s.iter().map(|q| q.spread() / tick).collect::<Vec<_>>());
        unit.push(
            s.iter()
                .map(|q| f64::from(u8::from((q.spread() - tick).abs() <= UNIT_SPREAD_TOL * tick)))
                .collect::<Vec<_>>(),
        );
        vol.push(
            s.windows(2)
                .map(|w| (w[1].mid - w[0].mid).abs() / tick)
                .collect::<Vec<_>>(),
        );
    }

    LiquidityStats {
        ric: meta.ric.clone(),
        mean_intertrade_s: daily_average(&durations).ok(),
        tick_over_mid_bp: daily_average(&tick_mid).ok(),
        spread_in_ticks: daily_average(&spread).ok(),
        unit_spread_freq: daily_average(&unit).ok(),
        trade_through_freq: daily_average(&through).ok(),
        vol_in_ticks: daily_average(&vol).ok(),
        turnover_per_trade: daily_average(&turnover).ok(),
        currency: meta.currency.clone(),
        n_days: days.iter().filter(|d| !d.trades.is_empty()).count(),
    }
}

/// The six indicators compared across pairs (unit-spread frequency is left
/// out, it duplicates the average spread).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Indicator {
    IntertradeDuration,
    TickOverMid,
    TradeThrough,
    Spread,
    Volatility,
    Turnover,
}

impl Indicator {
    pub const ALL: [Indicator; 6] = [
        Indicator::IntertradeDuration,
        Indicator::TickOverMid,
        Indicator::TradeThrough,
        Indicator::Spread,
        Indicator::Volatility,
        Indicator::Turnover,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Indicator::IntertradeDuration => "intertrade-duration",
            Indicator::TickOverMid => "tick-over-mid",
            Indicator::TradeThrough => "trade-through",
            Indicator::Spread => "spread",
            Indicator::Volatility => "volatility",
            Indicator::Turnover => "turnover",
        }
    }
}

/// `I_X / I_Y` for the pair (X, Y).
pub fn indicator_ratio(x: &LiquidityStats, y: &LiquidityStats, which: Indicator) -> Option<f64> {
    let (a, b) = (x.indicator(which)?, y.indicator(which)?);
    let r = a / b;
    (r.is_finite() && r > 0.0).then_some(r)
}

/// Fractions of points per quadrant of the (LLR - 1, ratio - 1) plane.
///
/// All fractions are over the full sample; points lying on either line are
/// counted in `boundary` instead.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadrantCounts {
    pub n_pp: f64,
    pub n_mm: f64,
    pub n_pm: f64,
    pub n_mp: f64,
    pub boundary: f64,
    pub n_points: usize,
    pub n_boundary: usize,
}

impl QuadrantCounts {
    pub fn concordant(&self) -> f64 {
        self.n_pp + self.n_mm
    }

    pub fn discordant(&self) -> f64 {
        self.n_pm + self.n_mp
    }
}

/// `pairs` holds `(llr, ratio)`; first sign is the LLR side.
pub fn quadrant_counts(pairs: &[(f64, f64)]) -> Result<QuadrantCounts, LiquidityError> {
    if pairs.is_empty() {
        return Err(LiquidityError::Empty);
    }
    let mut c = [0usize; 4];
    let mut boundary = 0;
    for (k, &(llr, ratio)) in pairs.iter().enumerate() {
        if !(llr > 0.0 && ratio > 0.0 && llr.is_finite() && ratio.is_finite()) {
            return Err(LiquidityError::InvalidValue(k));
        }
        if llr == 1.0 || ratio == 1.0 {
            boundary += 1;
            continue;
        }
        let idx = match (llr > 1.0, ratio > 1.0) {
            (true, true) => 0,
            (false, false) => 1,
            (true, false) => 2,
            (false, true) => 3,
        };
        c[idx] += 1;
    }
    let n = pairs.len() as f64;
    Ok(QuadrantCounts {
        n_pp: c[0] as f64 / n,
        n_mm: c[1] as f64 / n,
        n_pm: c[2] as f64 / n,
        n_mp: c[3] as f64 / n,
        boundary: boundary as f64 / n,
        n_points: pairs.len(),
        n_boundary: boundary,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecileBin {
    /// Empirical quantile edges of the ratio distribution.
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    pub mean: f64,
    pub ci95: f64,
}

/// Ten bins of `(ratio, value)` by rank of the ratio.
///
/// Points are stably sorted by ratio and the k-th of n goes to bin
/// `floor(10 k / n)`, so ties straddling an edge are split by input order
/// and bin sizes differ by at most one. Edges are reported as interpolated
/// empirical quantiles.
pub fn decile_bins(pairs: &[(f64, f64)]) -> Result<Vec<DecileBin>, LiquidityError> {
    const BINS: usize = 10;
    if pairs.len() < BINS {
        return Err(LiquidityError::TooFew {
            needed: BINS,
            got: pairs.len(),
        });
    }
    if let Some(k) = pairs.iter().position(|p| !p.0.is_finite() || !p.1.is_finite()) {
        return Err(LiquidityError::InvalidValue(k));
    }
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by(|&a, &b| pairs[a].0.total_cmp(&pairs[b].0));
    let sorted: Vec<f64> = order.iter().map(|&i| pairs[i].0).collect();
    let n = pairs.len();

    let mut groups: Vec<Vec<f64>> = vec![Vec::new(); BINS];
    for (rank, &i) in order.iter().enumerate() {
        groups[rank * BINS / n].push(pairs[i].1);
    }
    Ok(groups
        .into_iter()
        .enumerate()
        .map(|(b, vals)| {
            let m = mean(&vals).expect("every bin holds at least one point");
            let sd = sample_sd(&vals).unwrap_or(0.0);
            DecileBin {
                lo: quantile_sorted(&sorted, b as f64 / BINS as f64),
                hi: quantile_sorted(&sorted, (b + 1) as f64 / BINS as f64),
                n: vals.len(),
                mean: m,
                ci95: 1.96 * sd / (vals.len() as f64).sqrt(),
            }
        })
        .collect())
}

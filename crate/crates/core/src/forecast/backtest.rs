use super::forecasters::{decision_times, Forecaster};
use super::model::{sign, DayDigest};
use super::{ForecastDay, ForecastError};
use crate::numeric::{exact_sum, mean, sample_sd};
use crate::tickdata::TickThreshold;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const TRADING_DAYS_PER_YEAR: f64 = 252.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Execution {
    /// Enter and exit at the lagger's midquote.
    Midquote,
    /// Buy at the ask, sell at the bid.
    CrossSpread,
}

impl Execution {
    pub fn name(self) -> &'static str {
        match self {
            Execution::Midquote => "midquote",
            Execution::CrossSpread => "cross-spread",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BacktestConfig {
    /// Calibration window; day `d` is traded with a model fitted on the
    /// `window_days` days before it.
    pub window_days: usize,
    pub execution: Execution,
}

impl Default for BacktestConfig {
    fn default() -> Self {
        Self {
            window_days: 20,
            execution: Execution::Midquote,
        }
    }
}

/// One round trip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeRecord {
    pub day: usize,
    /// Decision (and entry) time, seconds.
    pub epoch_ts: f64,
    pub forecast: i8,
    pub realized_sign: i8,
    #[serde(rename = "return")]
    pub ret: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestReport {
    pub forecaster: String,
    pub execution: Execution,
    /// `None` when every epoch abstained.
    pub accuracy: Option<f64>,
    pub n_correct: usize,
    pub n_trades: usize,
    pub n_abstained: usize,
    /// Cross-spread trades dropped for lack of a quote.
    pub n_skipped: usize,
    pub mean_return_bp: Option<f64>,
    pub median_return_bp: Option<f64>,
    pub daily_returns: Vec<f64>,
    pub daily_return_mean: f64,
    pub daily_return_sd: Option<f64>,
    pub sharpe_annualized: Option<f64>,
    pub ks_distance_vs_random: Option<f64>,
    pub t_stat_vs_benchmark: Option<f64>,
    #[serde(skip)]
    pub trades: Vec<TradeRecord>,
}

impl BacktestReport {
    pub fn per_trade_returns(&self) -> Vec<f64> {
        self.trades.iter().map(|t| t.ret).collect()
    }
}

/// Forecasts of every test day `window_days..days.len()`, each from the
/// digests of the preceding window.
pub fn forecast_all(
    days: &[ForecastDay],
    forecaster: &dyn Forecaster,
    window_days: usize,
) -> Result<Vec<Vec<Option<i8>>>, ForecastError> {
    if days.len() <= window_days {
        return Err(ForecastError::ShortHistory {
            needed: window_days + 1,
            got: days.len(),
        });
    }
    let digests: Vec<DayDigest> = days.par_iter().map(|d| forecaster.digest(d)).collect();
    (window_days..days.len())
        .into_par_iter()
        .map(|d| forecaster.forecast_day(&digests[d - window_days..d], &days[d], d))
        .collect()
}

fn trade_return(day: &ForecastDay, j: usize, side: i8, execution: Execution) -> Option<f64> {
    let t = day.lagger.times();
    let m = day.lagger.values();
    let s = f64::from(side);
    match execution {
        Execution::Midquote => Some(s * (m[j + 1] - m[j]) / m[j]),
        Execution::CrossSpread => {
            let quotes = day.quotes.as_ref()?;
            let q0 = quotes.at_or_before(t[j])?;
            let q1 = quotes.at_or_before(t[j + 1])?;
            let m0 = q0.mid();
            Some(if side > 0 {
                (q1.bid - q0.ask) / m0
            } else {
                (q0.bid - q1.ask) / m0
            })
        }
    }
}

/// Trades the test days `window_days..` one lagger tick at a time.
pub fn backtest(
    days: &[ForecastDay],
    forecaster: &dyn Forecaster,
    cfg: &BacktestConfig,
) -> Result<BacktestReport, ForecastError> {
    let forecasts = forecast_all(days, forecaster, cfg.window_days)?;
    let mut trades = Vec::new();
    let mut daily_returns = Vec::with_capacity(forecasts.len());
    let (mut abstained, mut skipped, mut correct) = (0, 0, 0);
    for (k, fc) in forecasts.iter().enumerate() {
        let d = cfg.window_days + k;
        let day = &days[d];
        let realized = day.lagger.increments();
        let mut day_rets = Vec::new();
        for (j, (&now, f)) in decision_times(day).iter().zip(fc).enumerate() {
            let Some(side) = *f else {
                abstained += 1;
                continue;
            };
            let Some(ret) = trade_return(day, j, side, cfg.execution) else {
                skipped += 1;
                continue;
            };
            let realized_sign = sign(realized[j]).unwrap_or(0);
            if realized_sign == side {
                correct += 1;
            }
            day_rets.push(ret);
            trades.push(TradeRecord {
                day: d,
                epoch_ts: now,
                forecast: side,
                realized_sign,
                ret,
            });
        }
        daily_returns.push(exact_sum(day_rets));
    }
    let rets: Vec<f64> = trades.iter().map(|t| t.ret).collect();
    let mut sorted = rets.clone();
    sorted.sort_by(f64::total_cmp);
    let daily_return_mean = mean(&daily_returns).expect("at least one test day");
    let daily_return_sd = (daily_returns.len() >= 2).then(|| sample_sd(&daily_returns).expect("non-empty"));
    let sharpe_annualized = daily_return_sd
        .filter(|sd| *sd > 0.0)
        .map(|sd| daily_return_mean / sd * TRADING_DAYS_PER_YEAR.sqrt());
    Ok(BacktestReport {
        forecaster: forecaster.name().to_string(),
        execution: cfg.execution,
        accuracy: (!trades.is_empty()).then(|| correct as f64 / trades.len() as f64),
        n_correct: correct,
        n_trades: trades.len(),
        n_abstained: abstained,
        n_skipped: skipped,
        mean_return_bp: (!rets.is_empty()).then(|| 1e4 * exact_sum(rets.iter().copied()) / rets.len() as f64),
        median_return_bp: (!sorted.is_empty()).then(|| 1e4 * crate::numeric::quantile_sorted(&sorted, 0.5)),
        daily_returns,
        daily_return_mean,
        daily_return_sd,
        sharpe_annualized,
        ks_distance_vs_random: None,
        t_stat_vs_benchmark: None,
        trades,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoarsePoint {
    /// Threshold in ticks.
    pub theta: f64,
    pub report: Result<BacktestReport, ForecastError>,
}

/// Re-samples both legs in coarse tick time (a move of `theta` ticks opens an
/// epoch) and backtests at each threshold.
pub fn coarse_tick_sweep(
    days: &[ForecastDay],
    thetas: &[f64],
    leader_tick: f64,
    lagger_tick: f64,
    forecaster: &dyn Forecaster,
    cfg: &BacktestConfig,
) -> Vec<CoarsePoint> {
    thetas
        .iter()
        .map(|&theta| {
            let coarse: Vec<ForecastDay> = days
                .iter()
                .map(|d| ForecastDay {
                    leader: d.leader.coarsen(TickThreshold::Ticks(theta), leader_tick),
                    lagger: d.lagger.coarsen(TickThreshold::Ticks(theta), lagger_tick),
                    quotes: d.quotes.clone(),
                })
                .collect();
            let report = if coarse.iter().all(|d| d.lagger.n_increments() == 0) {
                Err(ForecastError::EmptySeries(theta))
            } else {
                backtest(&coarse, forecaster, cfg)
            };
            CoarsePoint { theta, report }
        })
        .collect()
}

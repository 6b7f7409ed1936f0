//! One-tick-ahead forecasts of the lagger's midquote direction and their
//! backtest.

mod backtest;
mod forecasters;
mod model;
mod stats;

pub use backtest::{
    backtest, coarse_tick_sweep, forecast_all, BacktestConfig, BacktestReport, CoarsePoint, Execution,
    TradeRecord, TRADING_DAYS_PER_YEAR,
};
pub use forecasters::{
    benchmark_forecasts, decision_times, AutocorrelationForecaster, BenchmarkKind, Forecaster,
    ForecasterParams, ForecasterRegistry, LeadLagForecaster, PerfectForesight, RandomForecaster,
};
pub use model::{
    audit_no_lookahead, calibrate, forecast_score, model_from_digests, predict_next, CalibrationConfig,
    DayDigest, ForecastModel, SignificanceRule,
};
pub use stats::{compare_reports, kolmogorov_sf, ks_distance, two_proportion_t, ReportComparison};

use crate::tickdata::{QuoteTrack, TickSeries};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Serialize, Deserialize)]
pub enum ForecastError {
    #[error("need at least {needed} days of history, got {got}")]
    ShortHistory { needed: usize, got: usize },
    #[error("no lagger tick in the calibration window")]
    NoLaggerTicks,
    #[error("coarse tick time with theta = {0} leaves no increment")]
    EmptySeries(f64),
    #[error("empty return sample")]
    EmptySample,
    #[error("unknown forecaster `{0}`")]
    UnknownForecaster(String),
}

/// One trading day: both legs in tick time and, for spread-crossing
/// execution, the lagger's quotes.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastDay {
    pub leader: TickSeries,
    pub lagger: TickSeries,
    pub quotes: Option<QuoteTrack>,
}

impl ForecastDay {
    pub fn new(leader: TickSeries, lagger: TickSeries) -> Self {
        Self {
            leader,
            lagger,
            quotes: None,
        }
    }

    pub fn with_quotes(mut self, quotes: QuoteTrack) -> Self {
        self.quotes = Some(quotes);
        self
    }
}

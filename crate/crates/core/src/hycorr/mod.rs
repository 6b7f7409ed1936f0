//! Lagged Hayashi-Yoshida cross-correlation and derived lead/lag measures.

mod curve;
mod estimator;
mod grid;
mod intraday;
mod previous_tick;
mod summary;
mod sweep;
mod thresholded;

pub use curve::{
    cross_correlation_curve, llr, llr_detail, mean_and_halfwidth, CrossCorrelationCurve, LlrBreakdown,
    PairDay,
};
pub use estimator::{CrossEstimator, EstimatorParams, EstimatorRegistry, HayashiYoshida};
pub use grid::LagGrid;
pub use intraday::{intraday_profile, IntradayConfig, SliceProfile};
pub use previous_tick::{previous_tick_curve, PreviousTick};
pub use summary::{
    extract_summary, summary_dispersion, DayDispersion, LeadLagSummary, SummaryDispersion,
    SummaryOptions,
};
pub use sweep::{for_each_overlap, hy_correlation, hy_covariance};
pub use thresholded::{thresholded_curve, thresholded_day, Thresholded, ThresholdedCurve, ThresholdedDay};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HyError {
    #[error("no increments")]
    NoIncrements,
    #[error("zero variance on one leg")]
    ZeroVariance,
    #[error("invalid lag grid: {0}")]
    InvalidGrid(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate negative-lag correlation")]
    DegenerateNegativeLags,
    #[error("curve needs at least one positive and one negative lag")]
    OneSidedGrid,
    #[error("spline needs at least 4 raw points, got {0}")]
    TooFewPoints(usize),
    #[error("curve must cover [-1 s, +1 s]")]
    NarrowCurve,
    #[error("no usable day")]
    NoData,
    #[error("unknown estimator `{0}`")]
    UnknownEstimator(String),
}

impl HyError {
    /// Errors that disqualify a single day rather than the whole analysis.
    pub fn is_day_local(&self) -> bool {
        matches!(self, HyError::NoIncrements | HyError::ZeroVariance)
    }
}

use super::{
    cross_correlation_curve, extract_summary, CrossCorrelationCurve, CrossEstimator, HyError, LagGrid,
    LeadLagSummary, PairDay, SummaryOptions,
};
use serde::Serialize;

#[derive(Debug, Clone)]
pub struct IntradayConfig {
    /// Session bounds in seconds, shared by every day.
    pub session_start: f64,
    pub session_end: f64,
    pub slice_seconds: f64,
    pub grid: LagGrid,
    pub summary: SummaryOptions,
}

impl IntradayConfig {
    /// Five-minute slices with lags up to one minute.
    pub fn new(session_start: f64, session_end: f64) -> Self {
        Self {
            session_start,
            session_end,
            slice_seconds: 300.0,
            grid: LagGrid::default_up_to(60.0).expect("static grid"),
            summary: SummaryOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SliceProfile {
    pub start: f64,
    pub end: f64,
    pub curve: Option<CrossCorrelationCurve>,
    pub summary: Option<LeadLagSummary>,
}

/// Per-slice curves averaged across days; the trailing partial slice is
/// dropped. Slices without usable data are reported with `None`.
pub fn intraday_profile(
    days: &[PairDay],
    cfg: &IntradayConfig,
    estimator: &dyn CrossEstimator,
) -> Result<Vec<SliceProfile>, HyError> {
    if !(cfg.slice_seconds > 0.0) || !(cfg.session_end > cfg.session_start) {
        return Err(HyError::InvalidParameter("empty session or non-positive slice".into()));
    }
    let n = ((cfg.session_end - cfg.session_start) / cfg.slice_seconds + 1e-9).floor() as usize;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let start = cfg.session_start + k as f64 * cfg.slice_seconds;
        let end = start + cfg.slice_seconds;
        let sliced: Vec<PairDay> = days.iter().map(|d| d.window(start, end)).collect();
        let curve = match cross_correlation_curve(&sliced, &cfg.grid, estimator) {
            Ok(c) => Some(c),
            Err(HyError::NoData) => None,
            Err(e) => return Err(e),
        };
        let summary = curve.as_ref().and_then(|c| extract_summary(c, &cfg.summary).ok());
        out.push(SliceProfile {
            start,
            end,
            curve,
            summary,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hycorr::HayashiYoshida;
    use crate::tickdata::TickSeries;

    fn walk(offset: f64) -> TickSeries {
        let t: Vec<f64> = (0..1200).map(|k| k as f64 * 0.5 + offset).collect();
        let v: Vec<f64> = (0..1200).map(|k| ((k * 7919) % 13) as f64 - 6.0).collect();
        TickSeries::new(t, v).unwrap()
    }

    #[test]
    fn single_day_matches_its_slice() {
        let day = PairDay::new(walk(0.0), walk(0.2));
        let cfg = IntradayConfig::new(0.0, 650.0);
        let prof = intraday_profile(std::slice::from_ref(&day), &cfg, &HayashiYoshida).unwrap();
        assert_eq!(prof.len(), 2);
        let w = day.window(300.0, 600.0);
        let direct = HayashiYoshida.day_curve(&w.x, &w.y, &cfg.grid).unwrap();
        assert_eq!(prof[1].curve.as_ref().unwrap().rho, direct);
    }

    #[test]
    fn empty_slice_is_null() {
        let day = PairDay::new(walk(0.0), walk(0.2));
        let cfg = IntradayConfig::new(300.0, 1000.0);
        let prof = intraday_profile(&[day], &cfg, &HayashiYoshida).unwrap();
        assert!(prof[0].curve.is_some());
        assert!(prof[1].curve.is_none() && prof[1].summary.is_none());
    }
}

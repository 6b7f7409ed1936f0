use super::{ForecastDay, ForecastError};
use crate::hycorr::{for_each_overlap, mean_and_halfwidth, LagGrid};
use crate::liquidity::daily_average;
use crate::numeric::ExactSum;
use crate::tickdata::TickSeries;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Rule fixing the last regression lag: lags are kept in increasing order
/// until the first one whose mean correlation satisfies `|ρ̄| < z σ/√D`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignificanceRule {
    pub z: f64,
}

impl Default for SignificanceRule {
    fn default() -> Self {
        Self { z: 1.96 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationConfig {
    pub window_days: usize,
    /// Candidate lags; only the strictly positive ones are used.
    pub grid: LagGrid,
    pub rule: SignificanceRule,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            window_days: 20,
            grid: LagGrid::default_grid(),
            rule: SignificanceRule::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastModel {
    pub betas: Vec<f64>,
    pub lags: Vec<f64>,
    pub mean_tick_duration_s: f64,
    pub calibration_window_days: usize,
}

impl ForecastModel {
    pub fn is_empty(&self) -> bool {
        self.lags.is_empty()
    }
}

/// What a single calibration day contributes: correlations at the positive
/// lags and the lagger's mean tick duration.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DayDigest {
    pub rho: Option<Vec<f64>>,
    pub mean_duration: Option<f64>,
}

/// Lagged correlation of `x` against `y` at each lag. With `exclude_diagonal`
/// the pairs `(i, i)` are dropped, which is how a series is correlated with
/// its own past.
pub(crate) fn positive_curve(
    x: &TickSeries,
    y: &TickSeries,
    lags: &[f64],
    exclude_diagonal: bool,
) -> Option<Vec<f64>> {
    if x.n_increments() < 2 || y.n_increments() < 2 {
        return None;
    }
    let sx = x.sum_sq_increments();
    let sy = y.sum_sq_increments();
    if sx == 0.0 || sy == 0.0 {
        return None;
    }
    let norm = (sx * sy).sqrt();
    let (rx, ry) = (x.increments(), y.increments());
    Some(
        lags.iter()
            .map(|&l| {
                let mut acc = ExactSum::new();
                for_each_overlap(x, y, l, |i, j| {
                    if !(exclude_diagonal && i == j) {
                        acc.add(rx[i] * ry[j]);
                    }
                });
                acc.value() / norm
            })
            .collect(),
    )
}

pub(crate) fn digest_day(
    leader: &TickSeries,
    lagger: &TickSeries,
    lags: &[f64],
    exclude_diagonal: bool,
) -> DayDigest {
    DayDigest {
        rho: positive_curve(leader, lagger, lags, exclude_diagonal),
        mean_duration: lagger.mean_duration(),
    }
}

/// Builds a model from digests of the calibration window.
pub fn model_from_digests(
    digests: &[DayDigest],
    lags: &[f64],
    rule: SignificanceRule,
) -> Result<ForecastModel, ForecastError> {
    let durations: Vec<Vec<f64>> = digests.iter().filter_map(|d| d.mean_duration).map(|v| vec![v]).collect();
    let mean_tick_duration_s = daily_average(&durations).map_err(|_| ForecastError::NoLaggerTicks)?;
    let days: Vec<&Vec<f64>> = digests.iter().filter_map(|d| d.rho.as_ref()).collect();
    let mut betas = Vec::new();
    let mut kept = Vec::new();
    if !days.is_empty() {
        for (k, &lag) in lags.iter().enumerate() {
            let vals: Vec<f64> = days.iter().map(|d| d[k]).collect();
            let (m, hw) = mean_and_halfwidth(&vals);
            if m.abs() < hw * rule.z / 1.96 {
                break;
            }
            betas.push(m);
            kept.push(lag);
        }
    }
    Ok(ForecastModel {
        betas,
        lags: kept,
        mean_tick_duration_s,
        calibration_window_days: digests.len(),
    })
}

/// Calibrates on the last `window_days` days of `history`.
pub fn calibrate(history: &[ForecastDay], cfg: &CalibrationConfig) -> Result<ForecastModel, ForecastError> {
    if history.len() < cfg.window_days || cfg.window_days == 0 {
        return Err(ForecastError::ShortHistory {
            needed: cfg.window_days.max(1),
            got: history.len(),
        });
    }
    let window = &history[history.len() - cfg.window_days..];
    let lags = cfg.grid.positive();
    let digests: Vec<DayDigest> = window
        .par_iter()
        .map(|d| digest_day(&d.leader, &d.lagger, lags, false))
        .collect();
    model_from_digests(&digests, lags, cfg.rule)
}

/// Weighted leader flow expected over the lagger's next tick.
///
/// At decision time `now` the lagger's next interval is taken to be
/// `]now, now + d]`, `d` the mean tick duration. For each lag `ℓ_k` the
/// leader increments already observed (`t_i <= now`) whose interval meets
/// `]now - ℓ_k, now + d - ℓ_k]` are summed.
pub fn forecast_score(model: &ForecastModel, leader: &TickSeries, now: f64) -> f64 {
    let t = leader.times();
    let r = leader.increments();
    if r.is_empty() {
        return 0.0;
    }
    // Increment i spans ]t[i], t[i + 1]].
    let known = t[1..].partition_point(|&e| e <= now);
    let mut score = ExactSum::new();
    for (beta, &lag) in model.betas.iter().zip(&model.lags) {
        let lo = t[1..known + 1].partition_point(|&e| e <= now - lag);
        let hi = t[..known].partition_point(|&s| s < now + model.mean_tick_duration_s - lag);
        let mut flow = ExactSum::new();
        for &x in &r[lo..hi.max(lo)] {
            flow.add(x);
        }
        score.add(beta * flow.value());
    }
    // Adding +0 folds -0 into +0 so replays compare bit for bit.
    score.value() + 0.0
}

/// `+1`, `-1`, or `None` on an exactly zero score.
pub fn predict_next(model: &ForecastModel, leader: &TickSeries, now: f64) -> Option<i8> {
    sign(forecast_score(model, leader, now))
}

pub(crate) fn sign(x: f64) -> Option<i8> {
    if x > 0.0 {
        Some(1)
    } else if x < 0.0 {
        Some(-1)
    } else {
        None
    }
}

/// Replays every decision with the leader truncated at the decision time and
/// returns the first decision time whose forecast changes.
pub fn audit_no_lookahead(model: &ForecastModel, leader: &TickSeries, decision_times: &[f64]) -> Result<(), f64> {
    for &now in decision_times {
        let full = forecast_score(model, leader, now);
        let cut = forecast_score(model, &leader.until(now), now);
        if full.to_bits() != cut.to_bits() {
            return Err(now);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn series(t: &[f64], v: &[f64]) -> TickSeries {
        TickSeries::new(t.to_vec(), v.to_vec()).unwrap()
    }

    fn model(betas: &[f64], lags: &[f64], dur: f64) -> ForecastModel {
        ForecastModel {
            betas: betas.to_vec(),
            lags: lags.to_vec(),
            mean_tick_duration_s: dur,
            calibration_window_days: 20,
        }
    }

    /// Direct evaluation of the windowed sum.
    fn brute_score(m: &ForecastModel, leader: &TickSeries, now: f64) -> f64 {
        let t = leader.times();
        let r = leader.increments();
        let mut s = 0.0;
        for (b, &l) in m.betas.iter().zip(&m.lags) {
            let mut f = 0.0;
            for i in 0..r.len() {
                let known = t[i + 1] <= now;
                let overlap = t[i + 1] > now - l && t[i] < now + m.mean_tick_duration_s - l;
                if known && overlap {
                    f += r[i];
                }
            }
            s += b * f;
        }
        s
    }

    #[test]
    fn hand_instances() {
        // Increments +1 on ]0, 1] and -2 on ]1, 3].
        let leader = series(&[0.0, 1.0, 3.0], &[0.0, 1.0, -1.0]);
        let m = model(&[0.5], &[2.0], 1.0);
        // now = 3: window ]1, 2] meets only ]1, 3] -> -2 * 0.5
        assert_eq!(forecast_score(&m, &leader, 3.0), -1.0);
        assert_eq!(predict_next(&m, &leader, 3.0), Some(-1));
        // Two lags with unequal weights: lag 2.5 -> window ]0.5, 1.5] meets both
        // increments (+1 - 2 = -1); lag 1 -> ]2, 3] meets the second (-2).
        let m = model(&[0.8, -0.3], &[1.0, 2.5], 1.0);
        assert!((forecast_score(&m, &leader, 3.0) - (0.8 * -2.0 + -0.3 * -1.0)).abs() < 1e-15);
        assert_eq!(predict_next(&m, &leader, 3.0), Some(-1));
        // Nothing observed yet.
        assert_eq!(predict_next(&m, &leader, 0.5), None);
        // Empty model abstains.
        assert_eq!(predict_next(&model(&[], &[], 1.0), &leader, 3.0), None);
    }

    #[test]
    fn positive_flow_positive_betas() {
        let leader = series(&[0.0, 9.5, 10.0], &[0.0, 0.0, 1.0]);
        let m = model(&[0.2, 0.1], &[0.1, 0.3], 1.0);
        assert_eq!(predict_next(&m, &leader, 10.05), Some(1));
    }

    #[test]
    fn identical_days_keep_every_lag() {
        let leader = series(&[0.0, 1.0, 2.0, 3.5, 4.0, 6.0], &[0.0, 1.0, 0.0, 2.0, 1.0, 1.5]);
        let lagger = series(&[0.0, 1.5, 2.2, 3.9, 4.6, 6.0], &[0.0, 1.0, 0.5, 2.0, 1.8, 1.2]);
        let grid = LagGrid::symmetric(&[0.5, 1.0, 2.0]).unwrap();
        let day = ForecastDay::new(leader, lagger);
        let cfg = CalibrationConfig {
            window_days: 20,
            grid,
            rule: SignificanceRule::default(),
        };
        let m = calibrate(&vec![day; 20], &cfg).unwrap();
        assert_eq!(m.lags, vec![0.5, 1.0, 2.0]);
        assert!((m.mean_tick_duration_s - 1.2).abs() < 1e-12);
    }

    #[test]
    fn short_history_is_an_error() {
        let d = ForecastDay::new(series(&[0.0, 1.0], &[0.0, 1.0]), series(&[0.0, 1.0], &[0.0, 1.0]));
        assert!(matches!(
            calibrate(&[d], &CalibrationConfig::default()),
            Err(ForecastError::ShortHistory { needed: 20, got: 1 })
        ));
    }

    #[test]
    fn diagonal_exclusion() {
        let x = series(&[0.0, 1.0, 2.0, 3.0], &[0.0, 1.0, 3.0, 2.0]);
        let with = positive_curve(&x, &x, &[0.5], false).unwrap()[0];
        let without = positive_curve(&x, &x, &[0.5], true).unwrap()[0];
        // Lag 0.5 overlaps (i, i) and (i, i + 1) pairs: diag 1 + 4 + 1, off 2 - 2.
        assert!((with - 6.0 / 6.0).abs() < 1e-15);
        assert!((without - 0.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn score_matches_direct_sum_and_ignores_future(
            steps in prop::collection::vec((0.01f64..2.0, -3i32..=3), 1..60),
            betas in prop::collection::vec(-1.0f64..1.0, 1..5),
            dur in 0.1f64..3.0,
            now in 0.0f64..40.0,
        ) {
            let mut t = vec![0.0];
            let mut v = vec![0.0];
            for (dt, dv) in &steps {
                t.push(t.last().unwrap() + dt);
                v.push(v.last().unwrap() + f64::from(*dv));
            }
            let leader = series(&t, &v);
            let lags: Vec<f64> = (1..=betas.len()).map(|k| 0.4 * k as f64).collect();
            let m = model(&betas, &lags, dur);
            let fast = forecast_score(&m, &leader, now);
            let slow = brute_score(&m, &leader, now);
            prop_assert!((fast - slow).abs() < 1e-9);
            prop_assert!(audit_no_lookahead(&m, &leader, &[now]).is_ok());
        }
    }
}

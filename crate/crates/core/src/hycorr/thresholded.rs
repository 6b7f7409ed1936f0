use super::{cross_correlation_curve, for_each_overlap, CrossCorrelationCurve, CrossEstimator, HyError, LagGrid, PairDay};
use crate::numeric::{exact_sum, ExactSum};
use crate::tickdata::TickSeries;
use serde::Serialize;

// Relative slack so that a move of exactly θ in decimal prices qualifies.
const THETA_SLACK: f64 = 1e-9;

/// Correlation restricted to large moves of the leading leg.
///
/// For `ℓ > 0` only `x` increments with `|r| >= θ` enter; for `ℓ < 0` only
/// `y` increments. The normalisation follows
/// `√(N_θ^X N_0^Y) Σ r^X r^Y 1{O} 1{|r^X| ≥ θ} / (N_θ^{X,Y}(ℓ) σ_θ^X σ_0^Y)`
/// where `N_θ^{X,Y}(ℓ)` counts overlapping pairs with both moves above θ
/// and `σ` are root sums of squares. At θ = 0 this differs from the plain
/// correlation by the factor `√(N^X N^Y) / N^{X,Y}(ℓ)`. At ℓ = 0 the main
/// curve carries the `x`-thresholded value; see [`thresholded_day`] for both.
#[derive(Debug, Clone, Copy)]
pub struct Thresholded {
    theta: f64,
}

impl Thresholded {
    pub fn new(theta: f64) -> Result<Self, HyError> {
        if !(theta >= 0.0) || !theta.is_finite() {
            return Err(HyError::InvalidParameter(format!("theta must be >= 0, got {theta}")));
        }
        Ok(Self { theta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    fn passes(&self, r: f64) -> bool {
        r.abs() >= self.theta * (1.0 - THETA_SLACK)
    }

    /// Value with the `lead` leg thresholded, `lead_is_x` selecting which.
    fn one_sided(&self, x: &TickSeries, y: &TickSeries, lag: f64, lead_is_x: bool) -> Option<f64> {
        let rx = x.increments();
        let ry = y.increments();
        let (lead, other) = if lead_is_x { (rx, ry) } else { (ry, rx) };
        let n_lead = lead.iter().filter(|r| self.passes(**r)).count();
        let sigma_lead = exact_sum(lead.iter().filter(|r| self.passes(**r)).map(|r| r * r)).sqrt();
        let n_other = other.len();
        let sigma_other = exact_sum(other.iter().map(|r| r * r)).sqrt();
        let mut num = ExactSum::new();
        let mut pairs = 0usize;
        for_each_overlap(x, y, lag, |i, j| {
            let (a, b) = if lead_is_x { (rx[i], ry[j]) } else { (ry[j], rx[i]) };
            if self.passes(a) {
                num.add(a * b);
                if self.passes(b) {
                    pairs += 1;
                }
            }
        });
        if n_lead == 0 || pairs == 0 || sigma_lead == 0.0 || sigma_other == 0.0 {
            return None;
        }
        let scale = ((n_lead * n_other) as f64).sqrt();
        Some(scale * num.value() / (pairs as f64 * sigma_lead * sigma_other))
    }
}

/// Thresholded curve of one day together with both lag-0 variants.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdedDay {
    pub rho: Vec<Option<f64>>,
    pub zero_lag_x: Option<f64>,
    pub zero_lag_y: Option<f64>,
}

pub fn thresholded_day(x: &TickSeries, y: &TickSeries, grid: &LagGrid, theta: f64) -> Result<ThresholdedDay, HyError> {
    let est = Thresholded::new(theta)?;
    if x.n_increments() == 0 || y.n_increments() == 0 {
        return Err(HyError::NoIncrements);
    }
    let rho = grid
        .lags()
        .iter()
        .map(|&l| est.one_sided(x, y, l, l >= 0.0))
        .collect();
    Ok(ThresholdedDay {
        rho,
        zero_lag_x: est.one_sided(x, y, 0.0, true),
        zero_lag_y: est.one_sided(x, y, 0.0, false),
    })
}

impl CrossEstimator for Thresholded {
    fn name(&self) -> &str {
        "thresholded"
    }

    fn day_curve(&self, x: &TickSeries, y: &TickSeries, grid: &LagGrid) -> Result<Vec<Option<f64>>, HyError> {
        thresholded_day(x, y, grid, self.theta).map(|d| d.rho)
    }
}

/// Across-day thresholded curve plus the across-day means of both lag-0
/// variants.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdedCurve {
    pub theta: f64,
    pub curve: CrossCorrelationCurve,
    pub zero_lag_x: Option<f64>,
    pub zero_lag_y: Option<f64>,
}

pub fn thresholded_curve(days: &[PairDay], grid: &LagGrid, theta: f64) -> Result<ThresholdedCurve, HyError> {
    let est = Thresholded::new(theta)?;
    let curve = cross_correlation_curve(days, grid, &est)?;
    let zero = LagGrid::new(vec![0.0]).expect("trivial grid");
    let mut zx = Vec::new();
    let mut zy = Vec::new();
    for d in days {
        if d.x.n_increments() < 2 || d.y.n_increments() < 2 {
            continue;
        }
        if let Ok(t) = thresholded_day(&d.x, &d.y, &zero, theta) {
            zx.extend(t.zero_lag_x);
            zy.extend(t.zero_lag_y);
        }
    }
    let mean = |v: &[f64]| (!v.is_empty()).then(|| exact_sum(v.iter().copied()) / v.len() as f64);
    Ok(ThresholdedCurve {
        theta,
        curve,
        zero_lag_x: mean(&zx),
        zero_lag_y: mean(&zy),
    })
}

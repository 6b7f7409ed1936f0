use super::{llr_detail, CrossCorrelationCurve, HyError, LagGrid};
use crate::numeric::{exact_sum, sample_sd, NaturalSpline};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryOptions {
    /// Step of the interpolation grid, seconds.
    pub mesh: f64,
    /// Locate the extremum of `|ρ|` instead of `ρ`.
    pub use_abs: bool,
}

impl Default for SummaryOptions {
    fn default() -> Self {
        Self {
            mesh: 0.1,
            use_abs: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeadLagSummary {
    pub llr: f64,
    pub llr_null_lags: usize,
    pub max_corr: f64,
    pub max_lag_s: f64,
    /// Sample dispersion of the per-day maximum lag.
    pub max_lag_sd: Option<f64>,
}

const TIE_TOL: f64 = 1e-12;

/// Spline-interpolated extremum of a single curve: `(max_corr, max_lag)`.
pub(crate) fn interpolated_max(grid: &LagGrid, rho: &[Option<f64>], opts: &SummaryOptions) -> Result<(f64, f64), HyError> {
    if !(opts.mesh > 0.0) {
        return Err(HyError::InvalidParameter("interpolation mesh must be > 0".into()));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = grid
        .lags()
        .iter()
        .zip(rho)
        .filter_map(|(&l, r)| r.map(|r| (l, r)))
        .unzip();
    if xs.len() < 4 {
        return Err(HyError::TooFewPoints(xs.len()));
    }
    if xs[0] > -1.0 || xs[xs.len() - 1] < 1.0 {
        return Err(HyError::NarrowCurve);
    }
    let spline = NaturalSpline::new(&xs, &ys).expect("knots strictly increasing");
    let k_lo = (xs[0] / opts.mesh - 1e-9).ceil() as i64;
    let k_hi = (xs[xs.len() - 1] / opts.mesh + 1e-9).floor() as i64;
    let score = |v: f64| if opts.use_abs { v.abs() } else { v };
    let mut best: Option<(f64, f64, f64)> = None; // (score, value, lag)
    for k in k_lo..=k_hi {
        let lag = ((k as f64 * opts.mesh) * 1e9).round() / 1e9;
        let v = spline.eval(lag);
        let s = score(v);
        best = match best {
            None => Some((s, v, lag)),
            Some((bs, bv, bl)) => {
                let tol = TIE_TOL * bs.abs().max(1.0);
                if s > bs + tol {
                    Some((s, v, lag))
                } else if s >= bs - tol && prefer(lag, bl) {
                    Some((s.max(bs), v, lag))
                } else {
                    Some((bs, bv, bl))
                }
            }
        };
    }
    let (_, v, l) = best.expect("at least one grid point");
    Ok((v, l))
}

// Tie rule: smaller |lag|, then positive lag.
fn prefer(candidate: f64, incumbent: f64) -> bool {
    let (a, b) = (candidate.abs(), incumbent.abs());
    a < b || (a == b && candidate > incumbent)
}

/// LLR from raw grid values and spline-based maximum correlation and lag.
pub fn extract_summary(curve: &CrossCorrelationCurve, opts: &SummaryOptions) -> Result<LeadLagSummary, HyError> {
    let b = llr_detail(&curve.grid, &curve.rho)?;
    let (max_corr, max_lag_s) = interpolated_max(&curve.grid, &curve.rho, opts)?;
    let day_lags: Vec<f64> = curve
        .per_day
        .iter()
        .filter_map(|d| interpolated_max(&curve.grid, d, opts).ok().map(|(_, l)| l))
        .collect();
    Ok(LeadLagSummary {
        llr: b.llr,
        llr_null_lags: b.null_lags,
        max_corr,
        max_lag_s,
        max_lag_sd: (day_lags.len() >= 2).then(|| sample_sd(&day_lags).expect("non-empty")),
    })
}

/// Mean, population dispersion and 95% half-width `1.96 σ/√n` of per-day
/// values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DayDispersion {
    pub mean: f64,
    pub sd: f64,
    pub ci95: f64,
    pub n: usize,
}

impl DayDispersion {
    pub fn from_values(v: &[f64]) -> Option<Self> {
        if v.is_empty() {
            return None;
        }
        let n = v.len() as f64;
        let mean = exact_sum(v.iter().copied()) / n;
        let sd = (exact_sum(v.iter().map(|x| (x - mean) * (x - mean))) / n).sqrt();
        Some(Self {
            mean,
            sd,
            ci95: 1.96 * sd / n.sqrt(),
            n: v.len(),
        })
    }

    pub fn contains(&self, value: f64) -> bool {
        (self.mean - value).abs() <= self.ci95
    }
}

/// Per-day summary statistics aggregated across days.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummaryDispersion {
    pub llr: DayDispersion,
    pub max_corr: DayDispersion,
    pub max_lag: DayDispersion,
}

pub fn summary_dispersion(curve: &CrossCorrelationCurve, opts: &SummaryOptions) -> Option<SummaryDispersion> {
    let mut llrs = Vec::new();
    let mut corrs = Vec::new();
    let mut lags = Vec::new();
    for d in &curve.per_day {
        if let (Ok(b), Ok((c, l))) = (llr_detail(&curve.grid, d), interpolated_max(&curve.grid, d, opts)) {
            llrs.push(b.llr);
            corrs.push(c);
            lags.push(l);
        }
    }
    Some(SummaryDispersion {
        llr: DayDispersion::from_values(&llrs)?,
        max_corr: DayDispersion::from_values(&corrs)?,
        max_lag: DayDispersion::from_values(&lags)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(f: impl Fn(f64) -> f64) -> CrossCorrelationCurve {
        let g = LagGrid::default_grid();
        let rho = g.lags().iter().map(|&l| Some(f(l))).collect();
        CrossCorrelationCurve::from_values(g, rho)
    }

    #[test]
    fn smooth_peak_off_zero() {
        let c = curve(|l| 0.5 * (-(l - 0.6) * (l - 0.6) / 2.0).exp());
        let s = extract_summary(&c, &SummaryOptions::default()).unwrap();
        assert!((s.max_lag_s - 0.6).abs() <= 0.1, "{}", s.max_lag_s);
        assert!((s.max_corr - 0.5).abs() < 1e-2);
        assert!(s.llr > 1.0);
    }

    #[test]
    fn triangle_peaks_at_zero() {
        let c = curve(|l| (1.0 - l.abs() / 300.0).max(0.0) * 0.8);
        let s = extract_summary(&c, &SummaryOptions::default()).unwrap();
        assert_eq!(s.max_lag_s, 0.0);
        assert!((s.llr - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ties_prefer_smaller_lag() {
        let g = LagGrid::uniform(1.0, 3).unwrap();
        let rho = [0.0, 0.5, 0.9, 0.2, 0.9, 0.5, 0.0].map(Some).to_vec();
        let (v, l) = interpolated_max(&g, &rho, &SummaryOptions { mesh: 1.0, use_abs: false }).unwrap();
        assert_eq!((v, l), (0.9, 1.0));
    }

    #[test]
    fn absolute_switch() {
        let g = LagGrid::uniform(1.0, 3).unwrap();
        let rho = [0.0, 0.1, -0.9, 0.2, 0.3, 0.1, 0.0].map(Some).to_vec();
        let o = SummaryOptions { mesh: 1.0, use_abs: true };
        assert_eq!(interpolated_max(&g, &rho, &o).unwrap(), (-0.9, -1.0));
        let o = SummaryOptions { mesh: 1.0, use_abs: false };
        assert_eq!(interpolated_max(&g, &rho, &o).unwrap(), (0.3, 1.0));
    }

    #[test]
    fn coverage_requirements() {
        let g = LagGrid::uniform(0.5, 1).unwrap();
        let rho = vec![Some(0.1); 3];
        assert_eq!(interpolated_max(&g, &rho, &SummaryOptions::default()), Err(HyError::TooFewPoints(3)));
        let g = LagGrid::uniform(0.2, 3).unwrap();
        let rho = vec![Some(0.1); 7];
        assert_eq!(interpolated_max(&g, &rho, &SummaryOptions::default()), Err(HyError::NarrowCurve));
    }

    #[test]
    fn dispersion_interval() {
        let d = DayDispersion::from_values(&[1.0, 1.2, 0.8, 1.0]).unwrap();
        assert!((d.mean - 1.0).abs() < 1e-15);
        assert!(d.contains(1.0));
        assert!(!d.contains(2.0));
    }
}

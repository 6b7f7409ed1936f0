use super::{CrossEstimator, HyError, LagGrid};
use crate::numeric::exact_sum;
use crate::tickdata::TickSeries;
use rayon::prelude::*;
use serde::Serialize;

/// One day (or slice) of a pair: `x` is the candidate leader.
#[derive(Debug, Clone)]
pub struct PairDay {
    pub x: TickSeries,
    pub y: TickSeries,
}

impl PairDay {
    pub fn new(x: TickSeries, y: TickSeries) -> Self {
        Self { x, y }
    }

    pub fn swapped(&self) -> Self {
        Self {
            x: self.y.clone(),
            y: self.x.clone(),
        }
    }

    pub fn window(&self, start: f64, end: f64) -> Self {
        Self {
            x: self.x.window(start, end),
            y: self.y.window(start, end),
        }
    }
}

/// Mean of daily values and the 95% half-width `1.96 σ/√D`, with `σ` the
/// population standard deviation across the `D` days.
pub fn mean_and_halfwidth(vals: &[f64]) -> (f64, f64) {
    let d = vals.len() as f64;
    let m = exact_sum(vals.iter().copied()) / d;
    let var = exact_sum(vals.iter().map(|v| (v - m) * (v - m))) / d;
    (m, 1.96 * var.max(0.0).sqrt() / d.sqrt())
}

/// Across-day mean of single-day curves with footnote-style 95% half-widths.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossCorrelationCurve {
    pub grid: LagGrid,
    /// Raw across-day mean, `None` where no day has data.
    pub rho: Vec<Option<f64>>,
    pub ci95: Vec<Option<f64>>,
    /// Days contributing at each lag.
    pub n_obs: Vec<usize>,
    pub n_days: usize,
    pub skipped_days: usize,
    pub per_day: Vec<Vec<Option<f64>>>,
}

impl CrossCorrelationCurve {
    /// Aggregates single-day curves laid out on `grid`.
    pub fn from_days(grid: LagGrid, per_day: Vec<Vec<Option<f64>>>, skipped_days: usize) -> Self {
        let n = grid.len();
        let mut rho = Vec::with_capacity(n);
        let mut ci95 = Vec::with_capacity(n);
        let mut n_obs = Vec::with_capacity(n);
        for k in 0..n {
            let vals: Vec<f64> = per_day.iter().filter_map(|d| d[k]).collect();
            n_obs.push(vals.len());
            if vals.is_empty() {
                rho.push(None);
                ci95.push(None);
                continue;
            }
            let (m, hw) = mean_and_halfwidth(&vals);
            rho.push(Some(m));
            ci95.push(Some(hw));
        }
        Self {
            grid,
            rho,
            ci95,
            n_obs,
            n_days: per_day.len(),
            skipped_days,
            per_day,
        }
    }

    /// A single-day curve with the given values.
    pub fn from_values(grid: LagGrid, rho: Vec<Option<f64>>) -> Self {
        assert_eq!(grid.len(), rho.len(), "one value per lag");
        Self::from_days(grid, vec![rho], 0)
    }

    pub fn value_at(&self, lag: f64) -> Option<f64> {
        self.grid.index_of(lag).and_then(|k| self.rho[k])
    }

    /// Roles of the two legs exchanged: `ρ'(ℓ) = ρ(−ℓ)`.
    pub fn mirrored(&self) -> Self {
        let rev = |v: &Vec<Option<f64>>| v.iter().rev().copied().collect::<Vec<_>>();
        Self {
            grid: self.grid.clone(),
            rho: rev(&self.rho),
            ci95: rev(&self.ci95),
            n_obs: self.n_obs.iter().rev().copied().collect(),
            n_days: self.n_days,
            skipped_days: self.skipped_days,
            per_day: self.per_day.iter().map(rev).collect(),
        }
    }

    /// Mean curve clipped to `[-1, 1]` for reporting, with the number of
    /// clipped lags.
    pub fn clipped(&self) -> (Vec<Option<f64>>, usize) {
        let mut count = 0;
        let v = self
            .rho
            .iter()
            .map(|r| {
                r.map(|r| {
                    if r.abs() > 1.0 {
                        count += 1;
                    }
                    r.clamp(-1.0, 1.0)
                })
            })
            .collect();
        (v, count)
    }
}

/// Runs `estimator` on every day and averages. Days with fewer than two
/// increments on a leg, or a degenerate leg, are skipped and counted.
pub fn cross_correlation_curve(
    days: &[PairDay],
    grid: &LagGrid,
    estimator: &dyn CrossEstimator,
) -> Result<CrossCorrelationCurve, HyError> {
    let results: Vec<Result<Option<Vec<Option<f64>>>, HyError>> = days
        .par_iter()
        .map(|d| {
            if d.x.n_increments() < 2 || d.y.n_increments() < 2 {
                return Ok(None);
            }
            match estimator.day_curve(&d.x, &d.y, grid) {
                Ok(v) => Ok(Some(v)),
                Err(e) if e.is_day_local() => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut per_day = Vec::new();
    let mut skipped = 0;
    for r in results {
        match r? {
            Some(v) => per_day.push(v),
            None => skipped += 1,
        }
    }
    if per_day.is_empty() {
        return Err(HyError::NoData);
    }
    Ok(CrossCorrelationCurve::from_days(grid.clone(), per_day, skipped))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LlrBreakdown {
    pub llr: f64,
    pub positive_sum: f64,
    pub negative_sum: f64,
    /// Non-zero lags skipped because the curve has no value there.
    pub null_lags: usize,
}

/// `Σ_{ℓ>0} ρ²(ℓ) / Σ_{ℓ>0} ρ²(−ℓ)` over the raw mean curve.
pub fn llr(curve: &CrossCorrelationCurve) -> Result<f64, HyError> {
    llr_detail(&curve.grid, &curve.rho).map(|b| b.llr)
}

pub fn llr_detail(grid: &LagGrid, rho: &[Option<f64>]) -> Result<LlrBreakdown, HyError> {
    let z = grid.zero_index();
    let n = grid.len();
    if n < 3 {
        return Err(HyError::OneSidedGrid);
    }
    let mut null_lags = 0;
    let mut side = |range: &mut dyn Iterator<Item = usize>| {
        let mut sq = Vec::new();
        for k in range {
            match rho[k] {
                Some(r) => sq.push(r * r),
                None => null_lags += 1,
            }
        }
        exact_sum(sq)
    };
    let positive_sum = side(&mut (z + 1..n));
    let negative_sum = side(&mut (0..z));
    if negative_sum == 0.0 {
        return Err(HyError::DegenerateNegativeLags);
    }
    Ok(LlrBreakdown {
        llr: positive_sum / negative_sum,
        positive_sum,
        negative_sum,
        null_lags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hycorr::HayashiYoshida;

    fn grid3() -> LagGrid {
        LagGrid::uniform(1.0, 3).unwrap()
    }

    #[test]
    fn symmetric_curve_has_unit_llr() {
        let v = [0.1, 0.3, 0.5, 0.9, 0.5, 0.3, 0.1].map(Some).to_vec();
        assert_eq!(llr(&CrossCorrelationCurve::from_values(grid3(), v)).unwrap(), 1.0);
    }

    #[test]
    fn doubled_positive_side_gives_four() {
        let v = [0.1, 0.2, 0.3, 1.0, 0.6, 0.4, 0.2].map(Some).to_vec();
        let l = llr(&CrossCorrelationCurve::from_values(grid3(), v)).unwrap();
        assert!((l - 4.0).abs() < 1e-12);
    }

    #[test]
    fn llr_errors_and_nulls() {
        let v = [0.0, 0.0, 0.0, 1.0, 0.6, 0.4, 0.2].map(Some).to_vec();
        assert_eq!(
            llr(&CrossCorrelationCurve::from_values(grid3(), v)),
            Err(HyError::DegenerateNegativeLags)
        );
        let v = vec![Some(0.1), None, Some(0.2), Some(1.0), Some(0.1), None, Some(0.2)];
        let b = llr_detail(&grid3(), &v).unwrap();
        assert_eq!(b.null_lags, 2);
        assert!((b.llr - 1.0).abs() < 1e-15);
        let g0 = LagGrid::new(vec![0.0]).unwrap();
        assert_eq!(llr_detail(&g0, &[Some(1.0)]), Err(HyError::OneSidedGrid));
    }

    #[test]
    fn mirrored_inverts_llr() {
        let v = [0.1, 0.2, 0.35, 1.0, 0.6, 0.4, 0.2].map(Some).to_vec();
        let c = CrossCorrelationCurve::from_values(grid3(), v);
        let p = llr(&c).unwrap() * llr(&c.mirrored()).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identical_days_have_zero_width() {
        let x = TickSeries::new(vec![0.0, 1.0, 2.5, 3.0], vec![0.0, 1.0, 0.0, 2.0]).unwrap();
        let y = TickSeries::new(vec![0.0, 0.7, 2.0, 3.1], vec![0.0, -1.0, 0.5, 1.0]).unwrap();
        let days = vec![PairDay::new(x, y); 7];
        let c = cross_correlation_curve(&days, &grid3(), &HayashiYoshida).unwrap();
        assert_eq!(c.n_days, 7);
        for (w, r) in c.ci95.iter().zip(&c.per_day[0]) {
            assert!(w.unwrap() < 1e-15);
            assert!(r.is_some());
        }
    }

    #[test]
    fn short_days_are_skipped() {
        let x = TickSeries::new(vec![0.0, 1.0, 2.5], vec![0.0, 1.0, 0.0]).unwrap();
        let short = TickSeries::new(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
        let days = vec![PairDay::new(x.clone(), x.clone()), PairDay::new(x, short)];
        let c = cross_correlation_curve(&days, &grid3(), &HayashiYoshida).unwrap();
        assert_eq!((c.n_days, c.skipped_days), (1, 1));
        assert_eq!(cross_correlation_curve(&days[1..], &grid3(), &HayashiYoshida), Err(HyError::NoData));
    }

    #[test]
    fn clipping_is_counted() {
        let v = [0.1, 0.2, 1.3, 1.0, -1.2, 0.4, 0.2].map(Some).to_vec();
        let (c, n) = CrossCorrelationCurve::from_values(grid3(), v).clipped();
        assert_eq!(n, 2);
        assert_eq!(c[2], Some(1.0));
        assert_eq!(c[4], Some(-1.0));
    }
}

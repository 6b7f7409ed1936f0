use super::{cross_correlation_curve, CrossCorrelationCurve, CrossEstimator, HyError, LagGrid, PairDay};
use crate::tickdata::TickSeries;

/// Previous-tick estimator: both legs are sampled on a common regular grid
/// (last value at or before each grid point) and the synchronised returns
/// are correlated with the ordinary sample correlation. Lags are rounded to
/// the nearest multiple of the mesh.
#[derive(Debug, Clone, Copy)]
pub struct PreviousTick {
    mesh: f64,
}

impl PreviousTick {
    pub fn new(mesh: f64) -> Result<Self, HyError> {
        if !(mesh > 0.0) || !mesh.is_finite() {
            return Err(HyError::InvalidParameter(format!("mesh must be > 0, got {mesh}")));
        }
        Ok(Self { mesh })
    }

    pub fn mesh(&self) -> f64 {
        self.mesh
    }

    /// Synchronised returns of both legs on the common grid.
    pub fn synchronise(&self, x: &TickSeries, y: &TickSeries) -> Result<(Vec<f64>, Vec<f64>), HyError> {
        let (Some(x0), Some(y0), Some(x1), Some(y1)) =
            (x.first_time(), y.first_time(), x.last_time(), y.last_time())
        else {
            return Err(HyError::NoIncrements);
        };
        let start = x0.max(y0);
        let end = x1.min(y1);
        let steps = ((end - start) / self.mesh).floor();
        if !(steps >= 2.0) {
            return Err(HyError::InvalidParameter(format!(
                "mesh {} larger than the common session of {} s",
                self.mesh,
                (end - start).max(0.0)
            )));
        }
        let k = steps as usize;
        let sample = |s: &TickSeries| -> Vec<f64> {
            let t = s.times();
            let v = s.values();
            let mut p = 0;
            let mut out = Vec::with_capacity(k + 1);
            for i in 0..=k {
                let g = start + i as f64 * self.mesh;
                while p + 1 < t.len() && t[p + 1] <= g {
                    p += 1;
                }
                out.push(v[p]);
            }
            out.windows(2).map(|w| w[1] - w[0]).collect()
        };
        Ok((sample(x), sample(y)))
    }
}

impl CrossEstimator for PreviousTick {
    fn name(&self) -> &str {
        "previous-tick"
    }

    fn day_curve(&self, x: &TickSeries, y: &TickSeries, grid: &LagGrid) -> Result<Vec<Option<f64>>, HyError> {
        let (rx, ry) = self.synchronise(x, y)?;
        let n = rx.len() as i64;
        Ok(grid
            .lags()
            .iter()
            .map(|&l| {
                let h = (l / self.mesh).round() as i64;
                // pairs rx[k] with ry[k + h]
                let lo = 0.max(-h);
                let hi = n.min(n - h);
                if hi - lo < 2 {
                    return None;
                }
                let a = &rx[lo as usize..hi as usize];
                let b = &ry[(lo + h) as usize..(hi + h) as usize];
                pearson(a, b)
            })
            .collect())
    }
}

fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    (saa > 0.0 && sbb > 0.0).then(|| sab / (saa * sbb).sqrt())
}

pub fn previous_tick_curve(days: &[PairDay], grid: &LagGrid, mesh: f64) -> Result<CrossCorrelationCurve, HyError> {
    cross_correlation_curve(days, grid, &PreviousTick::new(mesh)?)
}

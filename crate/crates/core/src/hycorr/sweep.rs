//! Lagged Hayashi-Yoshida sums over overlapping observation intervals.

use super::HyError;
use crate::numeric::ExactSum;
use crate::tickdata::TickSeries;

/// Calls `f(i, j)` for every pair of increments whose intervals overlap once
/// the second series is shifted back by `lag`:
/// `]tx[i], tx[i+1]] ∩ ]ty[j] - lag, ty[j+1] - lag] != ∅`.
///
/// The predicate is evaluated as `ty[j+1] - tx[i] > lag` and
/// `ty[j] - tx[i+1] < lag`, so swapping legs and negating the lag visits
/// exactly the same pairs. Runs in O(n + m + #overlaps).
pub fn for_each_overlap(x: &TickSeries, y: &TickSeries, lag: f64, mut f: impl FnMut(usize, usize)) {
    let tx = x.times();
    let ty = y.times();
    let n = x.n_increments();
    let m = y.n_increments();
    if n == 0 || m == 0 {
        return;
    }
    let mut lo = 0;
    let mut hi = 0;
    for i in 0..n {
        while lo < m && !(ty[lo + 1] - tx[i] > lag) {
            lo += 1;
        }
        while hi < m && ty[hi] - tx[i + 1] < lag {
            hi += 1;
        }
        for j in lo..hi {
            f(i, j);
        }
    }
}

/// `Σ r_i^X r_j^Y 1{O_ij^lag ≠ ∅}`, summed exactly (order independent).
pub fn hy_covariance(x: &TickSeries, y: &TickSeries, lag: f64) -> Result<f64, HyError> {
    if x.n_increments() == 0 || y.n_increments() == 0 {
        return Err(HyError::NoIncrements);
    }
    let rx = x.increments();
    let ry = y.increments();
    let mut acc = ExactSum::new();
    for_each_overlap(x, y, lag, |i, j| acc.add(rx[i] * ry[j]));
    Ok(acc.value())
}

/// Lagged covariance normalised by the root sum of squared increments of
/// both legs. Not clipped: single-day lagged values may leave `[-1, 1]`.
pub fn hy_correlation(x: &TickSeries, y: &TickSeries, lag: f64) -> Result<f64, HyError> {
    let cov = hy_covariance(x, y, lag)?;
    let denom = norm_product(x, y)?;
    Ok(cov / denom)
}

pub(crate) fn norm_product(x: &TickSeries, y: &TickSeries) -> Result<f64, HyError> {
    let sx = x.sum_sq_increments();
    let sy = y.sum_sq_increments();
    if sx == 0.0 || sy == 0.0 {
        return Err(HyError::ZeroVariance);
    }
    Ok((sx * sy).sqrt())
}

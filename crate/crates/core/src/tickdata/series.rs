use super::TickDataError;
use serde::{Deserialize, Serialize};

/// Observation epochs `(t_k, m_k)` with `t` in seconds, strictly increasing.
///
/// Series built by [`super::to_tick_time`] only carry non-zero increments.
/// Simulated series sampled on Poisson grids may contain zero increments,
/// which every estimator handles transparently.
#[derive(Debug, Clone, PartialEq)]
pub struct TickSeries {
    times: Vec<f64>,
    values: Vec<f64>,
    increments: Vec<f64>,
}

impl TickSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self, TickDataError> {
        if times.len() != values.len() {
            return Err(TickDataError::Series(format!(
                "{} timestamps for {} values",
                times.len(),
                values.len()
            )));
        }
        if times.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(TickDataError::Series("non-finite entry".into()));
        }
        if let Some(k) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(TickDataError::Series(format!(
                "timestamps not strictly increasing at epoch {}",
                k + 1
            )));
        }
        let increments = values.windows(2).map(|w| w[1] - w[0]).collect();
        Ok(Self {
            times,
            values,
            increments,
        })
    }

    pub fn empty() -> Self {
        Self {
            times: Vec::new(),
            values: Vec::new(),
            increments: Vec::new(),
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `increments()[k] = values[k + 1] - values[k]`, attached to the
    /// interval `]times[k], times[k + 1]]`.
    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn n_increments(&self) -> usize {
        self.increments.len()
    }

    pub fn first_time(&self) -> Option<f64> {
        self.times.first().copied()
    }

    pub fn last_time(&self) -> Option<f64> {
        self.times.last().copied()
    }

    pub fn span(&self) -> f64 {
        match (self.first_time(), self.last_time()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    pub fn sum_sq_increments(&self) -> f64 {
        crate::numeric::exact_sum(self.increments.iter().map(|r| r * r))
    }

    /// Mean duration between consecutive epochs.
    pub fn mean_duration(&self) -> Option<f64> {
        (self.n_increments() > 0).then(|| self.span() / self.n_increments() as f64)
    }

    pub fn is_tick_time(&self) -> bool {
        self.increments.iter().all(|r| *r != 0.0)
    }

    pub fn shifted(&self, dt: f64) -> Self {
        let times = self.times.iter().map(|t| t + dt).collect();
        Self::new(times, self.values.clone()).expect("shift preserves ordering")
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        let values = self.values.iter().map(|v| f(*v)).collect();
        Self::new(self.times.clone(), values).expect("same timestamps")
    }

    /// Epochs with `start <= t <= end`.
    pub fn window(&self, start: f64, end: f64) -> Self {
        let lo = self.times.partition_point(|&t| t < start);
        let hi = self.times.partition_point(|&t| t <= end);
        let hi = hi.max(lo);
        Self::new(self.times[lo..hi].to_vec(), self.values[lo..hi].to_vec())
            .expect("sub-slice of a valid series")
    }

    /// Epochs with `t <= now`.
    pub fn until(&self, now: f64) -> Self {
        let hi = self.times.partition_point(|&t| t <= now);
        Self::new(self.times[..hi].to_vec(), self.values[..hi].to_vec())
            .expect("prefix of a valid series")
    }

    /// Re-samples the epochs in (coarse) tick time.
    pub fn coarsen(&self, threshold: TickThreshold, tick_size: f64) -> Self {
        tick_time_walk(
            self.times.iter().copied().zip(self.values.iter().copied()),
            threshold,
            tick_size,
        )
    }
}

/// Minimal midquote move that opens a new tick-time epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TickThreshold {
    /// Any non-zero change.
    AnyChange,
    /// A move of at least this many ticks (`>= 0.5`).
    Ticks(f64),
}

// Relative slack absorbing decimal representation error of prices.
const MOVE_SLACK: f64 = 1e-9;

pub(crate) fn tick_time_walk(
    points: impl Iterator<Item = (f64, f64)>,
    threshold: TickThreshold,
    tick_size: f64,
) -> TickSeries {
    let min_move = match threshold {
        TickThreshold::AnyChange => None,
        TickThreshold::Ticks(theta) => Some(theta * tick_size * (1.0 - MOVE_SLACK)),
    };
    let mut times = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    for (t, m) in points {
        let Some(&last) = values.last() else {
            times.push(t);
            values.push(m);
            continue;
        };
        let moved = match min_move {
            None => m != last,
            Some(thr) => (m - last).abs() >= thr,
        };
        if moved && t > *times.last().expect("non-empty") {
            times.push(t);
            values.push(m);
        }
    }
    TickSeries::new(times, values).expect("walk emits increasing epochs")
}

/// Best quotes at one instant, `t` in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuotePoint {
    pub t: f64,
    pub bid: f64,
    pub ask: f64,
}

impl QuotePoint {
    pub fn mid(&self) -> f64 {
        0.5 * (self.bid + self.ask)
    }

    pub fn spread(&self) -> f64 {
        self.ask - self.bid
    }
}

/// Continuous best-quote stream, ordered by time.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QuoteTrack {
    points: Vec<QuotePoint>,
}

impl QuoteTrack {
    /// Sorts by time (stable); several updates may share a timestamp, the
    /// last one wins.
    pub fn new(mut points: Vec<QuotePoint>) -> Self {
        points.sort_by(|a, b| a.t.total_cmp(&b.t));
        Self { points }
    }

    /// Quotes with a constant spread around every epoch of `mids`.
    pub fn around(mids: &TickSeries, spread: f64) -> Self {
        let half = 0.5 * spread;
        Self::new(
            mids.times()
                .iter()
                .zip(mids.values())
                .map(|(&t, &m)| QuotePoint {
                    t,
                    bid: m - half,
                    ask: m + half,
                })
                .collect(),
        )
    }

    pub fn points(&self) -> &[QuotePoint] {
        &self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Last quote with `t' <= t`.
    pub fn at_or_before(&self, t: f64) -> Option<&QuotePoint> {
        let k = self.points.partition_point(|q| q.t <= t);
        k.checked_sub(1).map(|i| &self.points[i])
    }

    /// Last quote with `t' < t`.
    pub fn strictly_before(&self, t: f64) -> Option<&QuotePoint> {
        let k = self.points.partition_point(|q| q.t < t);
        k.checked_sub(1).map(|i| &self.points[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_increasing_times() {
        assert!(TickSeries::new(vec![0.0, 1.0, 1.0], vec![1.0, 2.0, 3.0]).is_err());
        assert!(TickSeries::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(TickSeries::new(vec![0.0, f64::NAN], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn increments_and_window() {
        let s = TickSeries::new(vec![0.0, 2.0, 4.0], vec![1.0, 2.0, 1.0]).unwrap();
        assert_eq!(s.increments(), &[1.0, -1.0]);
        assert_eq!(s.sum_sq_increments(), 2.0);
        let w = s.window(1.0, 4.0);
        assert_eq!(w.times(), &[2.0, 4.0]);
        assert_eq!(s.until(2.0).len(), 2);
        assert_eq!(s.mean_duration(), Some(2.0));
    }

    #[test]
    fn quote_track_lookups() {
        let q = QuoteTrack::new(vec![
            QuotePoint { t: 1.0, bid: 9.0, ask: 11.0 },
            QuotePoint { t: 2.0, bid: 9.5, ask: 10.5 },
        ]);
        assert!(q.at_or_before(0.5).is_none());
        assert_eq!(q.at_or_before(2.0).unwrap().bid, 9.5);
        assert_eq!(q.strictly_before(2.0).unwrap().bid, 9.0);
    }
}

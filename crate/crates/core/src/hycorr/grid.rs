use super::HyError;
use serde::{Deserialize, Serialize};

/// Symmetric, strictly increasing set of lags (seconds) that contains 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct LagGrid {
    lags: Vec<f64>,
}

impl LagGrid {
    pub fn new(lags: Vec<f64>) -> Result<Self, HyError> {
        if lags.iter().any(|l| !l.is_finite()) {
            return Err(HyError::InvalidGrid("non-finite lag".into()));
        }
        if lags.windows(2).any(|w| w[1] <= w[0]) {
            return Err(HyError::InvalidGrid("lags must be strictly increasing".into()));
        }
        if !lags.contains(&0.0) {
            return Err(HyError::InvalidGrid("grid must contain 0".into()));
        }
        let n = lags.len();
        if (0..n).any(|k| lags[k] != -lags[n - 1 - k]) {
            return Err(HyError::InvalidGrid("grid must be symmetric around 0".into()));
        }
        Ok(Self { lags })
    }

    /// Mirrors a set of positive lags into a full symmetric grid.
    pub fn symmetric(positive: &[f64]) -> Result<Self, HyError> {
        let mut pos: Vec<f64> = positive.to_vec();
        if pos.iter().any(|l| !(*l > 0.0)) {
            return Err(HyError::InvalidGrid("positive lags must be > 0".into()));
        }
        pos.sort_by(f64::total_cmp);
        pos.dedup();
        let mut lags: Vec<f64> = pos.iter().rev().map(|l| -l).collect();
        lags.push(0.0);
        lags.extend(pos);
        Self::new(lags)
    }

    /// 0, 0.01, …, 0.1, 0.2, …, 1, 2, …, 10, 15, 20, 30, 40, …, 120, 180,
    /// 240, 300 seconds, mirrored.
    pub fn default_grid() -> Self {
        Self::symmetric(&default_positive_lags()).expect("static grid is valid")
    }

    /// Default grid restricted to `|lag| <= max_lag`.
    pub fn default_up_to(max_lag: f64) -> Result<Self, HyError> {
        let pos: Vec<f64> = default_positive_lags()
            .into_iter()
            .filter(|l| *l <= max_lag)
            .collect();
        Self::symmetric(&pos)
    }

    /// `k * step` for `k = -n..=n`.
    pub fn uniform(step: f64, n: usize) -> Result<Self, HyError> {
        if !(step > 0.0) || n == 0 {
            return Err(HyError::InvalidGrid("uniform grid needs step > 0 and n >= 1".into()));
        }
        Self::symmetric(&(1..=n).map(|k| k as f64 * step).collect::<Vec<_>>())
    }

    pub fn lags(&self) -> &[f64] {
        &self.lags
    }

    pub fn len(&self) -> usize {
        self.lags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lags.is_empty()
    }

    pub fn index_of(&self, lag: f64) -> Option<usize> {
        self.lags.iter().position(|l| *l == lag)
    }

    pub fn zero_index(&self) -> usize {
        self.lags.len() / 2
    }

    pub fn positive(&self) -> &[f64] {
        &self.lags[self.zero_index() + 1..]
    }

    pub fn min(&self) -> f64 {
        self.lags[0]
    }

    pub fn max(&self) -> f64 {
        self.lags[self.lags.len() - 1]
    }
}

impl TryFrom<Vec<f64>> for LagGrid {
    type Error = HyError;
    fn try_from(v: Vec<f64>) -> Result<Self, HyError> {
        Self::new(v)
    }
}

impl From<LagGrid> for Vec<f64> {
    fn from(g: LagGrid) -> Self {
        g.lags
    }
}

fn default_positive_lags() -> Vec<f64> {
    let mut v: Vec<f64> = (1..=10).map(|k| k as f64 / 100.0).collect();
    v.extend((2..=10).map(|k| k as f64 / 10.0));
    v.extend((2..=10).map(|k| k as f64));
    v.push(15.0);
    v.push(20.0);
    v.extend((3..=12).map(|k| 10.0 * k as f64));
    v.extend([180.0, 240.0, 300.0]);
    v
}

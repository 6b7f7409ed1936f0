use super::{hy_correlation, HyError, LagGrid, PreviousTick, Thresholded};
use crate::tickdata::TickSeries;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A single-day lagged cross-correlation estimator.
///
/// Positive lags mean `x` leads `y`. A `None` entry marks a lag without
/// qualifying data.
pub trait CrossEstimator: Send + Sync {
    fn name(&self) -> &str;

    fn day_curve(
        &self,
        x: &TickSeries,
        y: &TickSeries,
        grid: &LagGrid,
    ) -> Result<Vec<Option<f64>>, HyError>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct HayashiYoshida;

impl CrossEstimator for HayashiYoshida {
    fn name(&self) -> &str {
        "hayashi-yoshida"
    }

    fn day_curve(&self, x: &TickSeries, y: &TickSeries, grid: &LagGrid) -> Result<Vec<Option<f64>>, HyError> {
        grid.lags()
            .iter()
            .map(|&l| hy_correlation(x, y, l).map(Some))
            .collect()
    }
}

/// Knobs consumed by the registered factories.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorParams {
    /// Sampling step of the previous-tick estimator, seconds.
    pub mesh: f64,
    /// Thresholded estimator cut-off, price units.
    pub theta: f64,
}

impl Default for EstimatorParams {
    fn default() -> Self {
        Self { mesh: 1.0, theta: 0.0 }
    }
}

type Factory = fn(&EstimatorParams) -> Result<Box<dyn CrossEstimator>, HyError>;

/// Estimators addressable by name.
pub struct EstimatorRegistry {
    factories: BTreeMap<String, Factory>,
}

impl EstimatorRegistry {
    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, name: &str, factory: Factory) {
        self.factories.insert(name.to_string(), factory);
    }

    pub fn names(&self) -> Vec<&str> {
        self.factories.keys().map(String::as_str).collect()
    }

    pub fn build(&self, name: &str, params: &EstimatorParams) -> Result<Box<dyn CrossEstimator>, HyError> {
        let factory = self
            .factories
            .get(name)
            .ok_or_else(|| HyError::UnknownEstimator(name.to_string()))?;
        factory(params)
    }
}

impl Default for EstimatorRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register("hayashi-yoshida", |_| Ok(Box::new(HayashiYoshida)));
        r.register("previous-tick", |p| Ok(Box::new(PreviousTick::new(p.mesh)?)));
        r.register("thresholded", |p| Ok(Box::new(Thresholded::new(p.theta)?)));
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_builds_by_name() {
        let r = EstimatorRegistry::default();
        assert_eq!(r.names(), vec!["hayashi-yoshida", "previous-tick", "thresholded"]);
        let p = EstimatorParams::default();
        for name in r.names() {
            assert_eq!(r.build(name, &p).unwrap().name(), name);
        }
        assert!(matches!(r.build("nope", &p), Err(HyError::UnknownEstimator(_))));
        let bad = EstimatorParams { mesh: 0.0, theta: 0.0 };
        assert!(r.build("previous-tick", &bad).is_err());
    }

    #[test]
    fn custom_registration() {
        struct Zero;
        impl CrossEstimator for Zero {
            fn name(&self) -> &str {
                "zero"
            }
            fn day_curve(&self, _: &TickSeries, _: &TickSeries, g: &LagGrid) -> Result<Vec<Option<f64>>, HyError> {
                Ok(vec![Some(0.0); g.len()])
            }
        }
        let mut r = EstimatorRegistry::empty();
        r.register("zero", |_| Ok(Box::new(Zero)));
        let e = r.build("zero", &EstimatorParams::default()).unwrap();
        let x = TickSeries::new(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
        assert_eq!(e.day_curve(&x, &x, &LagGrid::uniform(1.0, 1).unwrap()).unwrap(), vec![Some(0.0); 3]);
    }
}

use super::model::{digest_day, model_from_digests, predict_next, sign, DayDigest, SignificanceRule};
use super::{ForecastDay, ForecastError};
use crate::hycorr::LagGrid;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A forecasting device for the sign of the lagger's next midquote move.
///
/// The backtest digests every day once, then asks for one test day's
/// forecasts given the digests of its calibration window. Forecast `j` is
/// decided at the lagger epoch `times[j]` for the increment ending at
/// `times[j + 1]`.
pub trait Forecaster: Send + Sync {
    fn name(&self) -> &str;

    fn digest(&self, _day: &ForecastDay) -> DayDigest {
        DayDigest::default()
    }

    fn forecast_day(
        &self,
        window: &[DayDigest],
        day: &ForecastDay,
        day_index: usize,
    ) -> Result<Vec<Option<i8>>, ForecastError>;
}

/// Decision epochs of a day: every lagger epoch but the last.
pub fn decision_times(day: &ForecastDay) -> &[f64] {
    let t = day.lagger.times();
    &t[..t.len().saturating_sub(1)]
}

/// Lead/lag device: the leader's recent increments weighted by the
/// calibrated cross-correlations.
#[derive(Debug, Clone)]
pub struct LeadLagForecaster {
    pub grid: LagGrid,
    pub rule: SignificanceRule,
}

impl Forecaster for LeadLagForecaster {
    fn name(&self) -> &str {
        "leadlag"
    }

    fn digest(&self, day: &ForecastDay) -> DayDigest {
        digest_day(&day.leader, &day.lagger, self.grid.positive(), false)
    }

    fn forecast_day(&self, window: &[DayDigest], day: &ForecastDay, _: usize) -> Result<Vec<Option<i8>>, ForecastError> {
        let model = model_from_digests(window, self.grid.positive(), self.rule)?;
        Ok(decision_times(day)
            .iter()
            .map(|&now| predict_next(&model, &day.leader, now))
            .collect())
    }
}

/// Same device with the lagger as its own leader. The self-overlap of each
/// increment is left out of the calibration curve.
#[derive(Debug, Clone)]
pub struct AutocorrelationForecaster {
    pub grid: LagGrid,
    pub rule: SignificanceRule,
}

impl Forecaster for AutocorrelationForecaster {
    fn name(&self) -> &str {
        "autocorrelation"
    }

    fn digest(&self, day: &ForecastDay) -> DayDigest {
        digest_day(&day.lagger, &day.lagger, self.grid.positive(), true)
    }

    fn forecast_day(&self, window: &[DayDigest], day: &ForecastDay, _: usize) -> Result<Vec<Option<i8>>, ForecastError> {
        let model = model_from_digests(window, self.grid.positive(), self.rule)?;
        Ok(decision_times(day)
            .iter()
            .map(|&now| predict_next(&model, &day.lagger, now))
            .collect())
    }
}

/// Fair coin, one independent stream per day.
#[derive(Debug, Clone, Copy)]
pub struct RandomForecaster {
    pub seed: u64,
}

impl Forecaster for RandomForecaster {
    fn name(&self) -> &str {
        "random"
    }

    fn forecast_day(&self, _: &[DayDigest], day: &ForecastDay, day_index: usize) -> Result<Vec<Option<i8>>, ForecastError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(day_index as u64);
        Ok(decision_times(day)
            .iter()
            .map(|_| Some(if rng.random::<bool>() { 1 } else { -1 }))
            .collect())
    }
}

/// Reads the realised move: an upper bound, not a forecast.
#[derive(Debug, Clone, Copy)]
pub struct PerfectForesight;

impl Forecaster for PerfectForesight {
    fn name(&self) -> &str {
        "perfect-foresight"
    }

    fn forecast_day(&self, _: &[DayDigest], day: &ForecastDay, _: usize) -> Result<Vec<Option<i8>>, ForecastError> {
        Ok(day.lagger.increments().iter().map(|&r| sign(r)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecasterParams {
    pub grid: LagGrid,
    pub rule: SignificanceRule,
    pub seed: u64,
}

impl Default for ForecasterParams {
    fn default() -> Self {
        Self {
            grid: LagGrid::default_grid(),
            rule: SignificanceRule::default(),
            seed: 0,
        }
    }
}

type Factory = fn(&ForecasterParams) -> Box<dyn Forecaster>;

/// Forecasters addressable by name.
pub struct ForecasterRegistry {
    factories: BTreeMap<String, Factory>,
}

impl ForecasterRegistry {
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

    pub fn build(&self, name: &str, params: &ForecasterParams) -> Result<Box<dyn Forecaster>, ForecastError> {
        self.factories
            .get(name)
            .map(|f| f(params))
            .ok_or_else(|| ForecastError::UnknownForecaster(name.to_string()))
    }
}

impl Default for ForecasterRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register("leadlag", |p| {
            Box::new(LeadLagForecaster {
                grid: p.grid.clone(),
                rule: p.rule,
            })
        });
        r.register("autocorrelation", |p| {
            Box::new(AutocorrelationForecaster {
                grid: p.grid.clone(),
                rule: p.rule,
            })
        });
        r.register("random", |p| Box::new(RandomForecaster { seed: p.seed }));
        r.register("perfect-foresight", |_| Box::new(PerfectForesight));
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchmarkKind {
    Random,
    Autocorrelation,
}

/// Benchmark forecasts for the test days `window_days..`, on the same
/// decision epochs as any other forecaster.
pub fn benchmark_forecasts(
    days: &[ForecastDay],
    kind: BenchmarkKind,
    window_days: usize,
    params: &ForecasterParams,
) -> Result<Vec<Vec<Option<i8>>>, ForecastError> {
    let f: Box<dyn Forecaster> = match kind {
        BenchmarkKind::Random => Box::new(RandomForecaster { seed: params.seed }),
        BenchmarkKind::Autocorrelation => Box::new(AutocorrelationForecaster {
            grid: params.grid.clone(),
            rule: params.rule,
        }),
    };
    super::backtest::forecast_all(days, f.as_ref(), window_days)
}

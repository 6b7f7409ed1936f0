pub mod backtest;
pub mod market;
pub mod network;
pub mod pair;
pub mod sim;

use crate::data::Dataset;
use crate::error::CliError;
use clap::Args;
use leadlag::hycorr::{CrossEstimator, EstimatorParams, EstimatorRegistry, LagGrid};
use serde::Serialize;
use std::path::PathBuf;

pub enum Outcome {
    DryRun,
    Written,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DataArgs {
    /// Dataset root: `instruments.json` and one directory per day.
    #[arg(long)]
    pub data: PathBuf,
    /// Instrument metadata file, if not `<data>/instruments.json`.
    #[arg(long)]
    pub instruments: Option<PathBuf>,
}

impl DataArgs {
    pub fn open(&self) -> Result<Dataset, CliError> {
        Dataset::open(&self.data, self.instruments.as_deref())
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GridArgs {
    /// Positive lags in seconds, mirrored around 0. Overrides --max-lag.
    #[arg(long, value_delimiter = ',')]
    pub lags: Option<Vec<f64>>,
    /// Truncate the default lag grid at this many seconds.
    #[arg(long)]
    pub max_lag: Option<f64>,
}

impl GridArgs {
    pub fn grid(&self, default_max: f64) -> Result<LagGrid, CliError> {
        Ok(match &self.lags {
            Some(l) => LagGrid::symmetric(l)?,
            None => LagGrid::default_up_to(self.max_lag.unwrap_or(default_max))?,
        })
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EstimatorArgs {
    /// Cross-correlation estimator.
    #[arg(long, default_value = "hayashi-yoshida")]
    pub estimator: String,
    /// Sampling step of the previous-tick estimator, seconds.
    #[arg(long, default_value_t = 1.0)]
    pub mesh: f64,
    /// Leader cut-off of the thresholded estimator, price units.
    #[arg(long, default_value_t = 0.0)]
    pub theta: f64,
}

impl EstimatorArgs {
    pub fn build(&self) -> Result<Box<dyn CrossEstimator>, CliError> {
        let params = EstimatorParams {
            mesh: self.mesh,
            theta: self.theta,
        };
        Ok(EstimatorRegistry::default().build(&self.estimator, &params)?)
    }
}

pub fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::usage(format!("--{name} must be positive, got {v}")))
    }
}

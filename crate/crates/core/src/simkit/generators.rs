use super::paths::{correlated_paths, poisson_grid};
use super::SimError;
use crate::tickdata::TickSeries;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Correlated Brownian motions sampled on independent Poisson grids.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub lambda1: f64,
    pub lambda2: f64,
    pub rho: f64,
    pub t_end: f64,
    pub mesh: f64,
    pub seed: u64,
    pub n_reps: usize,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::InvalidConfig(m.to_string()));
        if !(self.lambda1 > 0.0 && self.lambda2 > 0.0) || !self.lambda1.is_finite() || !self.lambda2.is_finite() {
            return bad("intensities must be positive");
        }
        if !(-1.0..=1.0).contains(&self.rho) {
            return bad("rho must lie in [-1, 1]");
        }
        if !(self.mesh > 0.0 && self.mesh <= self.t_end) || !self.t_end.is_finite() {
            return bad("need 0 < mesh <= T");
        }
        if self.n_reps == 0 {
            return bad("n_reps must be >= 1");
        }
        Ok(())
    }

    /// Generator for replication `rep`: every replication owns a separate
    /// stream of the seeded generator.
    pub fn rng(&self, rep: u64) -> ChaCha8Rng {
        rep_rng(self.seed, rep)
    }
}

pub(crate) fn rep_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

/// Runs `f` for every replication in parallel and returns the results in
/// replication order.
pub fn replicate<T, F>(n_reps: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..n_reps as u64).into_par_iter().map(f).collect()
}

fn sample(path: &super::paths::BrownianPath, grid: Vec<f64>) -> TickSeries {
    let values = path.sample(&grid);
    TickSeries::new(grid, values).expect("Poisson grid is strictly increasing")
}

/// First replication of [`SimConfig`].
pub fn generate_poisson_pair(cfg: &SimConfig) -> Result<(TickSeries, TickSeries), SimError> {
    generate_poisson_pair_rep(cfg, 0)
}

pub fn generate_poisson_pair_rep(cfg: &SimConfig, rep: u64) -> Result<(TickSeries, TickSeries), SimError> {
    cfg.validate()?;
    let mut rng = cfg.rng(rep);
    let (b1, b2) = correlated_paths(0.0, cfg.t_end, cfg.mesh, cfg.rho, &mut rng);
    let gx = poisson_grid(cfg.lambda1, cfg.t_end, &mut rng);
    let gy = poisson_grid(cfg.lambda2, cfg.t_end, &mut rng);
    Ok((sample(&b1, gx), sample(&b2, gy)))
}

/// Synchronous correlated Brownian motions read at the exact epochs of two
/// real series. Each leg is rescaled to the realised variance per unit time
/// of its model and shifted to its first value; both are positive affine
/// maps, so correlations are unaffected.
pub fn generate_surrogate(
    real_x: &TickSeries,
    real_y: &TickSeries,
    rho: f64,
    mesh: f64,
    seed: u64,
) -> Result<(TickSeries, TickSeries), SimError> {
    if real_x.is_empty() || real_y.is_empty() {
        return Err(SimError::EmptyInput);
    }
    if !(mesh > 0.0) || !(-1.0..=1.0).contains(&rho) {
        return Err(SimError::InvalidConfig("need mesh > 0 and rho in [-1, 1]".into()));
    }
    let start = real_x.times()[0].min(real_y.times()[0]);
    let end = real_x.last_time().unwrap().max(real_y.last_time().unwrap());
    let mut rng = rep_rng(seed, 0);
    let (b1, b2) = correlated_paths(start, end.max(start + mesh), mesh, rho, &mut rng);
    let leg = |real: &TickSeries, path: &super::paths::BrownianPath| {
        let span = real.span();
        let scale = if span > 0.0 && real.sum_sq_increments() > 0.0 {
            (real.sum_sq_increments() / span).sqrt()
        } else {
            1.0
        };
        let v0 = real.values()[0];
        let base = path.at(real.times()[0]);
        let values = real.times().iter().map(|&t| v0 + scale * (path.at(t) - base)).collect();
        TickSeries::new(real.times().to_vec(), values).expect("same epochs")
    };
    Ok((leg(real_x, &b1), leg(real_y, &b2)))
}

/// Piecewise-constant lead time: `default` outside the listed windows,
/// `lag` inside `[start, end[`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagSchedule {
    pub default: f64,
    pub windows: Vec<(f64, f64, f64)>,
}

impl LagSchedule {
    pub fn constant(lag: f64) -> Self {
        Self {
            default: lag,
            windows: Vec::new(),
        }
    }

    pub fn at(&self, t: f64) -> f64 {
        self.windows
            .iter()
            .find(|(a, b, _)| t >= *a && t < *b)
            .map_or(self.default, |w| w.2)
    }

    pub fn max(&self) -> f64 {
        self.windows.iter().map(|w| w.2).fold(self.default, f64::max)
    }
}

/// Leader `B1(t)`; lagger `ρ B1(t − d) + √(1−ρ²) B2(t)` plus independent
/// Gaussian observation noise of standard deviation `noise`. Each leg is
/// observed on its own Poisson grid; the leader leads by `d`.
pub fn generate_lagged_pair(cfg: &SimConfig, lag_d: f64, noise: f64) -> Result<(TickSeries, TickSeries), SimError> {
    generate_scheduled_pair(cfg, 0, &LagSchedule::constant(lag_d), noise)
}

pub fn generate_lagged_pair_rep(
    cfg: &SimConfig,
    rep: u64,
    lag_d: f64,
    noise: f64,
) -> Result<(TickSeries, TickSeries), SimError> {
    generate_scheduled_pair(cfg, rep, &LagSchedule::constant(lag_d), noise)
}

pub fn generate_scheduled_pair(
    cfg: &SimConfig,
    rep: u64,
    schedule: &LagSchedule,
    noise: f64,
) -> Result<(TickSeries, TickSeries), SimError> {
    cfg.validate()?;
    let pad = schedule.max();
    if !(pad >= 0.0) || schedule.windows.iter().any(|w| w.2 < 0.0) || !(noise >= 0.0) {
        return Err(SimError::InvalidConfig("lags and noise must be >= 0".into()));
    }
    let mut rng = cfg.rng(rep);
    // The common factor starts `pad` seconds early so that B1(t - d) exists.
    let (b1, b_idio) = correlated_paths(-pad, cfg.t_end, cfg.mesh, 0.0, &mut rng);
    let gx = poisson_grid(cfg.lambda1, cfg.t_end, &mut rng);
    let gy = poisson_grid(cfg.lambda2, cfg.t_end, &mut rng);
    let ortho = (1.0 - cfg.rho * cfg.rho).max(0.0).sqrt();
    let base1 = b1.at(0.0);
    let base2 = b_idio.at(0.0);
    let leader: Vec<f64> = gx.iter().map(|&t| b1.at(t) - base1).collect();
    let normal = Normal::new(0.0, noise).expect("finite noise");
    let lagger: Vec<f64> = gy
        .iter()
        .map(|&t| {
            let common = b1.at(t - schedule.at(t)) - base1;
            let eps = if noise > 0.0 { normal.sample(&mut rng) } else { 0.0 };
            cfg.rho * common + ortho * (b_idio.at(t) - base2) + eps
        })
        .collect();
    Ok((
        TickSeries::new(gx, leader).expect("increasing grid"),
        TickSeries::new(gy, lagger).expect("increasing grid"),
    ))
}

/// Fair ±1 draws, reproducible from `seed`.
pub fn random_signs(n: usize, seed: u64) -> Vec<i8> {
    let mut rng = rep_rng(seed, 0);
    (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect()
}

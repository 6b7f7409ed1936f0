//! Synthetic data: correlated Brownian motions on Poisson grids, surrogate
//! and lead/lag generators, and the expected-covariance oracle.

mod generators;
mod oracle;
mod paths;

pub use generators::{
    generate_lagged_pair, generate_lagged_pair_rep, generate_poisson_pair, generate_poisson_pair_rep,
    generate_scheduled_pair, generate_surrogate, random_signs, replicate, LagSchedule, SimConfig,
};
pub use oracle::{
    expectation_brute_force, g_h, oracle_expected_cov, MonteCarloEstimate, OracleBranch, OracleValue,
    EQUAL_SWITCH, OVERFLOW_GUARD,
};
pub use paths::{correlated_paths, poisson_grid, BrownianPath};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid simulation parameters: {0}")]
    InvalidConfig(String),
    #[error("lag {lag} outside [0, {t_end}]")]
    LagOutOfRange { lag: f64, t_end: f64 },
    #[error("(λ1 + λ2) T = {0} exceeds the overflow guard")]
    OverflowGuard(f64),
    #[error("input series is empty")]
    EmptyInput,
}

//! Lead/lag analytics for asynchronously observed prices.
//!
//! Series are handled in tick time and compared with the lagged
//! Hayashi-Yoshida estimator. Around that core sit preprocessing, liquidity
//! statistics, simulation with a closed-form oracle, response functions,
//! a forecasting backtest and lead/lag networks.

pub mod forecast;
pub mod hycorr;
pub mod liquidity;
pub mod network;
pub mod numeric;
pub mod response;
pub mod simkit;
pub mod tickdata;

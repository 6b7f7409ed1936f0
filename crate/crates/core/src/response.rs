//! Average trajectory of a lagger's best quotes after a leader midquote move.

use crate::numeric::ExactSum;
use crate::tickdata::{QuoteTrack, TickSeries};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const THETA_SLACK: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ResponseError {
    #[error("tick sizes must be positive")]
    TickSize,
    #[error("lags must be non-negative, finite and increasing")]
    Lags,
    #[error("theta must be a non-zero multiple of half a tick")]
    ZeroTheta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseVariable {
    BidVsSelf,
    AskVsSelf,
    BidVsOpposite,
    AskVsOpposite,
    SpreadVsSelf,
}

impl ResponseVariable {
    pub const ALL: [ResponseVariable; 5] = [
        ResponseVariable::BidVsSelf,
        ResponseVariable::AskVsSelf,
        ResponseVariable::BidVsOpposite,
        ResponseVariable::AskVsOpposite,
        ResponseVariable::SpreadVsSelf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ResponseVariable::BidVsSelf => "bid_vs_self",
            ResponseVariable::AskVsSelf => "ask_vs_self",
            ResponseVariable::BidVsOpposite => "bid_vs_opposite",
            ResponseVariable::AskVsOpposite => "ask_vs_opposite",
            ResponseVariable::SpreadVsSelf => "spread_vs_self",
        }
    }
}

/// One trading day: the leader in tick time and the lagger's quote stream.
#[derive(Debug, Clone)]
pub struct ResponseDay {
    pub leader: TickSeries,
    pub lagger: QuoteTrack,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseConfig {
    /// Signed thresholds in leader half-ticks.
    pub thetas: Vec<i32>,
    pub lags: Vec<f64>,
    pub leader_tick: f64,
    pub lagger_tick: f64,
}

impl ResponseConfig {
    /// Thresholds `±1..±6` half-ticks, lags 0 to 10 s by 0.1 s.
    pub fn new(leader_tick: f64, lagger_tick: f64) -> Self {
        let thetas = (1..=6).flat_map(|i| [-i, i]).collect();
        Self {
            thetas,
            lags: (0..=100).map(|k| k as f64 / 10.0).collect(),
            leader_tick,
            lagger_tick,
        }
    }

    fn validate(&self) -> Result<(), ResponseError> {
        if !(self.leader_tick > 0.0 && self.lagger_tick > 0.0) {
            return Err(ResponseError::TickSize);
        }
        let ok = self.lags.iter().all(|l| l.is_finite() && *l >= 0.0)
            && self.lags.windows(2).all(|w| w[1] > w[0]);
        if !ok {
            return Err(ResponseError::Lags);
        }
        if self.thetas.contains(&0) {
            return Err(ResponseError::ZeroTheta);
        }
        Ok(())
    }

    /// Signed conditioning: `r >= theta` above zero, `r <= theta` below.
    fn selects(&self, theta: i32, r: f64) -> bool {
        let level = f64::from(theta) * 0.5 * self.leader_tick;
        if theta > 0 {
            r >= level * (1.0 - THETA_SLACK)
        } else {
            r <= level * (1.0 - THETA_SLACK)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseCurve {
    pub variable: ResponseVariable,
    pub theta_halfticks: i32,
    pub lags: Vec<f64>,
    /// Mean deviation in lagger ticks; `None` where no event survived.
    pub values: Vec<Option<f64>>,
    pub counts: Vec<usize>,
}

impl ResponseCurve {
    pub fn is_empty(&self) -> bool {
        self.counts.first().is_none_or(|&n| n == 0)
    }
}

/// Deviations of one (event, lag) sample, in lagger ticks.
fn deviations(bid0: f64, ask0: f64, bid: f64, ask: f64, tick: f64) -> [f64; 5] {
    let db = (bid - bid0) / tick;
    let da = (ask - ask0) / tick;
    [db, da, (bid - ask0) / tick, (ask - bid0) / tick, da - db]
}

struct Acc {
    sums: Vec<ExactSum>,
    counts: Vec<usize>,
}

impl Acc {
    fn new(n_theta: usize, n_lags: usize) -> Self {
        Self {
            sums: vec![ExactSum::new(); n_theta * n_lags * 5],
            counts: vec![0; n_theta * n_lags],
        }
    }

    fn merge(mut self, other: Acc) -> Acc {
        for (a, b) in self.sums.iter_mut().zip(other.sums) {
            a.add(b.value());
        }
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
        self
    }
}

/// Leader midquote changes `(time, return, next change time)`. The last
/// change has no observable censoring horizon and is dropped.
fn leader_events(leader: &TickSeries) -> Vec<(f64, f64, f64)> {
    let moves: Vec<(f64, f64)> = leader
        .increments()
        .iter()
        .zip(&leader.times()[1..])
        .filter(|(r, _)| **r != 0.0)
        .map(|(&r, &t)| (t, r))
        .collect();
    moves
        .windows(2)
        .map(|w| (w[0].0, w[0].1, w[1].0))
        .collect()
}

fn day_acc(day: &ResponseDay, cfg: &ResponseConfig) -> Acc {
    let nl = cfg.lags.len();
    let mut acc = Acc::new(cfg.thetas.len(), nl);
    for (t, r, next) in leader_events(&day.leader) {
        let chosen: Vec<usize> = (0..cfg.thetas.len())
            .filter(|&k| cfg.selects(cfg.thetas[k], r))
            .collect();
        if chosen.is_empty() {
            continue;
        }
        let Some(q0) = day.lagger.at_or_before(t) else {
            continue;
        };
        for (li, &lag) in cfg.lags.iter().enumerate() {
            if lag >= next - t {
                break;
            }
            let q = day.lagger.at_or_before(t + lag).expect("a quote exists at or before t");
            let dev = deviations(q0.bid, q0.ask, q.bid, q.ask, cfg.lagger_tick);
            for &k in &chosen {
                let cell = k * nl + li;
                acc.counts[cell] += 1;
                for (v, d) in dev.iter().enumerate() {
                    acc.sums[cell * 5 + v].add(*d);
                }
            }
        }
    }
    acc
}

/// Response curves for every threshold and variable, pooled over events of
/// all days. Trajectories stop at the leader's next midquote change.
pub fn response_curves(
    days: &[ResponseDay],
    cfg: &ResponseConfig,
) -> Result<Vec<ResponseCurve>, ResponseError> {
    cfg.validate()?;
    let accs: Vec<Acc> = days.par_iter().map(|d| day_acc(d, cfg)).collect();
    let acc = accs
        .into_iter()
        .fold(Acc::new(cfg.thetas.len(), cfg.lags.len()), Acc::merge);
    let nl = cfg.lags.len();
    let mut out = Vec::with_capacity(cfg.thetas.len() * 5);
    for (k, &theta) in cfg.thetas.iter().enumerate() {
        for (v, &variable) in ResponseVariable::ALL.iter().enumerate() {
            let counts: Vec<usize> = (0..nl).map(|li| acc.counts[k * nl + li]).collect();
            let values = (0..nl)
                .map(|li| {
                    let n = counts[li];
                    (n > 0).then(|| acc.sums[(k * nl + li) * 5 + v].value() / n as f64)
                })
                .collect();
            out.push(ResponseCurve {
                variable,
                theta_halfticks: theta,
                lags: cfg.lags.clone(),
                values,
                counts,
            });
        }
    }
    Ok(out)
}

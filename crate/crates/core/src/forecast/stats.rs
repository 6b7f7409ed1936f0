use super::{BacktestReport, ForecastError};
use crate::numeric::student_two_sided_pvalue;
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_10, LN_2, PI};

/// Two-sample Kolmogorov-Smirnov distance `sup |F_a - F_b|`.
pub fn ks_distance(a: &[f64], b: &[f64]) -> Result<f64, ForecastError> {
    if a.is_empty() || b.is_empty() {
        return Err(ForecastError::EmptySample);
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Kolmogorov survival function `Q(λ) = 2 Σ (-1)^{k-1} e^{-2k²λ²}` and its
/// base-10 logarithm, which stays finite after `Q` underflows.
pub fn kolmogorov_sf(lambda: f64) -> (f64, f64) {
    if lambda <= 0.0 {
        return (1.0, 0.0);
    }
    let p = if lambda < 1.18 {
        // Theta-function form, fast for small λ.
        let y = (-PI * PI / (8.0 * lambda * lambda)).exp();
        let s: f64 = (0..20).map(|k| y.powi((2 * k + 1) * (2 * k + 1))).sum();
        1.0 - (2.0 * PI).sqrt() / lambda * s
    } else {
        let mut s = 0.0;
        for k in 1..=100 {
            let kf = f64::from(k);
            let term = (-2.0 * kf * kf * lambda * lambda).exp();
            s += if k % 2 == 1 { term } else { -term };
            if term < 1e-300 {
                break;
            }
        }
        2.0 * s
    };
    let p = p.clamp(0.0, 1.0);
    let log10 = if p > 1e-300 {
        p.log10()
    } else {
        (LN_2 - 2.0 * lambda * lambda) / LN_10
    };
    (p, log10)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportComparison {
    pub ks_distance: f64,
    pub ks_pvalue_asymptotic: f64,
    pub ks_log10_pvalue: f64,
    /// Two-proportion statistic on the accuracies, `a` minus `b`.
    pub t_stat: f64,
    pub t_pvalue: f64,
}

/// KS test on per-trade returns and pooled two-proportion test on accuracies.
pub fn compare_reports(a: &BacktestReport, b: &BacktestReport) -> Result<ReportComparison, ForecastError> {
    let ra = a.per_trade_returns();
    let rb = b.per_trade_returns();
    let d = ks_distance(&ra, &rb)?;
    let (na, nb) = (ra.len() as f64, rb.len() as f64);
    let (p, log10) = kolmogorov_sf((na * nb / (na + nb)).sqrt() * d);
    let t = two_proportion_t(a.n_correct, a.n_trades, b.n_correct, b.n_trades);
    Ok(ReportComparison {
        ks_distance: d,
        ks_pvalue_asymptotic: p,
        ks_log10_pvalue: log10,
        t_stat: t,
        t_pvalue: student_two_sided_pvalue(t, na + nb - 2.0),
    })
}

pub fn two_proportion_t(ca: usize, na: usize, cb: usize, nb: usize) -> f64 {
    let (fa, fb) = (na as f64, nb as f64);
    let pa = ca as f64 / fa;
    let pb = cb as f64 / fb;
    let pooled = (ca + cb) as f64 / (fa + fb);
    let se = (pooled * (1.0 - pooled) * (1.0 / fa + 1.0 / fb)).sqrt();
    if pa == pb {
        0.0
    } else {
        (pa - pb) / se
    }
}

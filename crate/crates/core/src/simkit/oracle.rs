//! Expected lagged Hayashi-Yoshida covariance of Poisson-sampled Brownian
//! motions, in closed form and as a series.

use super::generators::{rep_rng, replicate};
use super::paths::poisson_grid;
use super::SimError;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

/// Beyond this value of `(λ1 + λ2) T` the closed form is not evaluated.
pub const OVERFLOW_GUARD: f64 = 500.0;
/// Relative intensity gap below which the equal-intensity formula is used.
pub const EQUAL_SWITCH: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleBranch {
    Unequal,
    Equal,
}

/// Expected covariance per unit time, `E(Ĉ(ℓ))`, at `|lag|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleValue {
    pub lag: f64,
    /// Closed-form value.
    pub expected_cov: f64,
    pub branch: OracleBranch,
    /// Independent evaluation of the truncated series in `g_h`.
    pub series_value: f64,
    /// Number of Poisson terms kept in the series.
    pub truncation_n: usize,
    /// Bound on the neglected series mass, `|ρ| P(N > truncation_n)`.
    pub tail_bound: f64,
}

impl OracleValue {
    pub fn discrepancy(&self) -> f64 {
        (self.expected_cov - self.series_value).abs()
    }
}

/// Negative lags are mapped to `|lag|` (the expectation is symmetric).
pub fn oracle_expected_cov(
    lambda1: f64,
    lambda2: f64,
    rho: f64,
    t_end: f64,
    lag: f64,
    tol: f64,
) -> Result<OracleValue, SimError> {
    if !(lambda1 > 0.0 && lambda2 > 0.0 && t_end > 0.0) || !(-1.0..=1.0).contains(&rho) {
        return Err(SimError::InvalidConfig("need λ1, λ2, T > 0 and ρ in [-1, 1]".into()));
    }
    if !(tol > 0.0) {
        return Err(SimError::InvalidConfig("tolerance must be > 0".into()));
    }
    let l = lag.abs();
    if !(l <= t_end) {
        return Err(SimError::LagOutOfRange { lag, t_end });
    }
    let a_t = (lambda1 + lambda2) * t_end;
    if a_t > OVERFLOW_GUARD {
        return Err(SimError::OverflowGuard(a_t));
    }
    let equal = (lambda1 - lambda2).abs() / (lambda1 + lambda2) < EQUAL_SWITCH;
    let branch = if equal { OracleBranch::Equal } else { OracleBranch::Unequal };
    if l == t_end {
        return Ok(OracleValue {
            lag: l,
            expected_cov: 0.0,
            branch,
            series_value: 0.0,
            truncation_n: 0,
            tail_bound: 0.0,
        });
    }
    let closed = if equal {
        closed_form_equal(0.5 * (lambda1 + lambda2), t_end, l)
    } else {
        closed_form_unequal(lambda1, lambda2, t_end, l)
    };
    let (series, n, tail) = series_form(lambda1, lambda2, t_end, l / t_end, tol / rho.abs().max(1e-300));
    Ok(OracleValue {
        lag: l,
        expected_cov: rho * closed,
        branch,
        series_value: rho * series,
        truncation_n: n,
        tail_bound: rho.abs() * tail,
    })
}

/// `e^{-(λ1+λ2)T} (S1 + S2 + S3 + S4)` with the prefactor folded into every
/// exponential so that no intermediate exceeds `e^{(λ1+λ2)T}`.
fn closed_form_unequal(l1: f64, l2: f64, t: f64, l: f64) -> f64 {
    let a = l1 + l2;
    let w = t - l;
    let aw = a * w;
    let p = (-a * t).exp();
    let pl = (-a * l).exp(); // e^{a w} · e^{-a T}
    let em1 = |x: f64| x.exp_m1();
    let d = (l1 - l2) * t;

    // S1
    let s1 = l1 / (l2 * d) * ((-l2 * t).exp() - (l1 * l - a * t).exp() * (1.0 + l1 * w) - 0.5 * (l1 * w).powi(2) * p)
        - l2 / (l1 * d) * ((-l1 * t).exp() - (l2 * l - a * t).exp() * (1.0 + l2 * w) - 0.5 * (l2 * w).powi(2) * p)
        + (l1 * em1(l1 * l) - l2 * em1(l2 * l)) / ((l1 * l1 - l2 * l2) * t) * (p + pl * (aw - 1.0))
        + ((l2 * l2 / l1) * em1(l2 * l) - (l1 * l1 / l2) * em1(l1 * l)) / ((l1 * l1 - l2 * l2) * t)
            * (pl - p * (1.0 + aw))
        - (l1 * l1 + l2 * l2) / (l1 * l2 * a * t) * (pl - p * (1.0 + aw + 0.5 * aw * aw))
        + (pl * (aw - 2.0) + p * (aw + 2.0)) / (a * t);

    // S2, using (e^{λw}−1)(e^{λℓ}−1) + e^{λw} − 1 − λw = e^{λT} − e^{λℓ} − λw
    let inner = |lam: f64| (lam * t - a * t).exp() - (lam * l - a * t).exp() - lam * w * p;
    let s2 = (pl - p) / d * (em1(l1 * l) - (l2 / l1) * em1(l2 * l))
        - (inner(l1) - (l2 / l1) * inner(l2)) / d
        + (pl - p * (1.0 + aw)) / (l1 * t);
    let s3 = l1 / l2 * s2;
    let s4 = ((-l2 * t).exp() - (-l1 * t).exp()) / d;
    s1 + s2 + s3 + s4
}

/// `e^{-2λT} (S1 + 2 S2 + S4)`, the equal-intensity limit.
fn closed_form_equal(lam: f64, t: f64, l: f64) -> f64 {
    let w = t - l;
    let lt = lam * t;
    let lw = lam * w;
    let p = (-2.0 * lt).exp();
    let pl = (-2.0 * lam * l).exp();
    let e_l = (lam * l - 2.0 * lt).exp(); // e^{λℓ} · P
    let e_t = (-lt).exp(); // e^{λT} · P

    let s1 = e_t * (2.0 / lt + 1.0)
        - e_l * (2.0 / lt + l / t + (1.0 - l / t) * (3.0 + lam * l))
        - 2.0 * lam * w * w / t * p
        + (p + pl * (2.0 * lw - 1.0)) * (((lam * l).exp() * (1.0 + lam * l) - 1.0) / (2.0 * lt))
        + (pl - p * (1.0 + 2.0 * lw)) * ((3.0 - (lam * l).exp() * (3.0 + lam * l)) / (2.0 * lt))
        - (pl - p * (1.0 + 2.0 * lw + 2.0 * lw * lw)) / lt
        + (pl * (lw - 1.0) + p * (lw + 1.0)) / lt;
    let s2 = (pl - p) / t * ((lam * l).exp() * (l + 1.0 / lam) - 1.0 / lam)
        + (pl - p * (1.0 + 2.0 * lw)) / lt
        - e_t * (1.0 + 1.0 / lt)
        + e_l / t * (1.0 / lam + l)
        + 2.0 * (1.0 - l / t) * p;
    let s4 = e_t;
    s1 + 2.0 * s2 + s4
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n + 1];
    for k in 1..=n {
        v[k] = v[k - 1] + (k as f64).ln();
    }
    v
}

/// `g_h(n, i) = (n−1)! Σ_{k≤i} h^k (1−h)^{n−k} / (k!(n−k)!)`, i.e. the
/// binomial(n, h) distribution function at `i`, divided by `n`.
pub fn g_h(n: usize, i: usize, h: f64) -> Result<f64, SimError> {
    if n == 0 || i > n || !(0.0..1.0).contains(&h) {
        return Err(SimError::InvalidConfig(format!("g_h domain: n = {n}, i = {i}, h = {h}")));
    }
    Ok(g_row(n, h, &ln_factorials(n))[i])
}

// g_h(n, i) for i = 0..=n.
fn g_row(n: usize, h: f64, lf: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut cdf = 0.0;
    if h == 0.0 {
        return vec![1.0 / n as f64; n + 1];
    }
    let (lh, lq) = (h.ln(), (-h).ln_1p());
    for k in 0..=n {
        let lp = lf[n] - lf[k] - lf[n - k] + k as f64 * lh + (n - k) as f64 * lq;
        cdf += lp.exp();
        out.push(cdf.min(1.0) / n as f64);
    }
    out
}

/// Series in `g_h` weighted by the Poisson law of the merged grid. Every
/// conditional term lies in `[0, 1]`, so the neglected mass is bounded by
/// the Poisson upper tail.
fn series_form(l1: f64, l2: f64, t: f64, h: f64, tol: f64) -> (f64, usize, f64) {
    let a = l1 + l2;
    let mu = a * t;
    let (p1, p2) = (l1 / a, l2 / a);
    let ln_w = |n: usize| (n - 1) as f64 * mu.ln() - mu - ln_gamma(n as f64);
    // Upper tail P(N − 1 ≥ m) bounded by a geometric series once m > μ.
    let tail_from = |n: usize| {
        let m = (n - 1) as f64;
        if m <= mu + 1.0 {
            f64::INFINITY
        } else {
            ln_w(n).exp() / (1.0 - mu / (m + 1.0))
        }
    };
    let mut n_max = 1;
    while tail_from(n_max + 1) > tol {
        n_max += 1;
    }
    let lf = ln_factorials(n_max);
    // F(d) = Σ_{b=1}^{d} p1^{d−b+1} p2^b, G(i) = Σ_{k=1}^{i} p1^{i−k} p2^k,
    // H(m) = Σ_{j=0}^{m−1} p1^{m−j} p2^j, K(n) = Σ_{k=1}^{n} p1^{n−k} p2^{k−1}.
    let mut f = vec![0.0; n_max + 1];
    let mut g = vec![0.0; n_max + 1];
    let mut hh = vec![0.0; n_max + 1];
    let mut kk = vec![0.0; n_max + 1];
    let mut p2_pow = 1.0; // p2^{k−1}
    for k in 1..=n_max {
        let p2k = p2_pow * p2;
        f[k] = p1 * f[k - 1] + p1 * p2k;
        g[k] = p1 * g[k - 1] + p2k;
        hh[k] = p1 * hh[k - 1] + p1 * p2_pow;
        kk[k] = p1 * kk[k - 1] + p2_pow;
        p2_pow = p2k;
    }
    let mut total = 0.0;
    for n in 1..=n_max {
        let row = g_row(n, h, &lf);
        let mut a_n = kk[n] / n as f64;
        for d in 1..n.saturating_sub(1) {
            a_n += (n - 1 - d) as f64 * row[d] * f[d];
        }
        for i in 1..n {
            a_n += row[i] * (g[i] + hh[i]);
        }
        total += ln_w(n).exp() * a_n;
    }
    (total, n_max, tail_from(n_max + 1))
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_reps: usize,
}

impl MonteCarloEstimate {
    pub fn from_samples(v: &[f64]) -> Self {
        let n = v.len() as f64;
        let mean = crate::numeric::exact_sum(v.iter().copied()) / n;
        let var = if v.len() > 1 {
            crate::numeric::exact_sum(v.iter().map(|x| (x - mean) * (x - mean))) / (n - 1.0)
        } else {
            0.0
        };
        Self {
            mean,
            stderr: (var / n).sqrt(),
            n_reps: v.len(),
        }
    }
}

/// `ρ E(Σ_{i,j} 1{ℓ < s_j − t_{i−1}} |]t_{i−1}, t_i] ∩ ]s_{j−1}, s_j]|) / T`
/// from simulated Poisson grids only.
pub fn expectation_brute_force(
    lambda1: f64,
    lambda2: f64,
    rho: f64,
    t_end: f64,
    lag: f64,
    n_reps: usize,
    seed: u64,
) -> Result<MonteCarloEstimate, SimError> {
    if !(lambda1 > 0.0 && lambda2 > 0.0 && t_end > 0.0) || n_reps == 0 {
        return Err(SimError::InvalidConfig("need λ1, λ2, T > 0 and n_reps >= 1".into()));
    }
    let l = lag.abs();
    let samples = replicate(n_reps, |rep| {
        let mut rng = rep_rng(seed, rep);
        let t = poisson_grid(lambda1, t_end, &mut rng);
        let s = poisson_grid(lambda2, t_end, &mut rng);
        rho * overlap_sum(&t, &s, l) / t_end
    });
    Ok(MonteCarloEstimate::from_samples(&samples))
}

// Merged sweep over the overlapping interval pairs.
fn overlap_sum(t: &[f64], s: &[f64], lag: f64) -> f64 {
    let (mut i, mut j) = (1, 1);
    let mut acc = 0.0;
    while i < t.len() && j < s.len() {
        let ov = t[i].min(s[j]) - t[i - 1].max(s[j - 1]);
        if ov > 0.0 && lag < s[j] - t[i - 1] {
            acc += ov;
        }
        if t[i] < s[j] {
            i += 1;
        } else if s[j] < t[i] {
            j += 1;
        } else {
            i += 1;
            j += 1;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TOL: f64 = 1e-13;

    #[test]
    fn forced_values() {
        for (l1, l2, t) in [(0.3, 0.5, 20.0), (0.05, 1.0, 40.0), (0.4, 0.4, 20.0), (2.0, 3.0, 90.0)] {
            let v0 = oracle_expected_cov(l1, l2, 0.8, t, 0.0, TOL).unwrap();
            assert!((v0.expected_cov - 0.8).abs() < 1e-9, "{l1} {l2}: {}", v0.expected_cov);
            assert!((v0.series_value - 0.8).abs() < 1e-9);
            assert_eq!(oracle_expected_cov(l1, l2, 0.8, t, t, TOL).unwrap().expected_cov, 0.0);
        }
    }

    #[test]
    fn reference_values() {
        // Independent evaluation of the same series in double precision.
        let refs = [(0.5, 0.9794563456325635), (2.0, 0.7834219843607587), (5.0, 0.3612847172075525), (10.0, 0.06794265555271044)];
        for (l, r) in refs {
            let v = oracle_expected_cov(0.3, 0.5, 1.0, 20.0, l, TOL).unwrap();
            assert!((v.expected_cov - r).abs() < 1e-12, "{l}: {}", v.expected_cov);
            assert!(v.discrepancy() < 1e-12);
            assert!(v.tail_bound <= TOL);
        }
    }

    #[test]
    fn equal_branch_continuity() {
        for l in [0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 19.9] {
            let eq = oracle_expected_cov(0.4, 0.4, 1.0, 20.0, l, TOL).unwrap();
            let un = oracle_expected_cov(0.4, 0.4 * (1.0 + 1e-6), 1.0, 20.0, l, TOL).unwrap();
            assert_eq!(eq.branch, OracleBranch::Equal);
            assert_eq!(un.branch, OracleBranch::Unequal);
            assert!((eq.expected_cov - un.expected_cov).abs() <= 1e-4 * eq.expected_cov.abs(), "{l}");
            assert!(eq.discrepancy() < 1e-10);
        }
    }

    #[test]
    fn guards() {
        assert!(matches!(oracle_expected_cov(1.0, 1.0, 0.5, 300.0, 1.0, TOL), Err(SimError::OverflowGuard(_))));
        assert!(matches!(oracle_expected_cov(0.3, 0.5, 0.5, 20.0, 21.0, TOL), Err(SimError::LagOutOfRange { .. })));
        let neg = oracle_expected_cov(0.3, 0.5, 0.5, 20.0, -3.0, TOL).unwrap();
        let pos = oracle_expected_cov(0.3, 0.5, 0.5, 20.0, 3.0, TOL).unwrap();
        assert_eq!(neg, pos);
    }

    #[test]
    fn near_guard_is_finite() {
        let v = oracle_expected_cov(2.0, 2.9, 1.0, 100.0, 0.0, TOL).unwrap();
        assert!((v.expected_cov - 1.0).abs() < 1e-9);
        let v = oracle_expected_cov(2.0, 2.9, 1.0, 100.0, 1.0, TOL).unwrap();
        assert!(v.expected_cov.is_finite() && v.discrepancy() < 1e-9);
    }

    #[test]
    fn g_h_values() {
        for n in 1..=50 {
            for k in 0..10 {
                let h = k as f64 / 10.0;
                assert!((g_h(n, n, h).unwrap() - 1.0 / n as f64).abs() < 1e-12);
            }
            assert_eq!(g_h(n, 0, 0.0).unwrap(), 1.0 / n as f64);
        }
        assert!((g_h(1, 0, 0.3).unwrap() - 0.7).abs() < 1e-15);
        assert!(g_h(0, 0, 0.1).is_err());
        assert!(g_h(3, 4, 0.1).is_err());
        assert!(g_h(3, 1, 1.0).is_err());
    }

    #[test]
    fn brute_force_identities() {
        let z = expectation_brute_force(0.3, 0.5, 0.8, 20.0, 0.0, 200, 1).unwrap();
        assert!((z.mean - 0.8).abs() < 1e-12 && z.stderr < 1e-12);
        let t = expectation_brute_force(0.3, 0.5, 0.8, 20.0, 20.0, 50, 1).unwrap();
        assert_eq!((t.mean, t.stderr), (0.0, 0.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn linear_in_rho(rho in -1.0f64..1.0, lag in 0.0f64..20.0) {
            let a = oracle_expected_cov(0.3, 0.5, rho, 20.0, lag, TOL).unwrap().expected_cov;
            let b = oracle_expected_cov(0.3, 0.5, rho / 2.0, 20.0, lag, TOL).unwrap().expected_cov;
            prop_assert!((a - 2.0 * b).abs() <= 1e-14);
        }

        #[test]
        fn closed_form_matches_series(l1 in 0.05f64..1.0, l2 in 0.05f64..1.0, t in 10.0f64..50.0, hf in 0.0f64..0.99) {
            let v = oracle_expected_cov(l1, l2, 1.0, t, hf * t, TOL).unwrap();
            prop_assert!(v.discrepancy() < 1e-8, "{:?}", v);
            prop_assert!(v.expected_cov >= -1e-12 && v.expected_cov <= 1.0 + 1e-12);
        }
    }
}

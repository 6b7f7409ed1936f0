use leadlag::forecast::{
    backtest, calibrate, coarse_tick_sweep, BacktestConfig, CalibrationConfig, Execution, ForecastDay,
    ForecasterParams, ForecasterRegistry,
};
use leadlag::hycorr::LagGrid;
use leadlag::simkit::{generate_lagged_pair_rep, replicate, SimConfig};
use leadlag::tickdata::{QuoteTrack, TickThreshold};
use statrs::distribution::{ContinuousCDF, StudentsT};

const TICK: f64 = 0.01;

/// Both legs rounded to a 0.01 tick around 100 and taken in tick time; the
/// lagger quoted three ticks wide.
fn days(n: usize, seed: u64, lag: f64, rho: f64, t_end: f64) -> Vec<ForecastDay> {
    let cfg = SimConfig {
        lambda1: 10.0,
        lambda2: 2.0,
        rho,
        t_end,
        mesh: 0.05,
        seed,
        n_reps: n,
    };
    replicate(n, |r| {
        let (x, y) = generate_lagged_pair_rep(&cfg, r, lag, 0.0).unwrap();
        let price = |v: f64| ((100.0 + TICK * v) / TICK).round() * TICK;
        let x = x.map_values(price).coarsen(TickThreshold::AnyChange, TICK);
        let y = y.map_values(price).coarsen(TickThreshold::AnyChange, TICK);
        let q = QuoteTrack::around(&y, 3.0 * TICK);
        ForecastDay::new(x, y).with_quotes(q)
    })
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn calibrated_betas_peak_at_the_true_lag() {
    let d = days(20, 31, 0.6, 0.8, 3600.0);
    let m = calibrate(&d, &CalibrationConfig::default()).unwrap();
    assert!(!m.is_empty());
    let (k, _) = m.betas.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    assert!((m.lags[k] - 0.6).abs() <= 0.2, "peak at {} of {:?}", m.lags[k], m.lags);
    assert!(m.mean_tick_duration_s > 0.0);
}

#[test]
fn calibration_is_bitwise_deterministic() {
    let d = days(20, 32, 0.6, 0.8, 1800.0);
    let cfg = CalibrationConfig::default();
    let (a, b) = (calibrate(&d, &cfg).unwrap(), calibrate(&d, &cfg).unwrap());
    assert_eq!(a, b);
    let bits = |m: &leadlag::forecast::ForecastModel| m.betas.iter().map(|b| b.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
}

/// With independent legs and a single candidate lag, the model is empty iff
/// `|mean| < 1.96 σ/√D` with the population σ, i.e. iff the one-sample t
/// statistic satisfies `|t| < 1.96 √((D-1)/D)`.
#[test]
fn null_calibration_rate_matches_student_t() {
    let window = 20;
    let trials = 600;
    let d = days(window * trials, 33, 0.0, 0.0, 120.0);
    let cfg = CalibrationConfig {
        window_days: window,
        grid: LagGrid::symmetric(&[1.0]).unwrap(),
        ..CalibrationConfig::default()
    };
    let empty = d
        .chunks(window)
        .filter(|c| calibrate(c, &cfg).unwrap().is_empty())
        .count();
    let df = (window - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, df).unwrap();
    let bound = 1.96 * (df / window as f64).sqrt();
    let expected = t.cdf(bound) - t.cdf(-bound);
    let rate = empty as f64 / trials as f64;
    let se = (expected * (1.0 - expected) / trials as f64).sqrt();
    assert!((rate - expected).abs() <= 3.0 * se, "rate {rate} vs {expected} +- {se}");
}

#[test]
fn lead_lag_beats_the_autocorrelation_benchmark() {
    let d = days(24, 34, 0.6, 0.8, 3600.0);
    let reg = ForecasterRegistry::default();
    let p = ForecasterParams::default();
    let cfg = BacktestConfig::default();
    let ll = backtest(&d, reg.build("leadlag", &p).unwrap().as_ref(), &cfg).unwrap();
    let ac = backtest(&d, reg.build("autocorrelation", &p).unwrap().as_ref(), &cfg).unwrap();
    let (a, b) = (ll.accuracy.unwrap(), ac.accuracy.unwrap_or(0.0));
    assert!(a > 0.55 && a > b, "lead/lag {a} vs autocorrelation {b}");
}

#[test]
fn coarse_tick_time_degrades_and_the_spread_eats_the_profit() {
    let d = days(24, 35, 0.6, 0.8, 3600.0);
    let f = ForecasterRegistry::default().build("leadlag", &ForecasterParams::default()).unwrap();
    let thetas: Vec<f64> = (1..=6).map(|i| f64::from(i) / 2.0).collect();

    let mid = BacktestConfig::default();
    let sweep = coarse_tick_sweep(&d, &thetas, TICK, TICK, f.as_ref(), &mid);
    let acc: Vec<f64> = sweep.iter().map(|p| p.report.as_ref().unwrap().accuracy.unwrap()).collect();
    assert!(slope(&thetas, &acc) <= 0.0, "{acc:?}");
    let base = backtest(&d, f.as_ref(), &mid).unwrap();
    let first = sweep[0].report.as_ref().unwrap();
    assert_eq!((first.n_trades, first.n_correct), (base.n_trades, base.n_correct));
    assert_eq!(first.daily_returns, base.daily_returns);

    let cross = BacktestConfig {
        execution: Execution::CrossSpread,
        ..mid
    };
    for p in coarse_tick_sweep(&d, &thetas, TICK, TICK, f.as_ref(), &cross) {
        let r = p.report.unwrap();
        let median = r.median_return_bp.unwrap();
        assert!(median < 0.0, "theta {}: median {median} bp", p.theta);
    }
}

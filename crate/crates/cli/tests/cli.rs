mod common;

use common::{code, dataset, fixture, leadlag, read_json};
use std::path::Path;
use tempfile::TempDir;

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn hand_args(out: &Path) -> Vec<String> {
    vec![
        "--out".into(),
        s(out).into(),
        "xcorr".into(),
        "--x".into(),
        s(&fixture("hand_x.ticks.csv")).into(),
        "--y".into(),
        s(&fixture("hand_y.ticks.csv")).into(),
        "--lags".into(),
        "1".into(),
    ]
}

fn run(args: &[String]) -> std::process::Output {
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    leadlag(&refs)
}

#[test]
fn xcorr_on_hand_fixture() {
    let tmp = TempDir::new().unwrap();
    let o = run(&hand_args(tmp.path()));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(&tmp.path().join("xcorr.json"));
    let zero = v["grid"].as_array().unwrap().iter().position(|l| l == 0.0).unwrap();
    let rho = v["rho_mean"][zero].as_f64().unwrap();
    assert!((rho + 2.0 / 10f64.sqrt()).abs() < 1e-11, "{rho}");
    assert_eq!(v["n_days"], 1);

    let mut args = hand_args(tmp.path());
    args.splice(0..0, ["--format".to_string(), "csv".to_string()]);
    assert_eq!(code(&run(&args)), 0);
    let csv = std::fs::read_to_string(tmp.path().join("xcorr.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("lag_s,rho,ci95,n_days"));
    assert!(csv.contains("\n0,-0.632455532034,0,1\n"), "{csv}");
}

#[test]
fn manifest_hashes_inputs_and_artifacts() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&run(&hand_args(tmp.path()))), 0);
    let m = read_json(&tmp.path().join("manifest.json"));
    assert_eq!(m["subcommand"], "xcorr");
    assert_eq!(m["inputs"].as_array().unwrap().len(), 2);
    let art = &m["artifacts"][0];
    assert_eq!(art["path"], "xcorr.json");
    assert_eq!(art["sha256"].as_str().unwrap().len(), 64);
    assert_eq!(m["parameters"]["grid"]["lags"][0], 1.0);
}

#[test]
fn dry_run_writes_nothing() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let mut args = hand_args(&out);
    args.insert(0, "--dry-run".into());
    let o = run(&args);
    assert_eq!(code(&o), 0);
    assert!(!out.exists());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["dry_run"], true);
}

#[test]
fn exit_codes() {
    let tmp = TempDir::new().unwrap();
    let out = s(tmp.path());
    assert_eq!(code(&leadlag(&["frobnicate"])), 1);
    assert_eq!(code(&leadlag(&["--help"])), 0);
    assert_eq!(code(&leadlag(&["--out", out, "xcorr", "--x", "/no/such.csv", "--y", "/no/such.csv"])), 1);

    let bad = tmp.path().join("bad.ticks.csv");
    std::fs::write(&bad, "ts_ms,mid\n0,1\nzzz,2\n").unwrap();
    assert_eq!(code(&leadlag(&["--out", out, "xcorr", "--x", s(&bad), "--y", s(&bad)])), 2);

    let guard = leadlag(&[
        "--out", out, "oracle", "--lambda1", "10", "--lambda2", "10", "--t-end", "100", "--lag", "0",
    ]);
    assert_eq!(code(&guard), 3, "{}", String::from_utf8_lossy(&guard.stderr));
}

#[test]
fn oracle_at_lag_zero_returns_rho() {
    let tmp = TempDir::new().unwrap();
    let o = leadlag(&["--out", s(tmp.path()), "oracle", "--rho", "0.55", "--lag", "0", "--mc-reps", "200"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(&tmp.path().join("oracle.json"));
    assert!((v[0]["expected_cov"].as_f64().unwrap() - 0.55).abs() < 1e-9);
    assert_eq!(v[0]["monte_carlo"]["n_reps"], 200);
}

#[test]
fn simulate_writes_both_estimators() {
    let tmp = TempDir::new().unwrap();
    let o = leadlag(&[
        "--format", "csv", "--out", s(tmp.path()), "simulate", "--t-end", "600", "--reps", "4",
        "--lambda2", "0.2,0.05", "--n-lags", "6",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary = std::fs::read_to_string(tmp.path().join("simulate_summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 5);
    assert!(summary.contains("previous-tick") && summary.contains("hayashi-yoshida"));
    let curves = std::fs::read_to_string(tmp.path().join("simulate_curves.csv")).unwrap();
    assert_eq!(curves.lines().count(), 1 + 2 * 2 * 13);
}

#[test]
fn analyses_on_a_synthetic_dataset() {
    let tmp = TempDir::new().unwrap();
    let data = tmp.path().join("data");
    dataset(&data, 6);
    let d = s(&data);
    let out = |name: &str| tmp.path().join(name);

    let o = leadlag(&["--out", s(&out("ingest")), "ingest", "--data", d]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let ticks = out("ingest").join("2024-01-02/AAA.ticks.csv");
    assert!(leadlag::tickdata::parse_ticks(&ticks).unwrap().len() > 1000);

    let o = leadlag(&["--format", "csv", "--out", s(&out("stats")), "stats", "--data", d]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stats = std::fs::read_to_string(out("stats").join("stats.csv")).unwrap();
    assert!(stats.starts_with(
        "ric,mean_intertrade_s,tick_over_mid_bp,spread_in_ticks,unit_spread_freq,trade_through_freq,vol_in_ticks,turnover_per_trade,currency,n_days\n"
    ));
    assert!(stats.contains("\nAAA,") && stats.contains(",EUR,6\n"));

    let o = leadlag(&["--out", s(&out("xcorr")), "xcorr", "--data", d, "--pair", "AAA,BBB", "--max-lag", "10"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(&out("xcorr").join("xcorr.json"));
    assert!(v["llr"].as_f64().unwrap() > 1.0);
    assert!((v["reverse"]["llr"].as_f64().unwrap() * v["llr"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!((v["max_lag_s"].as_f64().unwrap() - 0.6).abs() <= 0.3, "{}", v["max_lag_s"]);

    let o = leadlag(&["--out", s(&out("intraday")), "intraday", "--data", d, "--pair", "AAA,BBB", "--max-lag", "10"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read_json(&out("intraday").join("intraday.json"))["slices"].as_array().unwrap().len(), 6);

    let o = leadlag(&[
        "--out", s(&out("threshold")), "threshold", "--data", d, "--pair", "AAA,BBB", "--halfticks", "0,2",
        "--max-lag", "5",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read_json(&out("threshold").join("threshold.json"))["curves"].as_array().unwrap().len(), 2);

    let o = leadlag(&[
        "--format", "csv", "--out", s(&out("response")), "response", "--data", d, "--leader", "AAA", "--lagger",
        "BBB", "--thetas", "-2,2", "--max-lag", "2",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = std::fs::read_to_string(out("response").join("response.csv")).unwrap();
    assert!(r.starts_with("variable,theta_halfticks,lag_s,mean_dev_ticks,n\n"));
    assert_eq!(r.lines().count(), 1 + 5 * 2 * 21);

    let o = leadlag(&[
        "--out", s(&out("backtest")), "backtest", "--data", d, "--leader", "AAA", "--lagger", "BBB", "--window", "4",
        "--max-lag", "10", "--coarse-halfticks", "1,4",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let b = read_json(&out("backtest").join("backtest.json"));
    assert!(b["report"]["accuracy"].as_f64().unwrap() > 0.5);
    assert_eq!(b["benchmarks"].as_array().unwrap().len(), 2);
    assert_eq!(b["coarse"].as_array().unwrap().len(), 2);
    let trades = std::fs::read_to_string(out("backtest").join("trades.csv")).unwrap();
    assert!(trades.starts_with("epoch_ts,forecast,realized_sign,return,execution,day\n"));

    let o = leadlag(&["--out", s(&out("surrogate")), "surrogate", "--data", d, "--pair", "AAA,BBB"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let real = leadlag::tickdata::parse_ticks(&ticks).unwrap();
    let sur = leadlag::tickdata::parse_ticks(&out("surrogate").join("2024-01-02/AAA.ticks.csv")).unwrap();
    assert_eq!(real.len(), sur.len());

    let o = leadlag(&["--out", s(&out("network")), "network", "--data", d, "--max-lag", "10"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let edges = std::fs::read_to_string(out("network").join("edges.csv")).unwrap();
    assert_eq!(edges.lines().count(), 3);
    assert!(edges.contains("AAA,BBB,"), "{edges}");
    assert!(std::fs::read_to_string(out("network").join("network.dot")).unwrap().contains("AAA"));
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let data = tmp.path().join("data");
    dataset(&data, 5);
    let mut manifests = Vec::new();
    for (k, jobs) in ["1", "3"].iter().enumerate() {
        let out = tmp.path().join(format!("out{k}"));
        let o = leadlag(&[
            "--jobs", jobs, "--seed", "9", "--out", s(&out), "backtest", "--data", s(&data), "--leader", "AAA",
            "--lagger", "BBB", "--window", "3", "--max-lag", "5",
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        manifests.push(std::fs::read(out.join("manifest.json")).unwrap());
    }
    assert_eq!(manifests[0], manifests[1]);
}

#[test]
fn unknown_instrument_is_a_usage_error() {
    let tmp = TempDir::new().unwrap();
    let data = tmp.path().join("data");
    dataset(&data, 1);
    let o = leadlag(&["--out", s(tmp.path()), "xcorr", "--data", s(&data), "--pair", "AAA,ZZZ"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("ZZZ"));
}

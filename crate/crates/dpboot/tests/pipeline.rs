use dpboot::config::Method;
use dpboot::ingest::read_csv;
use dpboot::run::{run_dataset, RunConfig};
use dpboot_core::mechanisms::{BoundsPolicy, Dataset, StatisticId};
use serde_json::Value;
use std::io::Write;
use std::process::Command;

fn csv_file(body: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(body.as_bytes()).unwrap();
    f
}

fn dpboot(args: &[&str]) -> Value {
    let out = Command::new(env!("CARGO_BIN_EXE_dpboot")).args(args).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn noiseless_run_on_two_rows_collapses_near_the_mean() {
    let f = csv_file("x\n0.25\n0.75\n");
    let path = f.path().to_str().unwrap();
    let r = dpboot(&[
        "run", "--csv", path, "--columns", "x", "--mu", "inf", "--B", "1", "--methods", "dp_bootstrap",
        "--truth", "0.5",
    ]);
    assert_eq!(r["n"], 2);
    assert_eq!(r["sample_value"], 0.5);
    let ci = &r["methods"][0]["intervals"][0];
    let (lo, hi) = (ci["lower"].as_f64().unwrap(), ci["upper"].as_f64().unwrap());
    assert_eq!(lo, hi);
    assert!([0.25, 0.5, 0.75].contains(&lo));
    assert!(r["methods"][0]["covered"].is_array());
}

#[test]
fn missing_rows_are_dropped_and_reported() {
    let f = csv_file("x,y\n0.1,0.2\nNA,0.3\n0.5,0.9\n0.7,\n0.3,0.4\n");
    let t = read_csv(f.path(), &["x".into(), "y".into()]).unwrap();
    assert_eq!(t.rows(), 3);
    assert_eq!(t.dropped, 2);
    let r = dpboot(&[
        "run", "--csv", f.path().to_str().unwrap(), "--columns", "x,y", "--statistic", "covariance", "--B", "20",
        "--methods", "dp_bootstrap,noisycov",
    ]);
    assert_eq!(r["dropped_rows"], 2);
    assert_eq!(r["methods"].as_array().unwrap().len() + r["failures"].as_array().unwrap().len(), 2);
}

#[test]
fn run_is_reproducible_for_a_seed() {
    let xs: Vec<f64> = (0..200).map(|i| (i as f64 * 0.013).fract()).collect();
    let data = Dataset::new(vec![xs], vec![(0.0, 1.0)], BoundsPolicy::Reject).unwrap();
    let cfg = RunConfig {
        b: 60,
        seed: 9,
        methods: vec![Method::Bootstrap, Method::DpBootstrap, Method::DpStandard, Method::NoisyVar],
        truth: Some(0.5),
        nsim: 200,
        ..Default::default()
    };
    let a = run_dataset(&data, 0, &cfg).unwrap();
    let b = run_dataset(&data, 0, &cfg).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert!(a.failures.is_empty(), "{:?}", a.failures);
    assert_eq!(a.methods.len(), 4);
    for m in &a.methods {
        let ci = &m.intervals[0];
        assert!(ci.lower <= ci.upper, "{:?}", m.method);
    }
}

#[test]
fn variance_rejects_covariance_baseline() {
    let data = Dataset::unit(vec![vec![0.1, 0.4, 0.9]]).unwrap();
    let cfg = RunConfig { statistic: StatisticId::Variance, methods: vec![Method::NoisyCov], ..Default::default() };
    assert!(run_dataset(&data, 0, &cfg).is_err());
}

#[test]
fn curves_cli_writes_alpha_beta_csv() {
    let out = Command::new(env!("CARGO_BIN_EXE_dpboot"))
        .args(["curves", "--kind", "boot_bound", "--points", "11"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("alpha,beta"));
    let rows: Vec<&str> = lines.collect();
    // 11 intervals on [0, 1], both endpoints included
    assert_eq!(rows.len(), 12);
    assert!(rows[0].starts_with("0,"));
    assert!(rows[11].starts_with("1,"));
}

use std::process::{Command, Output};

fn eigenbond(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eigenbond")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().filter(|l| !l.starts_with('#')).map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn price_preset_matches_callable_table() {
    let o = eigenbond(&["price", "--preset", "swiss1987"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("# eigenbond price model=CIR"));
    let rows = csv_rows(&text);
    assert_eq!(rows[0][..3], ["rate", "state", "value"]);
    assert_eq!(rows.len(), 11);
    let gold = eigenbond::benchmark::Config::Cir.callable_values();
    for (row, g) in rows[1..].iter().zip(gold) {
        let v: f64 = row[2].parse().unwrap();
        assert!((v - g).abs() <= 5e-6, "{v} vs {g}");
    }
}

#[test]
fn csv_output_is_stable() {
    let a = stdout(&eigenbond(&["price", "--put", "--model", "vasicek", "--rates", "0.02,0.07"]));
    let b = stdout(&eigenbond(&["price", "--put", "--model", "vasicek", "--rates", "0.02,0.07"]));
    assert_eq!(a, b);
    assert!(csv_rows(&a)[0].iter().any(|h| h == "put_tau20"));
}

#[test]
fn config_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let out = dir.path().join("out.csv");
    let json = r#"{
        "model": {"kind": "cir", "kappa": 0.14294371, "theta": 0.133976855, "sigma": 0.38757496},
        "subordinator": {"family": "inverse_gaussian", "gamma": 0.5, "mu": 0.5, "nu": 1.0},
        "schedule": {
            "coupon": 0.0425,
            "coupon_times": [0.5, 1.5, 2.5, 3.5, 4.5],
            "protection_index": 2,
            "call_prices": [1.02, 1.01, 1.0],
            "notice_delta": 0.1666
        },
        "run": {"rates": [0.05], "eps": 1e-7, "format": "csv"}
    }"#;
    std::fs::write(&cfg, json).unwrap();
    let o = eigenbond(&["price", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap(), "--oracle", "dp"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&std::fs::read_to_string(&out).unwrap());
    let col = |name: &str| rows[0].iter().position(|h| h == name).unwrap();
    let diff: f64 = rows[1][col("dp_abs_diff")].parse().unwrap();
    assert!(diff < 1e-4);
}

#[test]
fn validation_errors_exit_2() {
    let o = eigenbond(&["price", "--rates"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("rates"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"model": {"kind": "cir", "kappa": 1, "theta": 0.1, "sigma": 0.1, "drift": 2}}"#).unwrap();
    assert_eq!(eigenbond(&["price", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));

    assert_eq!(eigenbond(&["bench", "--repetitions", "1"]).status.code(), Some(2));
    assert_eq!(eigenbond(&["price", "--eps", "0.5"]).status.code(), Some(2));
    assert_eq!(eigenbond(&["price", "--model", "three-halves", "--clock", "jd"]).status.code(), Some(2));
}

#[test]
fn reproduce_value_table() {
    let o = eigenbond(&["reproduce", "T5"]);
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 11);
    for r in &rows[1..] {
        assert!(r[4].parse::<f64>().unwrap() <= 5e-6);
    }
}

#[test]
fn reproduce_break_evens_marks_absent_roots() {
    let o = eigenbond(&["reproduce", "T3", "--format", "table"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let cir_na = text.lines().filter(|l| l.trim_start().starts_with("CIR ") && l.contains("n.a.")).count();
    assert_eq!(cir_na, 5);
}

#[test]
fn bench_reports_three_tolerances() {
    let o = eigenbond(&["bench", "--repetitions", "10", "--rates", "0.05"]);
    assert!(o.status.success());
    assert_eq!(csv_rows(&stdout(&o)).len(), 4);
}

use std::process::{Command, Output};

use serde_json::Value;

fn cournot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cournot"))
        .args(args)
        .output()
        .expect("run cournot")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    serde_json::from_str(&stdout(&cournot(&all))).unwrap()
}

fn assert_validation_error(out: &Output, needle: &str) {
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with("error: "), "{err}");
    assert!(err.contains(needle), "{err}");
}

#[test]
fn duopoly_quantities() {
    let v = json(&[
        "equilibrium",
        "--a",
        "10",
        "--c",
        "1",
        "--gamma",
        "1",
        "--n",
        "2",
        "--s",
        "1",
        "--outsiders",
        "1",
    ]);
    let y = v["equilibrium"]["y"].as_array().unwrap();
    assert_eq!(y.len(), 2);
    for q in y {
        assert!((q.as_f64().unwrap() - 3.0).abs() < 1e-12);
    }
}

#[test]
fn zero_gamma_is_a_validation_error() {
    let out = cournot(&[
        "equilibrium",
        "--gamma",
        "0",
        "--n",
        "5",
        "--s",
        "1",
        "--outsiders",
        "4",
    ]);
    assert_validation_error(&out, "gamma must be non-zero");
}

#[test]
fn equilibrium_check_reports_small_residual() {
    let v = json(&[
        "equilibrium",
        "--a",
        "10",
        "--c",
        "1",
        "--gamma",
        "0.9",
        "--n",
        "46",
        "--s",
        "4",
        "--outsiders",
        "7,7,7,7,7,7",
        "--check",
    ]);
    let check = &v["check"];
    assert!(check["max_rel_diff"].as_f64().unwrap() < 1e-9);
    assert!(check["max_spread"].as_f64().unwrap() < 1e-10);
    assert!(check["max_residual"].as_f64().unwrap() < 1e-9);
    assert_eq!(v["nonpositive_price"], Value::Bool(false));
}

#[test]
fn worth_homogeneous_partition_independent() {
    let skewed = json(&[
        "worth",
        "--gamma",
        "1",
        "--n",
        "46",
        "--s",
        "4",
        "--outsiders",
        "37,1,1,1,1,1",
    ]);
    let equal = json(&[
        "worth",
        "--gamma",
        "1",
        "--n",
        "46",
        "--s",
        "4",
        "--outsiders",
        "7,7,7,7,7,7",
    ]);
    let (a, b) = (skewed["v_s"].as_f64().unwrap(), equal["v_s"].as_f64().unwrap());
    assert!((a - b).abs() <= 1e-12 * b);
}

#[test]
fn worth_grand_coalition_equals_total() {
    let v = json(&["worth", "--gamma", "0.9", "--n", "46", "--s", "46", "--outsiders", ""]);
    let (vs, vn) = (v["v_s"].as_f64().unwrap(), v["v_n"].as_f64().unwrap());
    assert!((vs - vn).abs() <= 1e-12 * vn);
}

#[test]
fn worth_singleton_heavy_larger_when_differentiated() {
    let skewed = json(&[
        "worth",
        "--gamma",
        "0.9",
        "--n",
        "46",
        "--s",
        "4",
        "--outsiders",
        "37,1,1,1,1,1",
        "--check",
    ]);
    let equal = json(&[
        "worth",
        "--gamma",
        "0.9",
        "--n",
        "46",
        "--s",
        "4",
        "--outsiders",
        "7,7,7,7,7,7",
    ]);
    assert!(skewed["v_s"].as_f64().unwrap() > equal["v_s"].as_f64().unwrap());
    let acc = skewed["accounting_v_s"].as_f64().unwrap();
    assert!((acc - skewed["v_s"].as_f64().unwrap()).abs() < 1e-9 * acc);
}

#[test]
fn jstar_values() {
    let v = json(&["jstar", "--n", "46", "--s", "4", "--gamma", "0.9"]);
    assert!((v["zeta"].as_f64().unwrap() - 4.57).abs() < 0.01);
    let h = json(&["jstar", "--n", "46", "--s", "4", "--gamma", "1"]);
    let want = 2.0 * (11.5f64.sqrt() - 1.0);
    assert!((h["zeta"].as_f64().unwrap() - want).abs() < 1e-12);
    assert!((h["gamma1_threshold"].as_f64().unwrap() - want).abs() < 1e-12);
}

#[test]
fn jstar_negative_gamma_rejected() {
    let out = cournot(&["jstar", "--n", "10", "--s", "3", "--gamma", "-0.05"]);
    assert_validation_error(&out, "scan");
}

#[test]
fn jstar_check_reports_empirical_frontier() {
    let v = json(&["jstar", "--n", "46", "--s", "4", "--gamma", "0.9", "--check"]);
    assert_eq!(v["first_j_above"], 5);
    assert_eq!(v["empirical_jstar"], 6);
    assert_eq!(v["zeta_sufficient"], Value::Bool(false));
}

#[test]
fn scan_negative_gamma_summary_is_consistent() {
    let report = json(&["scan", "--n", "12", "--gamma", "-0.05"]);
    let csv = stdout(&cournot(&["scan", "--n", "12", "--gamma", "-0.05", "--format", "csv"]));
    let unstable_rows = csv.lines().skip(1).filter(|l| l.ends_with(",false")).count();
    assert_eq!(report["unstable_cells"].as_u64().unwrap() as usize, unstable_rows);
    assert_eq!(
        report["total_cells"].as_u64().unwrap() as usize,
        csv.lines().count() - 1
    );
    // only small deviating coalitions gain, and never against fine outsider splits
    for line in csv.lines().skip(1).filter(|l| l.ends_with(",false")) {
        let s: usize = line.split(',').next().unwrap().parse().unwrap();
        assert!(s <= 3, "{line}");
    }
}

#[test]
fn scan_homogeneous_thresholds() {
    let report = json(&["scan", "--n", "9", "--gamma", "1"]);
    for row in report["per_s"].as_array().unwrap() {
        let s = row["s"].as_u64().unwrap() as f64;
        let bound = (2.0 * ((9.0 / s).sqrt() - 1.0)).floor() as u64 + 1;
        assert_eq!(row["zeta_first_j"].as_u64().unwrap(), bound);
        assert!(row["empirical_jstar"].as_u64().unwrap() <= bound);
        assert_eq!(row["zeta_sufficient"], Value::Bool(true));
    }
}

#[test]
fn scan_csv_header() {
    let csv = stdout(&cournot(&["scan", "--n", "12", "--gamma", "0.5", "--format", "csv"]));
    assert_eq!(csv.lines().next().unwrap(), "s,j,partition,v_s,per_agent,margin,stable");
}

#[test]
fn scan_rejects_large_n() {
    let out = cournot(&["scan", "--n", "40", "--gamma", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: budget exceeded"));
}

#[test]
fn scan_check_is_seeded() {
    let a = stdout(&cournot(&[
        "scan", "--n", "10", "--gamma", "0.4", "--check", "--seed", "5",
    ]));
    let b = stdout(&cournot(&[
        "scan", "--n", "10", "--gamma", "0.4", "--check", "--seed", "5",
    ]));
    assert_eq!(a, b);
    let v: Value = serde_json::from_str(&a).unwrap();
    assert!(v["check"]["max_rel_diff"].as_f64().unwrap() < 1e-9);
}

#[test]
fn figure_one_extremes() {
    let csv = stdout(&cournot(&["figure", "1"]));
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "rank,partition,v_s,per_agent,margin,stable,extreme");
    assert!(rows[1].contains("\"[7,7,7,7,7,7]\"") && rows[1].ends_with(",min"));
    let last = rows.last().unwrap();
    assert!(last.contains("\"[37,1,1,1,1,1]\"") && last.ends_with(",max"));
}

#[test]
fn figure_two_frontier() {
    let v = json(&["figure", "2"]);
    assert!((v["zeta"].as_f64().unwrap() - 4.5745).abs() < 1e-4);
    let rows = v["rows"].as_array().unwrap();
    let balanced: Vec<bool> = rows.iter().map(|r| r["balanced_stable"].as_bool().unwrap()).collect();
    // equal-split belief flips to stable at j = 5
    assert_eq!(balanced.iter().position(|&b| b), Some(4));
    let all: Vec<bool> = rows.iter().map(|r| r["all_stable"].as_bool().unwrap()).collect();
    assert_eq!(all.iter().position(|&b| b), Some(5));
    assert!(all[5..].iter().all(|&b| b));
}

#[test]
fn figure_two_negative_gamma() {
    let v = json(&["figure", "2", "--gamma", "-0.02"]);
    assert!(v["zeta"].is_null());
    let rows = v["rows"].as_array().unwrap();
    assert!(rows
        .iter()
        .filter(|r| r["j"].as_u64().unwrap() >= 5)
        .all(|r| r["all_stable"].as_bool().unwrap()));
}

#[test]
fn figure_invalid_override() {
    assert_validation_error(&cournot(&["figure", "2", "--gamma", "1.5"]), "gamma");
    assert_eq!(cournot(&["figure", "3"]).status.code(), Some(2));
}

#[test]
fn config_file_and_output_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scenario.json");
    std::fs::write(&cfg, r#"{"a":10,"c":1,"gamma":0.5,"n":5,"s":2,"outsiders":[2,1]}"#).unwrap();
    let out_path = dir.path().join("out.json");
    let out = cournot(&[
        "worth",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "json",
        "--output",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(v["structure"]["outsiders"], serde_json::json!([2, 1]));
    // flags override the file
    let v = json(&["worth", "--config", cfg.to_str().unwrap(), "--gamma", "0.25"]);
    assert!(v["v_s"].as_f64().unwrap() > 0.0);

    std::fs::write(&cfg, "{not json").unwrap();
    assert_validation_error(
        &cournot(&["worth", "--config", cfg.to_str().unwrap()]),
        "invalid config",
    );
}

#[test]
fn malformed_flags_single_line_errors() {
    assert_validation_error(
        &cournot(&["worth", "--gamma", "0.5", "--n", "5", "--s", "2", "--outsiders", "2,x"]),
        "invalid outsider",
    );
    assert_validation_error(
        &cournot(&["worth", "--gamma", "0.5", "--n", "5", "--s", "2", "--outsiders", "2,2"]),
        "sum",
    );
    assert_validation_error(&cournot(&["worth", "--gamma", "abc"]), "abc");
    assert_validation_error(
        &cournot(&[
            "equilibrium",
            "--gamma",
            "-0.5",
            "--n",
            "4",
            "--s",
            "1",
            "--outsiders",
            "3",
        ]),
        "condition K",
    );
}

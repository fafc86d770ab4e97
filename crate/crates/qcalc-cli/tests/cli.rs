//! End-to-end checks of the command-line contract: output formats, exit
//! codes, and run-to-run determinism.

use std::process::{Command, Output};

fn qcalc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcalc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = qcalc(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8")
}

fn exit_code(args: &[&str]) -> i32 {
    qcalc(args).status.code().expect("exit code")
}

#[test]
fn eval_gamma_at_q0_prints_one() {
    assert_eq!(
        stdout(&["eval", "gamma", "--q", "0", "--k", "2", "--t", "5"]).trim(),
        "1"
    );
}

#[test]
fn eval_beta_at_q0_prints_one() {
    assert_eq!(
        stdout(&["eval", "beta", "--q", "0", "--k", "3", "--t", "0.5", "--s", "0.5"]).trim(),
        "1"
    );
}

#[test]
fn eval_gamma_methods_agree() {
    let series = stdout(&[
        "eval", "gamma", "--q", "0.5", "--k", "2", "--t", "1.3", "--method", "series",
    ]);
    let product = stdout(&[
        "eval", "gamma", "--q", "0.5", "--k", "2", "--t", "1.3", "--method", "product",
    ]);
    let s: f64 = series.trim().parse().unwrap();
    let p: f64 = product.trim().parse().unwrap();
    assert!((s - p).abs() / s.abs() < 1e-10, "{s} vs {p}");
}

#[test]
fn eval_values_carry_full_precision() {
    let out = stdout(&[
        "eval",
        "cdf-gamma",
        "--q",
        "0.5",
        "--k",
        "2",
        "--t",
        "1",
        "--x",
        "0.7",
    ]);
    let value: f64 = out.trim().parse().unwrap();
    // Display round-trips, so at least 12 significant digits survive.
    assert_eq!(out.trim(), format!("{value}"));
    assert!(value > 0.0 && value < 1.0);
}

#[test]
fn trees_poly_renders_expected_polynomials() {
    assert_eq!(
        stdout(&["trees", "poly", "--t", "2", "--n", "2", "--k", "1"]).trim(),
        "1 + 2*q + 2*q^2 + q^3"
    );
    assert_eq!(
        stdout(&["trees", "poly", "--t", "1", "--n", "2", "--k", "2"]).trim(),
        "1 + q + q^2"
    );
    // Brute-force route agrees.
    assert_eq!(
        stdout(&["trees", "poly", "--t", "2", "--n", "2", "--k", "1", "--brute"]).trim(),
        "1 + 2*q + 2*q^2 + q^3"
    );
}

#[test]
fn trees_enumerate_line_count_and_format() {
    let out = stdout(&["trees", "enumerate", "--t", "2", "--n", "4", "--k", "2"]);
    assert_eq!(out.lines().count(), 384);
    assert!(out.starts_with("\"1,1,1,1\",0\n"));
    // JSON form parses and carries the tree.
    let out = stdout(&[
        "trees",
        "enumerate",
        "--t",
        "2",
        "--n",
        "1",
        "--k",
        "1",
        "--format",
        "json",
    ]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    let v: serde_json::Value = serde_json::from_str(lines[1]).unwrap();
    assert_eq!(v["sequence"], serde_json::json!([2]));
    assert_eq!(v["weight"], "q");
    assert!(v["tree"]["children"].is_array());
}

#[test]
fn trees_weight_worked_example() {
    assert_eq!(
        stdout(&["trees", "weight", "--seq", "1,3,6,7", "--t", "2", "--k", "2"]).trim(),
        "q^13"
    );
}

#[test]
fn grid_headers_match_sweep_shape() {
    let out = stdout(&[
        "grid",
        "density-gamma",
        "--q",
        "0.6",
        "--k",
        "2",
        "--t",
        "1",
        "--points",
        "5",
    ]);
    assert!(out.starts_with("x,value\n"));
    let out = stdout(&[
        "grid",
        "density-gamma",
        "--q",
        "0..0.9:3",
        "--k",
        "2",
        "--t",
        "1",
        "--points",
        "5",
    ]);
    assert!(out.starts_with("q,x,value\n"));
    assert_eq!(out.lines().count(), 1 + 3 * 5);
    let out = stdout(&[
        "grid",
        "density-gamma",
        "--q",
        "0.6",
        "--k",
        "1..5",
        "--t",
        "1",
        "--points",
        "5",
    ]);
    assert!(out.starts_with("k,x,value\n"));
    assert_eq!(out.lines().count(), 1 + 5 * 5);
}

#[test]
fn grid_density_skips_origin_for_small_shape() {
    let out = stdout(&[
        "grid",
        "density-beta",
        "--q",
        "0.5",
        "--k",
        "3",
        "--t",
        "0.5",
        "--s",
        "0.5",
        "--points",
        "5",
    ]);
    // x = 0 dropped: the density diverges there for t < 1.
    assert_eq!(out.lines().count(), 1 + 4);
    assert!(!out.lines().nth(1).unwrap().starts_with("0.0"));
}

#[test]
fn sample_is_seed_deterministic() {
    let args = [
        "sample", "gamma", "--q", "0.5", "--k", "2", "--t", "1", "--count", "64", "--seed", "9",
    ];
    assert_eq!(stdout(&args), stdout(&args));
    let other = [
        "sample", "gamma", "--q", "0.5", "--k", "2", "--t", "1", "--count", "64", "--seed", "10",
    ];
    assert_ne!(stdout(&args), stdout(&other));
}

#[test]
fn sample_q0_returns_single_atom() {
    let out = stdout(&[
        "sample", "gamma", "--q", "0", "--k", "2", "--t", "1", "--count", "3", "--seed", "7",
    ]);
    assert_eq!(out, "1\n1\n1\n");
}

#[test]
fn sample_measure_emits_lattice_json() {
    let out = stdout(&[
        "sample",
        "gamma",
        "--q",
        "0.5",
        "--k",
        "1",
        "--t",
        "1",
        "--measure",
    ]);
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    let support = v["support"].as_array().unwrap();
    let masses = v["masses"].as_array().unwrap();
    assert_eq!(support.len(), masses.len());
    assert!(v["tail_tol"].as_f64().unwrap() > 0.0);
    let total: f64 = masses.iter().map(|m| m.as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-8);
}

#[test]
fn verify_trees_passes_and_writes_schema_json() {
    let dir = std::env::temp_dir().join(format!("qcalc-verify-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let path_str = path.to_str().unwrap();
    let out = stdout(&["verify", "--suite", "trees", "--json", path_str]);
    assert!(out.contains("suite trees:"));
    assert!(out.lines().filter(|l| l.starts_with("PASS")).count() >= 100);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["suite"], "trees");
    assert_eq!(report["pass"], true);
    let case = &report["cases"][0];
    for field in [
        "id", "anchor", "params", "lhs", "rhs", "rel_err", "tol", "pass",
    ] {
        assert!(
            case.get(field).is_some(),
            "case missing field {field}: {case}"
        );
    }
    // Exactly the wire-format fields, nothing else.
    assert_eq!(case.as_object().unwrap().len(), 8);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn verify_gamma_with_loosened_tolerance_passes() {
    let out = stdout(&["verify", "--suite", "gamma", "--tol", "1e-10"]);
    assert!(out.trim_end().ends_with("cases passed"));
}

#[test]
fn verify_all_passes_and_round_trips_json() {
    let dir = std::env::temp_dir().join(format!("qcalc-verify-all-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let out = qcalc(&["verify", "--suite", "all", "--json", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["suite"], "all");
    assert_eq!(report["pass"], true);
    assert!(report["cases"].as_array().unwrap().len() > 1500);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(
        exit_code(&["eval", "gamma", "--q", "1.2", "--k", "2", "--t", "5"]),
        2
    );
    assert_eq!(
        exit_code(&["eval", "gamma", "--q", "0.5", "--k", "2", "--t=-1"]),
        2
    );
    assert_eq!(exit_code(&["verify", "--suite", "bogus"]), 2);
    assert_eq!(exit_code(&["eval", "gamma", "--nonsense"]), 2);
    assert_eq!(
        exit_code(&[
            "grid",
            "cdf-gamma",
            "--q",
            "0..0.9:3",
            "--k",
            "1..3",
            "--t",
            "1",
            "--points",
            "5",
        ]),
        2
    );
}

#[test]
fn nonconvergence_exits_3() {
    assert_eq!(
        exit_code(&[
            "eval",
            "gamma",
            "--q",
            "0.9999999",
            "--k",
            "1",
            "--t",
            "0.5"
        ]),
        3
    );
}

#[test]
fn budget_exceeded_exits_4() {
    assert_eq!(
        exit_code(&[
            "trees",
            "enumerate",
            "--t",
            "3",
            "--n",
            "5",
            "--k",
            "3",
            "--budget",
            "10",
        ]),
        4
    );
}

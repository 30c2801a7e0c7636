//! End-to-end CLI tests: exit-code contract, JSON/CSV artifacts, and
//! report determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_ncruelle")
}

fn tmp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("ncruelle-cli-tests").join(name);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("process exited")
}

const DEPOL: &str = r#"{
    "shift": {"k": 2},
    "theta": 0.5,
    "algebra": {"kind": "matrix", "size": 2},
    "potential": {"family": "depolarizing", "params": {"p": 0.5}},
    "run": {"tol": 1e-10, "max_iter": 200, "seed": 7, "samples": 200000}
}"#;

const TRACE: &str = r#"{
    "shift": {"k": 2},
    "algebra": {"kind": "matrix", "size": 2},
    "potential": {"family": "trace_type", "depth": 1, "params": {"factors": [
        [[0.3, 0.05], [0.05, 0.6]],
        [[0.7, -0.05], [-0.05, 0.4]]
    ]}},
    "run": {"seed": 11, "samples": 200000}
}"#;

#[test]
fn check_passes_and_reports() {
    let dir = tmp_dir("check");
    let cfg = write_config(&dir, "depol.json", DEPOL);
    let out_path = dir.join("report.json");
    let out = run(&[
        "check",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["mode"], "check");
    assert_eq!(report["check"]["aperiodic"], true);
    assert_eq!(report["check"]["positivity"], "analytic");
    assert_eq!(report["passed"], true);
}

#[test]
fn config_errors_exit_2() {
    let dir = tmp_dir("config-errors");
    // Missing file.
    let out = run(&["check", "--config", dir.join("absent.json").to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    // Unknown key.
    let bad = write_config(&dir, "bad.json", &DEPOL.replace("\"theta\"", "\"thata\""));
    let out = run(&["check", "--config", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("thata"));
    // Missing --config entirely.
    let out = run(&["check"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn validity_failure_exits_5() {
    let dir = tmp_dir("validity");
    // Trace-type factors that do not sum to the identity: deviation 1/2.
    let broken = write_config(
        &dir,
        "broken.json",
        r#"{
            "shift": {"k": 2},
            "algebra": {"kind": "matrix", "size": 2},
            "potential": {"family": "trace_type", "depth": 1, "params": {"factors": [
                [[0.3, 0.0], [0.0, 0.3]],
                [[0.2, 0.0], [0.0, 0.2]]
            ]}}
        }"#,
    );
    let out = run(&["check", "--config", broken.to_str().unwrap()]);
    assert_eq!(code(&out), 5, "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&String::from_utf8_lossy(&out.stdout)).unwrap();
    let deviation = report["check"]["normalization_deviation"].as_f64().unwrap();
    assert!((deviation - 0.5).abs() < 1e-12, "deviation {deviation}");
    // Periodic transition matrix fails aperiodicity.
    let periodic = write_config(
        &dir,
        "periodic.json",
        &DEPOL.replace(
            "\"shift\": {\"k\": 2}",
            "\"shift\": {\"k\": 2, \"transition_rows\": [[0,1],[1,0]]}",
        ),
    );
    let out = run(&["check", "--config", periodic.to_str().unwrap()]);
    assert_eq!(code(&out), 5);
}

#[test]
fn iterate_converges_and_writes_csv() {
    let dir = tmp_dir("iterate");
    let cfg = write_config(&dir, "depol.json", DEPOL);
    let csv_path = dir.join("log.csv");
    let out = run(&[
        "iterate",
        "--config",
        cfg.to_str().unwrap(),
        "--csv",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert!(csv.starts_with("step,spread,off_identity,eta_estimate,seminorm_bound\n"));
    assert!(csv.lines().count() >= 2);
    // max_iter 1 with an unreachable tolerance: nonconvergence, exit 3.
    let tight = write_config(
        &dir,
        "tight.json",
        &DEPOL.replace("\"max_iter\": 200", "\"max_iter\": 1"),
    );
    let out = run(&["iterate", "--config", tight.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
}

#[test]
fn spectrum_reports_gap_and_capacity() {
    let dir = tmp_dir("spectrum");
    let cfg = write_config(
        &dir,
        "depol.json",
        &DEPOL.replace("\"seed\": 7", "\"seed\": 7, \"cylinder_depth\": 4"),
    );
    let out = run(&["spectrum", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&String::from_utf8_lossy(&out.stdout)).unwrap();
    let gap = report["spectrum"]["gap"].as_f64().unwrap();
    assert!((gap - 0.5).abs() <= 1e-6, "gap {gap}");
    // Oversize section: exit 4.
    let big = write_config(
        &dir,
        "big.json",
        &DEPOL.replace("\"seed\": 7", "\"seed\": 7, \"cylinder_depth\": 12"),
    );
    let out = run(&["spectrum", "--config", big.to_str().unwrap()]);
    assert_eq!(code(&out), 4, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn eigenstate_entropy_and_mc() {
    let dir = tmp_dir("pipeline");
    let cfg = write_config(&dir, "trace.json", TRACE);
    let out = run(&["eigenstate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&String::from_utf8_lossy(&out.stdout)).unwrap();
    assert!(report["eigenstate"]["residual"].as_f64().unwrap() <= 1e-9);
    assert!((report["eigenstate"]["total_mass"].as_f64().unwrap() - 1.0).abs() <= 1e-10);

    let out = run(&["entropy", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&String::from_utf8_lossy(&out.stdout)).unwrap();
    assert!(report["entropy"]["h"].as_f64().unwrap() > 0.0);

    let out = run(&["mc", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&String::from_utf8_lossy(&out.stdout)).unwrap();
    assert!(report["mc"]["entropy_sigma_distance"].as_f64().unwrap() <= 3.0);
}

#[test]
fn reports_are_deterministic_modulo_timing() {
    let dir = tmp_dir("determinism");
    let cfg = write_config(&dir, "trace.json", TRACE);
    let normalize = |out: &Output| {
        let mut v: serde_json::Value =
            serde_json::from_str(&String::from_utf8_lossy(&out.stdout)).unwrap();
        v["timing_ms"] = 0.0.into();
        serde_json::to_string(&v).unwrap()
    };
    let a = run(&["entropy", "--config", cfg.to_str().unwrap()]);
    let b = run(&["entropy", "--config", cfg.to_str().unwrap()]);
    assert_eq!(normalize(&a), normalize(&b));
    // --seed overrides run.seed and changes the Monte Carlo stream.
    let m1 = run(&["mc", "--config", cfg.to_str().unwrap(), "--seed", "1"]);
    let m2 = run(&["mc", "--config", cfg.to_str().unwrap(), "--seed", "1"]);
    let m3 = run(&["mc", "--config", cfg.to_str().unwrap(), "--seed", "2"]);
    assert_eq!(normalize(&m1), normalize(&m2));
    assert_ne!(normalize(&m1), normalize(&m3));
}

#[test]
fn verify_paper_suite_passes() {
    let out = run(&["verify-paper"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let pass_rows = stdout.lines().filter(|l| l.ends_with("pass")).count();
    assert!(pass_rows >= 15, "expected >= 15 fixture rows, got {pass_rows}");
    assert!(!stdout.contains("FAIL"));
}

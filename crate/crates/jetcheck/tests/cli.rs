//! End-to-end checks of the `jetcheck` binary: exit codes, report
//! determinism, and the evidence embedded in failing reports.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jetcheck"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("jetcheck-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).expect("temp dir");
    dir.join(name)
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn verified_certificates_exit_zero() {
    let exx1 = data("exx1.jet");
    let out = run(&["check-cert", exx1.to_str().unwrap(), "--cert", "C1"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(code(&out), 0, "stdout: {text}");
    assert!(text.contains("verified"), "stdout: {text}");

    let stat = data("static.jet");
    let out = run(&["check-static", stat.to_str().unwrap(), "--cert", "S1"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn negative_verdicts_exit_one() {
    let exx2 = data("exx2.jet");
    let out = run(&[
        "verdict",
        exx2.to_str().unwrap(),
        "--left",
        "Sigma",
        "--right",
        "SigmaP",
        // The sampled invariants need at least 30 points; below that the
        // verdict is UNKNOWN (exit 0).
        "--points",
        "30",
    ]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(code(&out), 1, "stdout: {text}");
    assert!(text.contains("NOT_DYNAMIC_EQUIVALENT"), "stdout: {text}");

    let out = run(&[
        "ruled",
        exx2.to_str().unwrap(),
        "--system",
        "Sigma",
        "--points",
        "5",
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stdout).contains("NOT_RULED"));
}

#[test]
fn usage_and_parse_errors_exit_two() {
    // Unknown subcommand.
    let out = run(&["frobnicate"]);
    assert_eq!(code(&out), 2);

    // Missing required argument.
    let out = run(&["check-cert", data("exx1.jet").to_str().unwrap()]);
    assert_eq!(code(&out), 2);

    // Unparseable input file, with a position in the diagnostic.
    let bad = tmp("bad.jet");
    fs::write(&bad, "system Broken {\n  states x1;\n}\n").expect("write");
    let out = run(&["validate", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line"), "stderr: {err}");

    // A name that is not in the file.
    let out = run(&[
        "check-cert",
        data("exx1.jet").to_str().unwrap(),
        "--cert",
        "NoSuch",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
    assert_eq!(code(&run(&["ruled", "--help"])), 0);
}

#[test]
fn identical_runs_write_byte_identical_reports() {
    let exx2 = data("exx2.jet");
    let r1 = tmp("report-a.json");
    let r2 = tmp("report-b.json");
    for path in [&r1, &r2] {
        let out = run(&[
            "ruled",
            exx2.to_str().unwrap(),
            "--system",
            "SigmaP",
            "--points",
            "5",
            "--seed",
            "3",
            "--report",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0);
    }
    let a = fs::read(&r1).expect("report a");
    let b = fs::read(&r2).expect("report b");
    assert!(!a.is_empty());
    assert_eq!(a, b, "reports for identical inputs and seed must be identical bytes");
}

#[test]
fn failing_reports_embed_recheckable_evidence() {
    let exx2 = data("exx2.jet");
    let path = tmp("report-fail.json");
    let out = run(&[
        "ruled",
        exx2.to_str().unwrap(),
        "--system",
        "Sigma",
        "--points",
        "3",
        "--report",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&path).expect("report written"))
            .expect("report is valid JSON");
    assert_eq!(report["command"], "ruled");
    let outcomes = report["outcomes"].as_array().expect("outcomes array");
    assert!(outcomes.iter().any(|o| o["status"] == "NOT_RULED"));
    let witnesses = report["witnesses"].as_array().expect("witnesses array");
    assert_eq!(witnesses.len(), 3, "one witness per refuted point");
    for w in witnesses {
        let point = w["point"].as_object().expect("witness carries a point");
        // The full first-order jet is recorded, so the refutation can be
        // re-checked independently.
        for key in ["x1", "x2", "x3", "D(x1)", "D(x2)", "D(x3)"] {
            assert!(point.contains_key(key), "witness point lacks {key}");
        }
    }
}

#[test]
fn simulate_validates_a_certificate_along_a_trajectory() {
    let exx1 = data("exx1.jet");
    let out = run(&[
        "simulate",
        exx1.to_str().unwrap(),
        "--system",
        "Sigma",
        "--x0",
        "0.2",
        "--controls",
        "t/4",
        "--controls",
        "3/10 + t^2/2",
        "--h",
        "0.001",
        "--tspan",
        "0,0.25",
        "--cert",
        "C1",
    ]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(code(&out), 0, "stdout: {text}\nstderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(text.contains("finite differences"), "stdout: {text}");
}

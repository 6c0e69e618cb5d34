//! End-to-end runs of the `norden` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn norden(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_norden"))
        .args(args)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)))
}

fn without_timing(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timing");
    v
}

const DIAGONAL: &str = r#"{"schema": 1, "base": {"n": 2, "c": 1},
    "family": {"kind": "diagonal-ak", "A": 1, "B": 1},
    "sampling": {"num_points": 20, "seed": 3}}"#;

#[test]
fn check_passes_on_trivial_and_diagonal() {
    let dir = tempfile::tempdir().unwrap();
    let flat = write_config(
        dir.path(),
        "flat.json",
        r#"{"schema": 1, "base": {"n": 2, "c": 0}, "family": {"kind": "trivial-flat"}}"#,
    );
    let out = norden(&["check", "--config", &flat]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["status"], "pass");

    let diag = write_config(dir.path(), "diag.json", DIAGONAL);
    let out = norden(&["check", "--config", &diag]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn flipped_c2_fails_check_with_the_identity_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.json",
        r#"{"schema": 1, "base": {"n": 2, "c": 0}, "family": {"kind": "trivial-flat"},
            "perturb": [{"coeff": "c2", "delta": 2.0, "raw": true}]}"#,
    );
    let out = norden(&["check", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    let failed: Vec<&str> = r["constraints"]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(failed.contains(&"norden"), "{failed:?}");
}

#[test]
fn classify_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let conformal = write_config(
        dir.path(),
        "conf.json",
        r#"{"schema": 1, "base": {"n": 2, "c": 1},
            "family": {"kind": "conformal-ak", "a1": "1+t", "a3": "t/2", "c1": "2+t", "c3": 0, "t_max": 0.5},
            "sampling": {"num_points": 20}}"#,
    );
    let out = norden(&["classify", "--config", &conformal]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["classes"]["summary"], "strictly ω₁");

    let perturbed = write_config(
        dir.path(),
        "pert.json",
        r#"{"schema": 1, "base": {"n": 2, "c": 1},
            "family": {"kind": "general-ak", "a1": "1+t", "a3": "t/2", "c1_0": 2, "c3_0": 0.1, "t_max": 0.5},
            "perturb": [{"coeff": "b1", "delta": 0.1}],
            "sampling": {"num_points": 20}}"#,
    );
    let out = norden(&["classify", "--config", &perturbed]);
    assert_eq!(
        report(&out)["classes"]["summary"],
        "generic Norden (ω₁⊕ω₂⊕ω₃ only)"
    );
}

#[test]
fn verify_accepts_ids_and_names() {
    let out = norden(&["verify", "3.2", "--points", "20"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["verification"]["target"], "anti-kahler-diagonal");
    assert!(
        r["residuals"]["anti-kahler-diagonal.family.anti_kahler"]
            .as_f64()
            .unwrap()
            < 1e-6
    );
    assert!(
        r["residuals"]["anti-kahler-diagonal.witness.anti_kahler"]
            .as_f64()
            .unwrap()
            > 1e-3
    );

    let out = norden(&["verify", "complex-structure", "--points", "20"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn every_verification_target_runs() {
    for id in [
        "2.2", "2.3", "2.4", "3.1", "3.2", "4.1", "5.1", "6.1", "7.1", "8.1", "9.1",
    ] {
        let out = norden(&["verify", id, "--points", "10"]);
        let code = out.status.code().unwrap();
        assert!(
            [0, 1, 2].contains(&code),
            "{id}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let r = report(&out);
        let expected = match code {
            0 => "pass",
            1 => "fail",
            _ => "inconclusive",
        };
        assert_eq!(r["status"], expected, "{id}");
    }
}

#[test]
fn same_config_and_seed_give_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "diag.json", DIAGONAL);
    for cmd in ["check", "classify"] {
        let a = without_timing(report(&norden(&[cmd, "--config", &cfg])));
        let b = without_timing(report(&norden(&[cmd, "--config", &cfg])));
        assert_eq!(a, b, "{cmd}");
    }
    let a = without_timing(report(&norden(&[
        "classify", "--config", &cfg, "--seed", "9",
    ])));
    let b = without_timing(report(&norden(&["classify", "--config", &cfg])));
    assert_ne!(a, b);
}

#[test]
fn config_errors_exit_64() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        r#"{"schema": 2}"#,
        r#"{"schema": 1, "family": {"kind": "warp-drive"}}"#,
        r#"{"schema": 1, "family": {"kind": "conformal-ak", "a1": "1+*t", "a3": 0, "c1": 1, "c3": 0}}"#,
        "not json",
    ];
    for (i, body) in cases.iter().enumerate() {
        let cfg = write_config(dir.path(), &format!("c{i}.json"), body);
        let out = norden(&["classify", "--config", &cfg]);
        assert_eq!(out.status.code(), Some(64), "{body}");
    }
    assert_eq!(
        norden(&["check", "--config", "/nonexistent/config.json"])
            .status
            .code(),
        Some(64)
    );
    assert_eq!(norden(&["verify", "1.1"]).status.code(), Some(64));
}

#[test]
fn inconclusive_verdicts_exit_2() {
    // a tolerance so tight that analytic members land between member and reject
    let out = norden(&["classify", "--points", "10", "--tol", "1e-300"]);
    let r = report(&out);
    let classes = r["classes"]["classes"].as_array().unwrap();
    assert!(classes.iter().any(|e| e["verdict"] == "inconclusive"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dump_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "diag.json", DIAGONAL);
    let out_dir = dir.path().join("dump");
    let out = norden(&[
        "dump",
        "--config",
        &cfg,
        "--output",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let mut rows = csv::Reader::from_path(out_dir.join("coefficients.csv")).unwrap();
    let header = rows.headers().unwrap().clone();
    assert_eq!(&header[0], "t");
    assert_eq!(&header[1], "a1");
    let mut count = 0;
    for row in rows.records() {
        let row = row.unwrap();
        let t: f64 = row[0].parse().unwrap();
        let a1: f64 = row[1].parse().unwrap();
        assert!((a1 - (1.0 + 2.0 * t).sqrt()).abs() < 1e-14);
        count += 1;
    }
    assert_eq!(count, 101);

    let mut f = csv::Reader::from_path(out_dir.join("f_components.csv")).unwrap();
    let points: std::collections::BTreeSet<String> =
        f.records().map(|r| r.unwrap()[0].to_string()).collect();
    assert_eq!(points.len(), 5);
    assert!(out_dir.join("report.json").exists());
}

#[test]
fn dump_to_an_unwritable_path_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let target = blocker.join("sub");
    let out = norden(&[
        "dump",
        "--output",
        target.to_str().unwrap(),
        "--points",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("io"));
}

//! End-to-end tests of the command-line interface: exit codes, output
//! formats, and config/flag handling.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_torusfold"))
}

fn write(dir: &Path, name: &str, content: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, content).unwrap();
    p.to_str().unwrap().to_string()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn check_seq_admissible_reports_tail_sum() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.cfg", "a = [1, 1, 1]\ntau = [1, 3, 9]\n");
    let out = bin().args(["check-seq", "--config", &cfg]).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("tail_sum = 0.666666666666666"), "{text}");
    assert!(text.contains("collisions: none"), "{text}");
    assert!(text.contains("ADMISSIBLE"), "{text}");
}

#[test]
fn check_seq_growth_violation_lists_collisions() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.cfg", "a = [1, 1]\ntau = [1, 2]\n");
    let out = bin().args(["check-seq", "--config", &cfg]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("VIOLATED"), "{text}");
    assert!(text.contains("fold equal"), "{text}");
    assert!(text.contains("REJECTED"), "{text}");
}

#[test]
fn check_seq_empty_box_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.cfg", "a = []\n");
    let out = bin().args(["check-seq", "--config", &cfg]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_config_is_exit_2_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.cfg", "a = [1, 1\n");
    let out = bin().args(["check-seq", "--config", &cfg]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn fold_writes_folded_literal() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.cfg", "a = [1, 1]\ntau = [1, 5]\n");
    let poly = write(dir.path(), "p.txt", "1 1 : 1 0\n1 -1 : 0 2\n");
    let out = bin().args(["fold", &poly, "--config", &cfg]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "-4 : 0 2\n6 : 1 0\n");
}

#[test]
fn fold_collision_is_a_failure_exit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.cfg", "a = [1, 1]\ntau = [1, 2]\n");
    let poly = write(dir.path(), "p.txt", "1 0 : 1 0\n-1 1 : 1 0\n");
    let out = bin().args(["fold", &poly, "--config", &cfg]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn norm_prints_certified_interval() {
    let dir = tempfile::tempdir().unwrap();
    // 1 + e^{2 pi i x}: norm 4/pi.
    let poly = write(dir.path(), "p.txt", "0 : 1 0\n1 : 1 0\n");
    let out = bin()
        .args(["norm", &poly, "--eps", "1e-4"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let value: f64 = text
        .lines()
        .find(|l| l.starts_with("value"))
        .and_then(|l| l.split('=').nth(1))
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!((value - 4.0 / std::f64::consts::PI).abs() < 1e-3, "{text}");
    assert!(text.contains("lower"), "{text}");
    assert!(text.contains("upper"), "{text}");
}

#[test]
fn suggest_tau_meets_tail_target() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.cfg", "a = [1, 1, 1]\ntarget_tail = 0.5\n");
    let out = bin().args(["suggest-tau", "--config", &cfg]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let tail: f64 = text
        .lines()
        .find(|l| l.starts_with("tail_sum"))
        .and_then(|l| l.split('=').nth(1))
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!(tail <= 0.5, "{text}");
}

#[test]
fn verify_writes_report_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.cfg",
        "a = [1, 1]\ntau = [1, 5]\nseed = 7\ndraws = 5\neps = 0.02\n",
    );
    let out_path = dir.path().join("report.txt");
    let csv_path = dir.path().join("table.csv");
    let out = bin()
        .args([
            "verify",
            "--config",
            &cfg,
            "--out",
            out_path.to_str().unwrap(),
            "--csv",
            csv_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let report = std::fs::read_to_string(&out_path).unwrap();
    assert!(report.contains("[config]"), "{report}");
    assert!(report.contains("[[records]]"), "{report}");
    assert!(report.contains("passed = true"), "{report}");

    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "draw,seed,ratio,lower,upper,passed");
    assert_eq!(lines.count(), 5);
}

#[test]
fn verify_flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.cfg",
        "a = [1, 1]\ntau = [1, 5]\nseed = 7\ndraws = 5\neps = 0.02\n",
    );
    let out_path = dir.path().join("report.txt");
    let out = bin()
        .args([
            "verify",
            "--config",
            &cfg,
            "--draws",
            "2",
            "--seed",
            "99",
            "--out",
            out_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(report.matches("[[records]]").count(), 2, "{report}");
    assert!(report.contains("seed = 99"), "{report}");
}

#[test]
fn lemmas_runs_and_passes_with_sound_constant() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.cfg",
        "a = [2]\nseed = 3\ndraws = 4\neps = 0.01\nn_slabs = 16\nparts = 3\n",
    );
    let out_path = dir.path().join("report.txt");
    let out = bin()
        .args(["lemmas", "--config", &cfg, "--out", out_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(&out_path).unwrap();
    assert!(report.contains("kind = \"step_approx\""), "{report}");
    assert!(report.contains("kind = \"modulation_identity\""), "{report}");
    assert!(report.contains("failed = 0"), "{report}");
}

#[test]
fn lemmas_paper_constant_reports_without_failing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.cfg",
        "a = [2]\nseed = 3\ndraws = 4\neps = 0.01\nn_slabs = 16\nparts = 3\n",
    );
    let out = bin()
        .args(["lemmas", "--config", &cfg, "--cb", "paper"])
        .output()
        .unwrap();
    // Violations in this mode are recorded, not asserted.
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("c_b = 1"), "{}", stdout(&out));
}

#[test]
fn unknown_flag_is_usage_error() {
    let out = bin().args(["check-seq", "--bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

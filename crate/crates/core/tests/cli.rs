//! End-to-end runs of the `olsen` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn olsen(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_olsen"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: &Path, args: &[&str]) {
    let o = olsen(out, args);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{args:?}: {}",
        String::from_utf8_lossy(&o.stderr)
    );
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> (String, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn stderr_error(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).expect("stderr is one JSON object")
}

#[test]
fn solve_writes_certificate_and_manifest() {
    let dir = TempDir::new().unwrap();
    ok(
        dir.path(),
        &["solve", "--base", "paper-110", "--t", "1e-3", "--w", "1e-3"],
    );
    let s = read_json(&dir.path().join("solve.json"));
    for r in s["residuals"].as_array().unwrap() {
        assert!(r.as_f64().unwrap().abs() < 1e-10);
    }
    let m = read_json(&dir.path().join("manifest.json"));
    assert_eq!(m["config"]["command"]["subcommand"], "solve");
    assert_eq!(m["artifacts"][0], "solve.json");
}

#[test]
fn validation_failure_exits_one_with_json() {
    let dir = TempDir::new().unwrap();
    let o = olsen(dir.path(), &["solve", "--t", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_error(&o)["exit_code"], 1);

    let cfg = dir.path().join("bad.json");
    fs::write(
        &cfg,
        r#"{"command": {"subcommand": "tau", "points": "many"}}"#,
    )
    .unwrap();
    let o = olsen(dir.path(), &["--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_error(&o)["error"], "config");

    let o = olsen(
        dir.path(),
        &["spectrum", "--probs-a", "0.5,0.6", "--probs-b", "0.5,0.5"],
    );
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn numeric_failure_exits_two() {
    let dir = TempDir::new().unwrap();
    let o = olsen(dir.path(), &["solve", "--t", "0.09", "--w", "0.09"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_error(&o)["exit_code"], 2);
}

#[test]
fn manifest_reproduces_artifacts() {
    let first = TempDir::new().unwrap();
    ok(
        first.path(),
        &[
            "--seed",
            "17",
            "sample-exponent",
            "--samples",
            "3",
            "--depth",
            "130",
        ],
    );
    let second = TempDir::new().unwrap();
    let manifest = first.path().join("manifest.json");
    ok(second.path(), &["--config", manifest.to_str().unwrap()]);
    let name = "sample_exponent.csv";
    assert_eq!(
        fs::read(first.path().join(name)).unwrap(),
        fs::read(second.path().join(name)).unwrap()
    );
    assert_eq!(
        fs::read(first.path().join("manifest.json")).unwrap(),
        fs::read(second.path().join("manifest.json")).unwrap()
    );

    let third = TempDir::new().unwrap();
    ok(
        third.path(),
        &[
            "--seed",
            "18",
            "sample-exponent",
            "--samples",
            "3",
            "--depth",
            "130",
        ],
    );
    assert_ne!(
        fs::read(first.path().join(name)).unwrap(),
        fs::read(third.path().join(name)).unwrap()
    );
}

#[test]
fn config_subcommand_must_match() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["gray", "--word", "0123"]);
    let manifest = dir.path().join("manifest.json");
    let o = olsen(dir.path(), &["--config", manifest.to_str().unwrap(), "tau"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn tau_curves_hit_their_fixed_points() {
    let dir = TempDir::new().unwrap();
    ok(
        dir.path(),
        &["tau", "--q-min", "-2", "--q-max", "2", "--points", "5"],
    );
    let (header, rows) = csv_rows(&dir.path().join("tau.csv"));
    assert_eq!(header, "q,b,B,b',B'");
    assert_eq!(rows.len(), 5);
    for r in &rows {
        assert!(r[1] <= r[2] + 1e-15);
        if r[0] == 0.0 {
            assert!((r[1] - 1.0).abs() < 1e-12 && (r[2] - 1.0).abs() < 1e-12);
        }
        if r[0] == 1.0 {
            assert!(r[1].abs() < 1e-12 && r[2].abs() < 1e-12);
        }
    }
}

#[test]
fn spectrum_of_a_homogeneous_measure_has_equal_dimensions() {
    let dir = TempDir::new().unwrap();
    ok(
        dir.path(),
        &[
            "spectrum",
            "--probs-a",
            "0.2,0.3,0.5",
            "--probs-b",
            "0.2,0.3,0.5",
            "--points",
            "20",
        ],
    );
    let (header, rows) = csv_rows(&dir.path().join("spectrum.csv"));
    assert_eq!(header, "alpha,dim,Dim,q_a,q_b");
    assert_eq!(rows.len(), 20);
    for r in rows {
        assert!((r[1] - r[2]).abs() < 1e-12);
    }
}

#[test]
fn zeros_reports_orders() {
    let dir = TempDir::new().unwrap();
    // 2^-x - 2 * 3^-x vanishes once, where (3/2)^x = 2
    ok(
        dir.path(),
        &[
            "zeros",
            "--terms",
            "[[1, -0.6931471805599453], [-2, -1.0986122886681098]]",
        ],
    );
    let r = read_json(&dir.path().join("zeros.json"));
    let zeros = r["zeros"].as_array().unwrap();
    assert_eq!(zeros.len(), 1);
    assert_eq!(zeros[0]["order"], 1);
    let expect = 2f64.ln() / (1.5f64).ln();
    assert!((zeros[0]["location"].as_f64().unwrap() - expect).abs() < 1e-9);
}

#[test]
fn gray_table_lists_every_word_of_a_level() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["gray", "--alphabet", "3", "--level", "2"]);
    let text = fs::read_to_string(dir.path().join("gray.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("word,index,gray,gray_alt"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().any(|r| r.starts_with("10,3,12,")));
}

#[test]
fn pushforward_masses_sum_to_one() {
    let dir = TempDir::new().unwrap();
    ok(
        dir.path(),
        &["pushforward", "--level", "4", "--code", "alternative"],
    );
    let (header, rows) = csv_rows(&dir.path().join("pushforward.csv"));
    assert!(header.starts_with("level,index,"));
    assert_eq!(rows.len(), 256);
    let total: f64 = rows.iter().map(|r| r[5]).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn doubling_is_independent_of_thread_count() {
    let one = TempDir::new().unwrap();
    let many = TempDir::new().unwrap();
    ok(
        one.path(),
        &["--threads", "1", "doubling", "--max-level", "7"],
    );
    ok(
        many.path(),
        &["--threads", "4", "doubling", "--max-level", "7"],
    );
    let a = fs::read(one.path().join("doubling.csv")).unwrap();
    assert_eq!(a, fs::read(many.path().join("doubling.csv")).unwrap());
    let (_, rows) = csv_rows(&one.path().join("doubling.csv"));
    assert_eq!(rows.len(), 7);
    for r in rows {
        assert!(r[1] <= r[3] * (1.0 + 1e-12));
    }
}

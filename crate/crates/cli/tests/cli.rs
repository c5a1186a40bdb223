use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_serieslaw"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const FAIR: &str = "kind = \"iid\"\np = [0.5, 0.5]\nseed = 3\n";
const SPARSE: &str = "kind = \"iid\"\np = [0.995, 0.005]\nseed = 7\n";

#[test]
fn gen_is_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "fair.toml", FAIR);
    for name in ["a.sym", "b.sym"] {
        json(&run(
            dir.path(),
            &["gen", "--spec", "fair.toml", "--length", "50000", "--out", name],
        ));
    }
    let a = std::fs::read(dir.path().join("a.sym")).unwrap();
    let b = std::fs::read(dir.path().join("b.sym")).unwrap();
    assert_eq!(a, b);

    json(&run(
        dir.path(),
        &[
            "gen",
            "--spec",
            "fair.toml",
            "--length",
            "50000",
            "--seed",
            "4",
            "--out",
            "c.sym",
        ],
    ));
    assert_ne!(a, std::fs::read(dir.path().join("c.sym")).unwrap());
}

#[test]
fn gen_echoes_config() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "fair.toml", FAIR);
    let v = json(&run(
        dir.path(),
        &[
            "gen",
            "--spec",
            "fair.toml",
            "--length",
            "1000",
            "--seed",
            "9",
            "--out",
            "a.sym",
        ],
    ));
    assert_eq!(v["config"]["command"], "gen");
    assert_eq!(v["config"]["effective"]["spec"]["seed"], 9);
    assert_eq!(v["sequence"]["length"], 1000);
}

#[test]
fn missing_spec_names_the_path() {
    let dir = TempDir::new().unwrap();
    let out = run(
        dir.path(),
        &["gen", "--spec", "nowhere.toml", "--length", "10", "--out", "a.sym"],
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere.toml"));
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "fair.toml", FAIR);
    let out = run(dir.path(), &["gen", "--spec", "fair.toml", "--length", "10"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(dir.path(), &["stats", "--input", "a.sym"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn stats_block_and_grid() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "fair.toml", FAIR);
    json(&run(
        dir.path(),
        &["gen", "--spec", "fair.toml", "--length", "200000", "--out", "a.sym"],
    ));
    let v = json(&run(
        dir.path(),
        &["stats", "--input", "a.sym", "--block", "0110", "--t-grid", "0.5,1,2"],
    ));
    let rec = &v["records"][0];
    assert_eq!(rec["block"], "0110");
    assert!((rec["kac"].as_f64().unwrap() - 1.0).abs() < 0.05);
    assert_eq!(rec["classification"]["margins"].as_array().unwrap().len(), 3);

    let out = run(
        dir.path(),
        &["stats", "--input", "a.sym", "--all-length", "3", "--format", "csv"],
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config: {"));
    assert_eq!(lines.next().unwrap(), "block,series,t,value");
    let blocks: std::collections::BTreeSet<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(blocks.len(), 8);
}

#[test]
fn stats_rejects_foreign_symbols() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "fair.toml", FAIR);
    json(&run(
        dir.path(),
        &["gen", "--spec", "fair.toml", "--length", "1000", "--out", "a.sym"],
    ));
    let out = run(dir.path(), &["stats", "--input", "a.sym", "--block", "0120"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn perturb_refuses_a_short_marker_gap() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "sparse.toml", SPARSE);
    json(&run(
        dir.path(),
        &["gen", "--spec", "sparse.toml", "--length", "10000", "--out", "a.sym"],
    ));
    let out = run(
        dir.path(),
        &["perturb", "--input", "a.sym", "--r", "100", "--out", "p.sym"],
    );
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("r >= 200"), "{err}");
    assert!(!dir.path().join("p.sym").exists());
}

#[test]
fn perturb_then_verify() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    write(d, "sparse.toml", SPARSE);
    json(&run(
        d,
        &[
            "gen",
            "--spec",
            "sparse.toml",
            "--length",
            "2000000",
            "--out",
            "raw.sym",
        ],
    ));
    let out = run(
        d,
        &[
            "perturb",
            "--input",
            "raw.sym",
            "--r",
            "200",
            "--M",
            "40000",
            "--seed",
            "1",
            "--out",
            "pert.sym",
            "--report",
            "plan.json",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let plan: Value = serde_json::from_str(&std::fs::read_to_string(d.join("plan.json")).unwrap()).unwrap();
    let report = &plan["report"];
    assert_eq!(report["plan"]["N"], 402);
    assert!(report["change_fraction"].as_f64().unwrap() <= 0.11);

    // the perturbed file is an ordinary sequence
    let v = json(&run(d, &["stats", "--input", "pert.sym", "--block", "1"]));
    assert_eq!(v["records"][0]["sequence_length"], 2_000_000);

    let verify = [
        "verify",
        "--plan",
        "plan.json",
        "--min-count",
        "20",
        "--N-hi",
        "420",
        "--input",
    ];
    let out = run(d, &[&verify[..], &["pert.sym"]].concat());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["report"]["worst_value"].as_f64().unwrap() < 0.25);

    let out = run(
        d,
        &[
            "verify",
            "--input",
            "raw.sym",
            "--N",
            "402",
            "--N-hi",
            "420",
            "--min-count",
            "20",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["report"]["pass"], false);
}

#[test]
fn ingest_reports_bursts() {
    let dir = TempDir::new().unwrap();
    let mut text = String::from("time,label\n");
    let mut t = 0.0;
    for i in 0..400 {
        t += if i % 5 == 0 { 50.0 } else { 0.3 };
        text.push_str(&format!("{t},x\n"));
    }
    write(dir.path(), "events.csv", &text);
    let v = json(&run(
        dir.path(),
        &[
            "ingest",
            "--input",
            "events.csv",
            "--column",
            "0",
            "--header",
            "--sweep",
        ],
    ));
    assert_eq!(v["report"]["stats"]["classification"]["verdict"], "attracting");
    assert_eq!(v["sweep"].as_array().unwrap().len(), 5);

    let out = run(
        dir.path(),
        &[
            "ingest",
            "--input",
            "events.csv",
            "--column",
            "0",
            "--header",
            "--format",
            "csv",
        ],
    );
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("margin,")));
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn randclust(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_randclust"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = randclust(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SIM1_300: &str = r#"{"n": 300, "ky": 3, "kz": 3,
  "b": [[0.2, 0.1, 0.1], [0.1, 0.2, 0.1], [0.1, 0.1, 0.2]],
  "row_sizes": [100, 100, 100], "col_sizes": [100, 100, 100]}"#;

fn write_spec(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = path(dir, name);
    fs::write(&p, body).unwrap();
    p
}

fn generate(dir: &TempDir, seed: &str) -> (PathBuf, PathBuf) {
    let spec = write_spec(dir, "sim1.json", SIM1_300);
    let edges = path(dir, &format!("edges{seed}.txt"));
    let labels = path(dir, &format!("labels{seed}.tsv"));
    ok(&[
        "generate", "--spec", s(&spec), "--seed", seed, "--out-edges", s(&edges), "--out-labels", s(&labels),
    ]);
    (edges, labels)
}

#[test]
fn generate_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let (e1, l1) = generate(&dir, "7");
    let e2 = path(&dir, "again.txt");
    let l2 = path(&dir, "again.tsv");
    let spec = path(&dir, "sim1.json");
    ok(&["generate", "--spec", s(&spec), "--seed", "7", "--out-edges", s(&e2), "--out-labels", s(&l2)]);
    assert_eq!(fs::read(&e1).unwrap(), fs::read(&e2).unwrap());
    assert_eq!(fs::read(&l1).unwrap(), fs::read(&l2).unwrap());
    let labels = fs::read_to_string(&l1).unwrap();
    assert_eq!(labels.lines().count(), 300);
    assert_eq!(labels.lines().next(), Some("0\t0\t0"));
    assert!(fs::read_to_string(&e1).unwrap().lines().count() > 1000);
}

#[test]
fn zero_connectivity_gives_empty_edge_file() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        &dir,
        "zero.json",
        r#"{"n": 10, "ky": 2, "kz": 2, "b": [[0, 0], [0, 0]], "row_sizes": [5, 5], "col_sizes": [5, 5]}"#,
    );
    let (e, l) = (path(&dir, "e.txt"), path(&dir, "l.tsv"));
    ok(&["generate", "--spec", s(&spec), "--out-edges", s(&e), "--out-labels", s(&l)]);
    assert_eq!(fs::read_to_string(&e).unwrap(), "");
}

#[test]
fn invalid_spec_exits_with_validation_code() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        &dir,
        "bad.json",
        r#"{"n": 10, "ky": 2, "kz": 2, "b": [[0.5, 0.1], [0.1, 0.5]], "row_sizes": [5, 4], "col_sizes": [5, 5]}"#,
    );
    let (e, l) = (path(&dir, "e.txt"), path(&dir, "l.tsv"));
    let out = randclust(&["generate", "--spec", s(&spec), "--out-edges", s(&e), "--out-labels", s(&l)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row_sizes"));
}

fn cocluster_json(edges: &Path, extra: &[&str]) -> (Vec<u8>, Value) {
    let mut args = vec!["cocluster", "--edges", s(edges), "--ky", "3", "--kz", "3", "--seed", "3"];
    args.extend_from_slice(extra);
    let out = ok(&args);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    (out.stdout, v)
}

fn labels_of(v: &Value, key: &str) -> Vec<u64> {
    v[key].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect()
}

#[test]
fn cocluster_schema_and_determinism() {
    let dir = TempDir::new().unwrap();
    let (edges, _) = generate(&dir, "7");
    let (bytes, v) = cocluster_json(&edges, &["--backend", "projection"]);
    // Value sorts its keys, so check the order on the raw text
    let text = String::from_utf8(bytes.clone()).unwrap();
    let pos: Vec<usize> = ["row_labels", "col_labels", "backend", "method", "diagnostics"]
        .iter()
        .map(|k| text.find(&format!("\"{k}\":")).unwrap())
        .collect();
    assert!(pos.windows(2).all(|w| w[0] < w[1]), "{pos:?}");
    assert_eq!(v["backend"], "projection");
    let rows = labels_of(&v, "row_labels");
    assert_eq!(rows.len(), 300);
    assert!(rows.iter().chain(&labels_of(&v, "col_labels")).all(|&l| l < 3));

    let (again, _) = cocluster_json(&edges, &["--backend", "projection", "--threads", "1"]);
    assert_eq!(bytes, again);
}

#[test]
fn full_rate_sampling_matches_exact() {
    let dir = TempDir::new().unwrap();
    let (edges, _) = generate(&dir, "7");
    let (_, exact) = cocluster_json(&edges, &["--backend", "exact"]);
    let (_, sampled) = cocluster_json(&edges, &["--backend", "sampling", "--sample-p", "1.0"]);
    assert_eq!(labels_of(&exact, "row_labels"), labels_of(&sampled, "row_labels"));
    assert_eq!(labels_of(&exact, "col_labels"), labels_of(&sampled, "col_labels"));
}

#[test]
fn one_based_reader() {
    let dir = TempDir::new().unwrap();
    let e = path(&dir, "one.txt");
    fs::write(&e, "# ids from 1\n1 2\n2 3\n3 1\n3 4\n4 1\n").unwrap();
    let count = |extra: &[&str]| {
        let mut args = vec!["cocluster", "--edges", s(&e), "--ky", "1", "--kz", "2", "--backend", "exact"];
        args.extend_from_slice(extra);
        let v: Value = serde_json::from_slice(&ok(&args).stdout).unwrap();
        v["row_labels"].as_array().unwrap().len()
    };
    // read as zero-based, id 0 is an isolated extra node
    assert_eq!(count(&[]), 5);
    assert_eq!(count(&["--one-based"]), 4);

    let z = path(&dir, "zero.txt");
    fs::write(&z, "0 1\n").unwrap();
    let out = randclust(&["cocluster", "--edges", s(&z), "--ky", "1", "--kz", "1", "--one-based"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_edge_file_reports_line() {
    let dir = TempDir::new().unwrap();
    let e = path(&dir, "bad.txt");
    fs::write(&e, "0 1\n1 x\n").unwrap();
    let out = randclust(&["cocluster", "--edges", s(&e), "--ky", "1", "--kz", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn ky_above_kz_is_rejected() {
    let dir = TempDir::new().unwrap();
    let (edges, _) = generate(&dir, "1");
    let out = randclust(&["cocluster", "--edges", s(&edges), "--ky", "3", "--kz", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_writes_six_rows() {
    let dir = TempDir::new().unwrap();
    let csv = path(&dir, "sim.csv");
    ok(&["simulate", "--scenario", "1", "--n-list", "300", "--reps", "2", "--seed", "5", "--out", s(&csv)]);
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "scenario,n,rep,method,row_mis,col_mis,approx_err,wall_ms,seed");
    assert_eq!(lines.len(), 7);
    let methods: Vec<&str> = lines[1..].iter().map(|l| l.split(',').nth(3).unwrap()).collect();
    assert_eq!(methods, ["original", "projection", "sampling", "original", "projection", "sampling"]);
    for l in &lines[1..] {
        let f: Vec<&str> = l.split(',').collect();
        let row: f64 = f[4].parse().unwrap();
        assert!((0.0..=1.0).contains(&row));
        assert!(f[6].parse::<f64>().unwrap() > 0.0);
        assert!(f[7].parse::<f64>().unwrap() > 0.0);
    }
}

#[test]
fn simulate_is_reproducible_across_thread_counts() {
    let strip = |args: &[&str]| -> Vec<String> {
        let out = ok(args);
        // drop wall_ms, the only timing-dependent column
        String::from_utf8(out.stdout)
            .unwrap()
            .lines()
            .map(|l| {
                let mut f: Vec<&str> = l.split(',').collect();
                f.remove(7);
                f.join(",")
            })
            .collect()
    };
    let base = ["simulate", "--scenario", "3", "--n-list", "300", "--reps", "2", "--seed", "9"];
    let a = strip(&base);
    let mut one = base.to_vec();
    one.extend(["--threads", "1"]);
    assert_eq!(a, strip(&one));
}

#[test]
fn simulate_header_for_scenario_two() {
    let out = ok(&["simulate", "--scenario", "2", "--n-list", "300", "--reps", "1", "--no-approx-err"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("scenario,n,rep,method,row_mis,col_mis,approx_err,wall_ms,seed\n"));
    assert_eq!(text.lines().nth(1).unwrap().split(',').nth(6), Some(""));
}

#[test]
fn simulate_with_override_spec() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(&dir, "sim1.json", SIM1_300);
    let out = ok(&["simulate", "--scenario", "1", "--reps", "1", "--override-spec", s(&spec), "--no-approx-err"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 4);
    let out = randclust(&["simulate", "--scenario", "1", "--n-list", "600", "--override-spec", s(&spec)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_rejects_unknown_scenario() {
    let out = randclust(&["simulate", "--scenario", "4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bench_rows() {
    let dir = TempDir::new().unwrap();
    let (edges, _) = generate(&dir, "2");
    let out = ok(&["bench", "--edges", s(&edges), "--rank", "3", "--reps", "3"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "backend,median_ms,nnz,n,rank");
    let names: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(names, ["exact", "projection", "sampling:total", "sampling:svd"]);
    for l in &lines[1..] {
        let f: Vec<&str> = l.split(',').collect();
        assert!(f[1].parse::<f64>().unwrap() > 0.0);
        assert_eq!(f[3], "300");
        assert_eq!(f[4], "3");
    }
}

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn pst(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pst"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "bad JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn graph_file(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_p2() {
    let dir = TempDir::new().unwrap();
    let g = graph_file(&dir, "p2.json", r#"{"n": 2, "edges": [[0, 1]]}"#);
    let out = pst(&["simulate", "-g", s(&g), "--from", "0", "--to", "1", "--t-max", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    let t = v["time"].as_f64().unwrap();
    let k = (t / std::f64::consts::FRAC_PI_2).round();
    assert!((t - k * std::f64::consts::FRAC_PI_2).abs() < 1e-6);
}

#[test]
fn simulate_p4_stays_short_of_one() {
    // P4 gets close (about 1 - 8.5e-5 near t = 53.4) but never reaches 1
    let dir = TempDir::new().unwrap();
    let g = graph_file(&dir, "p4.json", r#"{"n": 4, "edges": [[0, 1], [1, 2], [2, 3]]}"#);
    let trace = dir.path().join("trace.csv");
    let out = pst(&[
        "simulate", "-g", s(&g), "--from", "0", "--to", "3", "--t-max", "100", "--trace-out", s(&trace),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let f = json(&out)["fidelity"].as_f64().unwrap();
    assert!(f < 1.0 - 1e-5 && f > 0.9999, "{f}");
    let csv = std::fs::read_to_string(&trace).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,fidelity"));
    assert!(lines.next().unwrap().starts_with("0.00000000000,"));
}

#[test]
fn missing_file_is_input_error() {
    let out = pst(&["simulate", "-g", "/nonexistent/graph.json", "--from", "0", "--to", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    assert!(out.stdout.is_empty());
}

#[test]
fn certify_exit_codes() {
    let dir = TempDir::new().unwrap();
    let q = (8.0f64 / 3.0).sqrt();
    let p3 = graph_file(
        &dir,
        "p3.json",
        &format!(r#"{{"n": 3, "edges": [[0, 1], [1, 2]], "potential": [0, {q}, 0]}}"#),
    );
    let out = pst(&["certify", "-g", s(&p3), "--from", "0", "--to", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["status"], "certified");
    assert!((v["transfer_time"].as_f64().unwrap() - 3.847649).abs() < 1e-6);

    let p5 = graph_file(
        &dir,
        "p5.json",
        r#"{"n": 5, "edges": [[0, 1], [1, 2], [2, 3], [3, 4]], "potential": [1.3, 0.7, 2.1, 0.7, 1.3]}"#,
    );
    let out = pst(&["certify", "-g", s(&p5), "--from", "0", "--to", "4"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["status"], "refused");
    assert_ne!(v["refusal_reason"], "none");
    assert!(v["transfer_time"].is_null());

    let out = pst(&["certify", "-g", s(&p5), "--from", "2", "--to", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn p3_command() {
    let out = pst(&["p3", "--k", "2", "--l", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["q"].as_f64().unwrap() - 1.632993).abs() < 1e-6);
    assert!((v["t"].as_f64().unwrap() - 3.847649).abs() < 1e-6);

    assert_eq!(pst(&["p3", "--k", "3", "--l", "1"]).status.code(), Some(2));
}

#[test]
fn synth_twin_on_star() {
    let dir = TempDir::new().unwrap();
    let g = graph_file(&dir, "star.json", r#"{"n": 4, "edges": [[0, 1], [0, 2], [0, 3]]}"#);
    let out = pst(&["synth-twin", "-g", s(&g), "--from", "1", "--to", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["achieved_fidelity"].as_f64().unwrap() >= 1.0 - 1e-6);
    assert_eq!(v["potential"][1], 0.0);
    assert_eq!(v["potential"][2], 0.0);

    // feed the synthesized potential back through the certifier
    let potential: Vec<f64> = serde_json::from_value(v["potential"].clone()).unwrap();
    let file = serde_json::json!({"n": 4, "edges": [[0, 1], [0, 2], [0, 3]], "potential": potential});
    let g2 = graph_file(&dir, "synth.json", &file.to_string());
    let out = pst(&["certify", "-g", s(&g2), "--from", "1", "--to", "2"]);
    assert_eq!(out.status.code(), Some(0));

    let path = graph_file(&dir, "p4.json", r#"{"n": 4, "edges": [[0, 1], [1, 2], [2, 3]]}"#);
    let out = pst(&["synth-twin", "-g", s(&path), "--from", "0", "--to", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn synth_twin_failure_is_negative() {
    let dir = TempDir::new().unwrap();
    let g = graph_file(&dir, "star.json", r#"{"n": 4, "edges": [[0, 1], [0, 2], [0, 3]]}"#);
    let out = pst(&[
        "synth-twin", "-g", s(&g), "--from", "1", "--to", "2", "--d-max", "3", "--seeds", "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["status"], "failed");
    assert_eq!(v["attempts"].as_array().unwrap().len(), 1);
}

#[test]
fn product_command() {
    let dir = TempDir::new().unwrap();
    let p2 = graph_file(&dir, "p2.json", r#"{"n": 2, "edges": [[0, 1]]}"#);
    let p3 = graph_file(&dir, "p3.json", r#"{"n": 3, "edges": [[0, 1], [1, 2]]}"#);
    let out = pst(&[
        "product", "-g", s(&p2), "--with", s(&p2), "--from", "0", "--to", "1", "--from2", "0", "--to2", "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["n"], 4);
    assert_eq!(v["edges"].as_array().unwrap().len(), 4);
    assert_eq!((v["source"].as_u64(), v["target"].as_u64()), (Some(0), Some(3)));
    assert!((v["time"].as_f64().unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-9);

    let out = pst(&[
        "product", "-g", s(&p2), "--with", s(&p3), "--from", "0", "--to", "1", "--from2", "0", "--to2", "2",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("differ"));
}

#[test]
fn path_scan_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let r = pst(&["path-scan", "--n", "4", "--trials", "100", "--seed", "3", "--out", s(out)]);
        assert!(matches!(r.status.code(), Some(0 | 1)));
        assert!(r.stdout.is_empty());
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let v: Value = serde_json::from_slice(&ta).unwrap();
    assert!(v["best"]["fidelity"].as_f64().unwrap() < 1.0);
    assert_eq!(v["refused"], 100);

    let r = pst(&["path-scan", "--n", "3"]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn output_keys_are_sorted() {
    let out = pst(&["p3", "--k", "4", "--l", "1"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let keys: Vec<&str> = text
        .lines()
        .filter_map(|l| l.strip_prefix("  \""))
        .map(|l| l.split('"').next().unwrap())
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    assert!(!keys.is_empty());
}

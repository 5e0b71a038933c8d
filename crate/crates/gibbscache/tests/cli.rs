use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn example() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/paper_sec6.json")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gibbscache-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn gibbscache(args: &[&str]) -> (bool, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_gibbscache")).args(args).output().unwrap();
    (
        out.status.success(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn optimal_prints_sec6_values() {
    let (ok, stdout, stderr) = gibbscache(&["optimal", example().to_str().unwrap()]);
    assert!(ok, "{stderr}");
    let v: Value = serde_json::from_str(&stdout).unwrap();
    assert!((v["h_max"].as_f64().unwrap() - 0.765).abs() < 1e-9);
    assert!((v["most_popular"]["hit_rate"].as_f64().unwrap() - 0.55).abs() < 1e-9);
    assert!((v["independent"]["hit_rate"].as_f64().unwrap() - 0.63).abs() < 1e-9);
    assert_eq!(v["argmax"], serde_json::json!([[[0, 1], [1, 0]]]));
}

#[test]
fn simulate_is_reproducible() {
    let run = |name: &str| {
        let dir = scratch(name);
        let (ok, _, stderr) = gibbscache(&[
            "simulate",
            "--config",
            example().to_str().unwrap(),
            "--seed",
            "42",
            "--horizon",
            "3000",
            "--replications",
            "2",
            "--out-dir",
            dir.to_str().unwrap(),
        ]);
        assert!(ok, "{stderr}");
        dir
    };
    let (a, b) = (run("a"), run("b"));
    let read = |d: &Path, f: &str| std::fs::read(d.join(f)).unwrap();
    assert_eq!(read(&a, "summary.json"), read(&b, "summary.json"));
    assert_eq!(read(&a, "rep-001/events.csv"), read(&b, "rep-001/events.csv"));

    let summary: Value = serde_json::from_slice(&read(&a, "summary.json")).unwrap();
    assert_eq!(summary["replications"], 2);
    let run0 = &summary["runs"][0];
    assert_eq!(
        run0["hits"].as_u64().unwrap() + run0["misses"].as_u64().unwrap(),
        run0["requests"].as_u64().unwrap()
    );
    let events = std::fs::read_to_string(a.join("rep-000/events.csv")).unwrap();
    assert_eq!(events.lines().next().unwrap(), "time,content,segment,bs,hit,store,evict");
    assert_eq!(events.lines().count() as u64, run0["requests"].as_u64().unwrap() + 1);
    let slots = std::fs::read_to_string(a.join("rep-000/slots.csv")).unwrap();
    assert_eq!(slots.lines().next().unwrap(), "t,bs,beta,h_v,column");
    assert_eq!(slots.lines().count(), 3001);
    for d in [a, b] {
        std::fs::remove_dir_all(d).unwrap();
    }
}

#[test]
fn sweep_beta_is_increasing() {
    let (ok, stdout, stderr) = gibbscache(&["sweep-beta", example().to_str().unwrap(), "--horizon", "2000", "--replications", "1"]);
    assert!(ok, "{stderr}");
    let rows: Vec<Value> = serde_json::from_str(&stdout).unwrap();
    let betas: Vec<f64> = rows.iter().map(|r| r["beta"].as_f64().unwrap()).collect();
    assert_eq!(betas, [1.0, 2.0, 5.0, 10.0, 20.0, 50.0]);
    let exact: Vec<f64> = rows.iter().map(|r| r["exact_expected_hit_rate"].as_f64().unwrap()).collect();
    assert!(exact.windows(2).all(|w| w[0] < w[1]), "{exact:?}");
}

#[test]
fn fig2_writes_json_table() {
    let dir = scratch("fig2");
    let (ok, _, stderr) = gibbscache(&[
        "reproduce-fig2",
        example().to_str().unwrap(),
        "--horizon",
        "2000",
        "--replications",
        "2",
        "--format",
        "json",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(ok, "{stderr}");
    let rows: Vec<Value> = serde_json::from_slice(&std::fs::read(dir.join("fig2.json")).unwrap()).unwrap();
    assert_eq!(rows.len(), 6);
    for r in &rows {
        assert!((r["independent"].as_f64().unwrap() - 0.63).abs() < 1e-9);
        assert!((r["most_popular"].as_f64().unwrap() - 0.55).abs() < 1e-9);
        assert!((r["optimum"].as_f64().unwrap() - 0.765).abs() < 1e-9);
    }
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn bad_configs_fail_with_field_and_remedy() {
    let dir = scratch("bad");
    std::fs::create_dir_all(&dir).unwrap();
    let text = std::fs::read_to_string(example()).unwrap();
    let path = dir.join("k_equals_m.json");
    std::fs::write(&path, text.replace("\"size\": 1", "\"size\": 2")).unwrap();
    let (ok, _, stderr) = gibbscache(&["optimal", path.to_str().unwrap()]);
    assert!(!ok);
    assert!(stderr.contains("cache.size") && stderr.contains("1 <= size < 2"), "{stderr}");

    let path = dir.join("nested.json");
    std::fs::write(&path, text.replace("[[0, 6], [1, 10]]", "[[0, 10], [2, 3]]")).unwrap();
    let (ok, _, stderr) = gibbscache(&["simulate", path.to_str().unwrap()]);
    assert!(!ok);
    assert!(stderr.contains("traffic.eta") && stderr.contains("eta > 0"), "{stderr}");

    let (ok, _, stderr) = gibbscache(&["optimal"]);
    assert!(!ok && stderr.contains("no config file"), "{stderr}");
    std::fs::remove_dir_all(dir).unwrap();
}

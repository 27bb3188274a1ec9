use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use reupload::bench::{generate_teacher_dataset, TeacherSpec};
use reupload::io::write_dataset;
use reupload::Architecture;
use serde_json::Value;
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reupload")).current_dir(dir).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn simulate_zero_circuit_is_constant() {
    let tmp = TempDir::new().unwrap();
    write(
        tmp.path(),
        "c.json",
        r#"{"architecture": {"layers": 2, "qubits": 1, "inputs": 1}, "parameters": {"source": "zeros"}, "resolution": 10}"#,
    );
    let o = run(tmp.path(), &["simulate", "--config", "c.json", "--out", "o"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(tmp.path().join("o/outputs.csv")).unwrap();
    let values: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(values.len(), 10);
    assert!(values.iter().all(|v| *v == "1"));
    let run_info = json(&tmp.path().join("o/run.json"));
    assert_eq!(run_info["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn echo_reproduces_the_run() {
    let tmp = TempDir::new().unwrap();
    write(
        tmp.path(),
        "c.json",
        r#"{"architecture": {"layers": 2, "qubits": 2, "inputs": 2, "entanglement": "last_layer"}, "resolution": 4}"#,
    );
    let a = run(tmp.path(), &["simulate", "--config", "c.json", "--seed", "9", "--out", "a"]);
    assert!(a.status.success(), "{}", stderr(&a));
    let b = run(tmp.path(), &["simulate", "--config", "a/config.json", "--out", "b"]);
    assert!(b.status.success(), "{}", stderr(&b));
    for f in ["config.json", "run.json", "theta.json", "outputs.csv"] {
        assert_eq!(fs::read(tmp.path().join("a").join(f)).unwrap(), fs::read(tmp.path().join("b").join(f)).unwrap(), "{f}");
    }
    assert_eq!(json(&tmp.path().join("a/run.json"))["seed"], 9);
}

#[test]
fn config_errors_exit_2() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "c.json", r#"{"resolution": 4}"#);
    let o = run(tmp.path(), &["simulate", "--config", "c.json", "--out", "o"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("architecture"));
    let o = run(tmp.path(), &["simulate", "--config", "missing.json"]);
    assert_eq!(o.status.code(), Some(2));
    write(tmp.path(), "typo.json", r#"{"architecture": {"layers": 1, "qubits": 1, "inputs": 1}, "resolutoin": 4}"#);
    let o = run(tmp.path(), &["simulate", "--config", "typo.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("resolutoin"));
}

#[test]
fn shape_errors_exit_3() {
    let tmp = TempDir::new().unwrap();
    write(
        tmp.path(),
        "c.json",
        r#"{"architecture": {"layers": 1, "qubits": 2, "inputs": 1}, "observable": {"kind": "local_sum", "paulis": ["z"]}}"#,
    );
    let o = run(tmp.path(), &["simulate", "--config", "c.json", "--out", "o"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    write(
        tmp.path(),
        "p.json",
        r#"{"architecture": {"layers": 1, "qubits": 1, "inputs": 1}, "parameters": {"source": "explicit", "flat": [1.0, 2.0]}}"#,
    );
    let o = run(tmp.path(), &["simulate", "--config", "p.json", "--out", "o"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

fn spectrum_report(tmp: &Path, arch: &str, observable: &str) -> Value {
    write(tmp, "s.json", &format!(r#"{{"architecture": {arch}, "observable": {observable}, "seed": 4}}"#));
    let o = run(tmp, &["spectrum", "--config", "s.json", "--out", "s"]);
    assert!(o.status.success(), "{}", stderr(&o));
    json(&tmp.join("s/report.json"))
}

#[test]
fn spectrum_counts() {
    let tmp = TempDir::new().unwrap();
    let r = spectrum_report(
        tmp.path(),
        r#"{"layers": 2, "qubits": 2, "inputs": 1}"#,
        r#"{"kind": "local_sum", "paulis": ["z", "z"]}"#,
    );
    assert_eq!(r["symbolic"]["harmonics"], 12);
    assert_eq!(r["numeric"]["harmonics"], 12);
    assert_eq!(r["closed_form"], 12);
    let r = spectrum_report(tmp.path(), r#"{"layers": 2, "qubits": 1, "inputs": 1}"#, r#"{"kind": "local_sum", "paulis": ["z"]}"#);
    assert_eq!(r["symbolic"]["harmonics"], 6);
    assert_eq!(r["methods_agree"], true);
    let rows = fs::read_to_string(tmp.path().join("s/harmonics.csv")).unwrap().lines().count();
    assert_eq!(rows, 1 + 9);
}

#[test]
fn spectrum_memory_guard() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "s.json", r#"{"architecture": {"layers": 13, "qubits": 1, "inputs": 1}}"#);
    let o = run(tmp.path(), &["spectrum", "--config", "s.json", "--out", "s"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("refuses"), "{}", stderr(&o));
}

fn teacher_csv(dir: &Path) -> PathBuf {
    let ts = TeacherSpec::new(Architecture::non_entangling(1, 1, 1), 1, 5);
    let data = generate_teacher_dataset(&ts, 0, 40, 1).unwrap();
    let path = dir.join("data.csv");
    write_dataset(fs::File::create(&path).unwrap(), &data).unwrap();
    path
}

#[test]
fn train_self_generated_and_deterministic() {
    let tmp = TempDir::new().unwrap();
    teacher_csv(tmp.path());
    write(
        tmp.path(),
        "t.json",
        r#"{"architecture": {"layers": 1, "qubits": 1, "inputs": 1}, "dataset": "data.csv", "train": {"restarts": 4, "learning_rate": 10.0}, "seed": 2}"#,
    );
    let a = run(tmp.path(), &["train", "--config", "t.json", "--out", "a"]);
    assert!(a.status.success(), "{}", stderr(&a));
    let b = run(tmp.path(), &["train", "--config", "t.json", "--out", "b"]);
    assert!(b.status.success());
    let result = json(&tmp.path().join("a/result.json"));
    assert!(result["best_cost"].as_f64().unwrap() <= 1e-8, "{}", result["best_cost"]);
    for f in ["result.json", "history.csv", "config.json"] {
        assert_eq!(fs::read(tmp.path().join("a").join(f)).unwrap(), fs::read(tmp.path().join("b").join(f)).unwrap(), "{f}");
    }
}

#[test]
fn train_data_errors() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "bad.csv", "x1,f\n0.1,0.5\n0.2,0.4\n0.3,nope\n");
    write(tmp.path(), "t.json", r#"{"architecture": {"layers": 1, "qubits": 1, "inputs": 1}}"#);
    let o = run(tmp.path(), &["train", "--config", "t.json", "--data", "bad.csv", "--out", "o"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("row 3"), "{}", stderr(&o));
    write(tmp.path(), "wide.csv", "x1,x2,f\n0.1,0.2,0.5\n");
    let o = run(tmp.path(), &["train", "--config", "t.json", "--data", "wide.csv", "--out", "o"]);
    assert_eq!(o.status.code(), Some(3));
    let o = run(tmp.path(), &["train", "--config", "t.json", "--out", "o"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn benchmark_single_trial() {
    let tmp = TempDir::new().unwrap();
    write(
        tmp.path(),
        "b.json",
        r#"{
            "teacher": {"architecture": {"layers": 2, "qubits": 2, "inputs": 2}, "realizations": 1},
            "students": [{"arch": {"layers": 1, "qubits": 2, "inputs": 2}}],
            "samples": 30,
            "train": {"restarts": 1, "max_iterations": 20},
            "map_resolution": 5
        }"#,
    );
    let o = run(tmp.path(), &["benchmark", "--config", "b.json", "--out", "o", "--threads", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let trials = fs::read_to_string(tmp.path().join("o/trials.csv")).unwrap();
    assert_eq!(trials.lines().filter(|l| l.starts_with("trial,")).count(), 1);
    assert_eq!(trials.lines().filter(|l| l.starts_with("aggregate,")).count(), 1);
    let report = json(&tmp.path().join("o/benchmark.json"));
    assert_eq!(report["aggregates"][0]["std_cost"], 0.0);
    let map = fs::read_to_string(tmp.path().join("o/teacher_map.csv")).unwrap();
    assert_eq!(map.lines().count(), 1 + 25);
}

#[test]
fn gamma_sweep_table() {
    let tmp = TempDir::new().unwrap();
    write(
        tmp.path(),
        "g.json",
        r#"{"gamma_sweep": {"layers": [1, 2, 3], "qubits": [2, 3], "inputs": 2, "entanglement": ["none", "all_layers"]}}"#,
    );
    let o = run(tmp.path(), &["benchmark", "--config", "g.json", "--out", "o"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = fs::read_to_string(tmp.path().join("o/gamma.csv")).unwrap();
    assert_eq!(table.lines().count(), 1 + 12);
    // 𝒜₀: Γ = 2·3^{L−1} / ((2+n)L), independent of Q
    for line in table.lines().filter(|l| l.starts_with("A0(")) {
        let cols: Vec<&str> = line.split(',').collect();
        let l: i32 = cols[1].parse().unwrap();
        let gamma: f64 = cols[6].parse().unwrap();
        assert!((gamma - 2.0 * 3f64.powi(l - 1) / (4.0 * l as f64)).abs() < 1e-12, "{line}");
    }
}

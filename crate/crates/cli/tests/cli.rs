use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn slicekit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slicekit"))
        .args(args)
        .env("SLICEKIT_LOG", "error")
        .output()
        .expect("binary runs")
}

fn out_arg(dir: &Path) -> &str {
    dir.to_str().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn torus_is_not_tubewise_hamiltonian() {
    let dir = tempfile::tempdir().unwrap();
    let out = slicekit(&["check-tubewise", "--config", "torus2", "--out", out_arg(dir.path())]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("verdict: no"));
    let v = json(&dir.path().join("verdict.json"));
    assert_eq!(v["verdict"], "no");
    let p = v["obstruction_period"].as_array().unwrap();
    let norm = p.iter().map(|x| x.as_f64().unwrap().powi(2)).sum::<f64>().sqrt();
    assert!((norm - 2.0 * std::f64::consts::PI).abs() < 1e-6);
}

#[test]
fn oscillator_energy_column_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    let out = slicekit(&["simulate", "--config", "oscillator", "--out", out_arg(dir.path())]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "energy").unwrap();
    let energies: Vec<f64> = lines.map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect();
    assert!(energies.len() > 100);
    let lo = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert!(hi - lo <= 1e-8, "energy range {}", hi - lo);
}

#[test]
fn outputs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        for cmd in ["build-slice", "simulate", "check-tubewise"] {
            let out = slicekit(&[cmd, "--config", "heisenberg-shift", "--t-end", "0.5", "--out", out_arg(dir.path())]);
            assert_eq!(out.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        }
    }
    for file in ["model.json", "trajectory.csv", "simulation.json", "verdict.json"] {
        let x = fs::read(a.path().join(file)).unwrap();
        let y = fs::read(b.path().join(file)).unwrap();
        assert_eq!(x, y, "{file} differs between runs");
    }
}

#[test]
fn bad_config_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, r#"{"name": "x", "algebra": {}, "anchor": {"omega": [], "generator_matrix": []}}"#).unwrap();
    let out = slicekit(&["build-slice", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    fs::write(&path, "{not json").unwrap();
    assert_eq!(slicekit(&["build-slice", "--config", path.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(slicekit(&["simulate"]).status.code(), Some(1));
}

#[test]
fn inconclusive_verdict_exits_with_code_four() {
    let dir = tempfile::tempdir().unwrap();
    let list = slicekit(&["list-scenarios", "--out", out_arg(dir.path())]);
    assert_eq!(list.status.code(), Some(0));
    let path = dir.path().join("so3-sphere.json");
    let mut cfg = json(&path);
    cfg["tubewise"]["loops_generate"] = false.into();
    fs::write(&path, cfg.to_string()).unwrap();
    let out = slicekit(&["check-tubewise", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn nonsymplectic_isotropy_is_rejected_at_load() {
    let dir = tempfile::tempdir().unwrap();
    slicekit(&["list-scenarios", "--out", out_arg(dir.path())]);
    let path = dir.path().join("so3-sphere.json");
    let mut cfg = json(&path);
    cfg["anchor"]["isotropy_tangent_ops"][0] = serde_json::json!([[1.0, 0.0], [0.0, 1.0]]);
    fs::write(&path, cfg.to_string()).unwrap();
    let out = slicekit(&["build-slice", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn non_invariant_hamiltonian_is_a_model_error() {
    let dir = tempfile::tempdir().unwrap();
    slicekit(&["list-scenarios", "--out", out_arg(dir.path())]);
    let path = dir.path().join("so2-fixedpoint.json");
    let mut cfg = json(&path);
    cfg["hamiltonian"] = serde_json::json!({"kind": "polynomial", "terms": [{"coeff": 1.0, "v_powers": [2]}]});
    fs::write(&path, cfg.to_string()).unwrap();
    let out = slicekit(&["simulate", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn verify_passes_on_builtins() {
    let dir = tempfile::tempdir().unwrap();
    let out = slicekit(&["verify", "--config", "torus2-oscillator", "--t-end", "0.2", "--seed", "11", "--out", out_arg(dir.path())]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 6);
    let report = json(&dir.path().join("verify.json"));
    assert_eq!(report["passed"], true);
}

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sideband_core::specfun::chi;

fn sideband(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sideband"))
        .args(args)
        .arg("--out-dir")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = sideband(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn sidecar(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(format!("{name}.json"))).unwrap()).unwrap()
}

fn param(v: &Value, name: &str) -> f64 {
    v["results"]["params"]
        .as_array()
        .unwrap()
        .iter()
        .find(|p| p["name"] == name)
        .unwrap_or_else(|| panic!("no {name}"))["value"]
        .as_f64()
        .unwrap()
}

fn rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn eigen_at_the_symmetric_point() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(dir.path(), &["eigen", "--phi-mrad", "16", "--f1-khz", "528", "--f2-khz", "528"]);
    assert!(stdout.contains("beta_deg = 90"), "{stdout}");
    let v = sidecar(dir.path(), "eigen");
    assert!((v["results"]["beta_deg"].as_f64().unwrap() - 90.0).abs() < 1e-9);
    let split = v["results"]["splitting_khz"].as_f64().unwrap();
    assert!((split / (528.0 * 0.016) - 1.0).abs() < 0.01, "{split}");
    assert_eq!(v["config"]["phi_mrad"], 16.0);
    assert_eq!(v["tool"], "sideband");
}

#[test]
fn chi_table_passes_library_values_through() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["chi-table"]);
    let table = rows(&dir.path().join("chi-table.csv"));
    assert_eq!(table.len(), 200);
    assert!(table.windows(2).all(|w| w[1][0] > w[0][0]));
    for r in &table {
        assert_eq!(r[1], chi(r[0]));
    }
    // decreasing up to the first minimum near θ ≈ 5.9
    let head: Vec<_> = table.iter().filter(|r| r[0] < 5.5).collect();
    assert!(head.windows(2).all(|w| w[1][1] < w[0][1]));
    let v = sidecar(dir.path(), "chi-table");
    assert_eq!(v["results"]["theta_increasing"], true);
    assert!(v["results"]["chi_first_rise_theta"].as_f64().unwrap() > 5.5);
}

#[test]
fn crossing_pipeline_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["scan-crossing", "--phi-mrad", "16", "--f1-khz", "528", "--p0-uw", "9.5"]);
    let input = dir.path().join("scan-crossing.csv");
    ok(dir.path(), &["fit-crossing", "--input", input.to_str().unwrap()]);
    let v = sidecar(dir.path(), "fit-crossing");
    assert_eq!(v["results"]["converged"], true);
    for (name, truth) in [("phi_mrad", 16.0), ("f1_khz", 528.0), ("p0_uw", 9.5)] {
        let got = param(&v, name);
        assert!((got / truth - 1.0).abs() < 1e-6, "{name}: {got}");
    }
}

#[test]
fn area_pipeline_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["scan-crossing", "--phi-mrad", "22", "--p0-uw", "9.4", "--p1-uw", "0.9", "--t-us", "300"],
    );
    let input = dir.path().join("scan-crossing.csv");
    ok(dir.path(), &["fit-areas", "--input", input.to_str().unwrap(), "--t-us", "300"]);
    let v = sidecar(dir.path(), "fit-areas");
    for (name, truth) in [("phi_mrad", 22.0), ("p0_uw", 9.4), ("p1_uw", 0.9)] {
        let got = param(&v, name);
        assert!((got / truth - 1.0).abs() < 1e-6, "{name}: {got}");
    }
}

#[test]
fn seeded_outputs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        ok(dir, &["synth-spectrum", "--step-khz", "2"]);
        let input = dir.join("synth-spectrum.csv");
        ok(dir, &["add-noise", "--input", input.to_str().unwrap(), "--sigma", "0.02", "--seed", "11"]);
        ok(dir, &["cool", "--ensemble", "500", "--seed", "4"]);
        ok(dir, &["scan-crossing", "--noise-khz", "1", "--seed", "9"]);
    }
    for name in ["synth-spectrum", "add-noise", "cool", "scan-crossing"] {
        let x = fs::read(a.path().join(format!("{name}.csv"))).unwrap();
        let y = fs::read(b.path().join(format!("{name}.csv"))).unwrap();
        assert_eq!(x, y, "{name}");
        assert!(!x.contains(&b'\r'));
    }
    let other = tempfile::tempdir().unwrap();
    let input = a.path().join("synth-spectrum.csv");
    ok(other.path(), &["add-noise", "--input", input.to_str().unwrap(), "--sigma", "0.02", "--seed", "12"]);
    assert_ne!(
        fs::read(other.path().join("add-noise.csv")).unwrap(),
        fs::read(a.path().join("add-noise.csv")).unwrap()
    );
    assert_eq!(sidecar(a.path(), "add-noise")["seed"], 11);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"phi_mrad": 20.0, "f2_khz": 500.0}"#).unwrap();
    ok(dir.path(), &["eigen", "--config", cfg.to_str().unwrap(), "--f2-khz", "510"]);
    let v = sidecar(dir.path(), "eigen");
    assert_eq!(v["config"]["phi_mrad"], 20.0);
    assert_eq!(v["config"]["f2_khz"], 510.0);
    assert_eq!(v["config"]["f1_khz"], 528.0);
}

#[test]
fn errors_are_json_with_module() {
    let dir = tempfile::tempdir().unwrap();
    let out = sideband(dir.path(), &["eigen", "--phi-mrad=-5"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(v["error"]["module"], "lattice");

    let out = sideband(dir.path(), &["thermometry", "--a-red-khz", "2", "--a-blue-khz", "1"]);
    let v: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(v["error"]["module"], "raman");

    let out = sideband(dir.path(), &["fit-crossing", "--input", "/nonexistent.csv"]);
    let v: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(v["error"]["module"], "io");

    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"nope": 1}"#).unwrap();
    let out = sideband(dir.path(), &["chi-table", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(v["error"]["module"], "config");
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_sideband"))
        .args(["thermometry", "--nbar", "3.3", "--name", "t"])
        .env("SIDEBAND_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(status.status.success());
    let r = rows(&dir.path().join("t.csv"));
    assert!((r[0][2] - 78.0).abs() < 0.1, "{:?}", r);
}

#[test]
fn spectrum_fit_reports_raw_area() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["synth-spectrum", "--start-khz=-460", "--stop-khz=-400", "--step-khz", "0.1", "--omega0-khz", "1"],
    );
    let input = dir.path().join("synth-spectrum.csv");
    ok(
        dir.path(),
        &["fit-spectrum", "--input", input.to_str().unwrap(), "--n-peaks", "1", "--raw-area", "true"],
    );
    let v = sidecar(dir.path(), "fit-spectrum");
    let center = param(&v, "center_1_khz");
    assert!((center + 429.84).abs() < 0.1, "{center}");
    let raw = v["results"]["raw_area_khz"].as_f64().unwrap();
    let fitted = v["results"]["total_area_khz"].as_f64().unwrap();
    assert!(raw > 0.0 && ((raw - fitted) / fitted).abs() < 0.2, "{raw} vs {fitted}");
    let resid = rows(&dir.path().join("fit-spectrum.csv"));
    assert!(resid.iter().all(|r| (r[1] - r[2] - r[3]).abs() < 1e-12));
}

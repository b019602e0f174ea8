use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_frame-lab"))
}

fn shipped(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(sub: &str, config: &Path, extra: &[&str]) -> Output {
    bin()
        .arg(sub)
        .arg("--config")
        .arg(config)
        .args(extra)
        .output()
        .unwrap()
}

fn report(sub: &str, config: &Path, extra: &[&str]) -> Value {
    let out = run(sub, config, extra);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write_config(dir: &tempfile::TempDir, text: &str) -> PathBuf {
    let path = dir.path().join("cfg.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn f(v: &Value, ptr: &str) -> f64 {
    v.pointer(ptr).and_then(Value::as_f64).unwrap_or_else(|| panic!("{ptr} missing"))
}

#[test]
fn density_on_integers() {
    let r = report("density", &shipped("density_integers.toml"), &[]);
    assert_eq!(r["command"], "density");
    assert!(r["timing"].is_null());
    assert!((f(&r, "/payload/d_minus_est") - 1.0).abs() <= 1.0 / 32.0 + 1e-12);
    assert_eq!(f(&r, "/payload/d_plus_est"), 1.0);
}

#[test]
fn density_on_fibonacci() {
    let r = report("density", &shipped("density_fibonacci.toml"), &[]);
    let target = 1.0 / 5f64.sqrt();
    assert!((f(&r, "/payload/d_minus_est") - target).abs() < 0.005);
    assert!((f(&r, "/payload/d_plus_est") - target).abs() < 0.005);
}

#[test]
fn missing_radii_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "[pointset]\nkind = \"lattice\"\nstep = 1.0\n\n[density]\nstep = 0.25\n");
    let out = run("density", &cfg, &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("radii") && err.contains("line"), "{err}");
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "[pointset]\nkind = \"lattice\"\nstep = 1.0\nstride = 2\n\n[density]\nradii = [4.0]\n");
    let out = run("density", &cfg, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("stride"));
}

#[test]
fn out_of_range_parameter_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "[spectrum]\nintervals = [[0.0, 1.0]]\n[pointset]\nkind = \"lattice\"\nstep = 1.0\n[frames.residual]\neps = 2.0\nr = 4.0\nr_truncation = 8.0\n",
    );
    assert_eq!(run("frames", &cfg, &[]).status.code(), Some(2));
}

#[test]
fn frame_suite_on_integers() {
    let r = report("frames", &shipped("frames_integers.toml"), &[]);
    assert!((f(&r, "/payload/measure/m_plus_est") - 1.0).abs() < 1e-3);
    assert!((f(&r, "/payload/bounds/a_est") - 1.0).abs() < 0.05);
    assert!((f(&r, "/payload/bounds/b_est") - 1.0).abs() < 0.05);
    assert!((f(&r, "/payload/density_functional/value") - 1.0).abs() < 0.05);
    assert!(f(&r, "/payload/critical/best_min_diag") >= 0.95);
    assert!(f(&r, "/payload/residual/best_measure") <= 0.1);
    assert!((f(&r, "/payload/gram_spectrum/lambda_min") - 1.0).abs() < 1e-9);
}

#[test]
fn frame_suite_on_half_integers() {
    let r = report("frames", &shipped("frames_half_integers.toml"), &[]);
    assert!((f(&r, "/payload/measure/m_plus_est") - 0.5).abs() < 0.05);
    assert!((f(&r, "/payload/bounds/a_est") - 2.0).abs() < 0.1);
    assert!((f(&r, "/payload/bounds/b_est") - 2.0).abs() < 0.1);
}

#[test]
fn frame_suite_on_even_integers() {
    let r = report("frames", &shipped("frames_even.toml"), &[]);
    assert!((f(&r, "/payload/density_functional/value") - 0.5).abs() < 0.05);
    assert!(f(&r, "/payload/residual/best_measure") >= 1.0);
}

#[test]
fn two_interval_basis() {
    let r = report("frames", &shipped("frames_two_intervals.toml"), &[]);
    assert!((f(&r, "/payload/measure/m_plus_est") - 1.0).abs() < 0.05);
    assert!((f(&r, "/payload/gram_spectrum/lambda_max") - 2.0).abs() < 1e-8);
    assert!((f(&r, "/payload/gram_spectrum/lambda_min") - 2.0).abs() < 1e-8);
}

#[test]
fn hull_on_integers() {
    let r = report("hull", &shipped("hull_integers.toml"), &[]);
    assert!((f(&r, "/payload/match/result/epsilon_achieved") - 0.01).abs() < 1e-12);
    assert_eq!(r["payload"]["match"]["result"]["unmatched_a"], serde_json::json!([]));
    assert!(!r["payload"]["orbit"]["candidate_limit"].is_null());
    let norms = r["payload"]["sot"]["norms"].as_array().unwrap();
    assert!(norms.last().unwrap().as_f64().unwrap() < 1e-2);
}

#[test]
fn hull_on_fibonacci() {
    let r = report("hull", &shipped("hull_fibonacci.toml"), &[]);
    assert!(r["payload"]["repetitivity"]["count"].as_u64().unwrap() > 0);
    assert!(f(&r, "/payload/repetitivity/max_gap") <= 30.0);
    assert!(!r["payload"]["orbit"]["candidate_limit"].is_null());
}

#[test]
fn reports_are_bit_identical_across_runs_and_threads() {
    for (sub, cfg) in [("frames", "frames_integers.toml"), ("hull", "hull_fibonacci.toml"), ("density", "density_fibonacci.toml")] {
        let a = run(sub, &shipped(cfg), &["--threads", "1"]);
        let b = run(sub, &shipped(cfg), &["--threads", "4"]);
        let c = run(sub, &shipped(cfg), &[]);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{cfg}");
        assert_eq!(a.stdout, c.stdout, "{cfg}");
    }
}

#[test]
fn reports_round_trip_byte_for_byte() {
    for (sub, cfg) in [("frames", "frames_integers.toml"), ("hull", "hull_integers.toml"), ("density", "density_integers.toml")] {
        let out = run(sub, &shipped(cfg), &[]);
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        let again = serde_json::to_string_pretty(&v).unwrap() + "\n";
        assert_eq!(again.as_bytes(), out.stdout.as_slice(), "{cfg}");
    }
}

#[test]
fn config_hash_ignores_key_order() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_config(&dir, "[pointset]\nkind = \"lattice\"\nstep = 1.0\n[density]\nradii = [4.0, 8.0]\n");
    let ra = report("density", &a, &[]);
    let dir2 = tempfile::tempdir().unwrap();
    let b = write_config(&dir2, "# same experiment\n[density]\nradii = [4.0, 8.0]\n[pointset]\nstep = 1.0\nkind = \"lattice\"\n");
    let rb = report("density", &b, &[]);
    assert_eq!(ra["config_hash"], rb["config_hash"]);
}

#[test]
fn seed_override_changes_perturbed_sets() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "[pointset]\nkind = \"perturbed\"\namplitude = 0.2\nseed = 1\nbase = { kind = \"lattice\", step = 1.0 }\n[density]\nradii = [8.0]\n",
    );
    let a = report("density", &cfg, &[]);
    let b = report("density", &cfg, &["--seed", "2"]);
    let c = report("density", &cfg, &["--seed", "2"]);
    assert_ne!(a["config_hash"], b["config_hash"]);
    assert_ne!(a["payload"]["sep"], b["payload"]["sep"]);
    assert_eq!(b, c);
}

#[test]
fn csv_side_files_and_timing() {
    let dir = tempfile::tempdir().unwrap();
    let csv_dir = dir.path().join("csv");
    let r = report("frames", &shipped("frames_half_integers.toml"), &["--csv", csv_dir.to_str().unwrap(), "--timing"]);
    assert!(f(&r, "/timing/wall_seconds") >= 0.0);
    let text = std::fs::read_to_string(csv_dir.join("frames_dual_diag.csv")).unwrap();
    assert!(text.starts_with("center,point,value,core\n"));
    assert!(csv_dir.join("frames_measure.csv").exists());
}

#[test]
fn resource_limit_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "[spectrum]\nintervals = [[0.0, 1.0]]\n[pointset]\nkind = \"lattice\"\nstep = 1.0\n[frames.gram_spectrum]\nr = 5000.0\n",
    );
    let out = run("frames", &cfg, &[]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("9999"));
}

#[test]
fn degenerate_input_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "[spectrum]\nintervals = [[0.0, 1.0]]\n[pointset]\nkind = \"explicit\"\npoints = [100.0]\n[frames.measure]\nr = 4.0\ntrim = 1.0\n",
    );
    assert_eq!(run("frames", &cfg, &[]).status.code(), Some(4));
}

#[test]
fn version_subcommand() {
    let out = bin().arg("version").output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("frame-lab "));
}

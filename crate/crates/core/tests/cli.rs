use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const SIMPLE: &str = r#"
version = 1

[signal]
kind = "random"
L = 1.0
R = 1.0

[noise]
N = 0.05
preset = "constant"

[run]
dt = 0.01
duration = 3.0
seed = 3

[[engines]]
kind = "adaptive"
n_bar = 0.08

[[engines]]
kind = "fd"

[[engines]]
kind = "red"
lambda1 = 3.0
lambda2 = 1.1
"#;

fn robdiff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_robdiff")).args(args).env_remove("ROBDIFF_OUT_DIR").output().expect("spawn")
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("scenario.toml");
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn simulate_writes_trace_summary_and_manifest() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), SIMPLE);
    let out = dir.path().join("out");
    let o = robdiff(&["simulate", "-c", &cfg, "-o", out.to_str().unwrap(), "--svg"]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["trace.csv", "summary.csv", "manifest.toml", "report.svg"] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 301);
    assert!(trace.starts_with("k,t,u,f,fdot,eta,adaptive0_y"));
}

#[test]
fn missing_accel_bound_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), &SIMPLE.replace("L = 1.0\n", ""));
    let o = robdiff(&["simulate", "-c", &cfg, "-o", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("config-error\tsignal.L"), "{}", stderr(&o));
}

#[test]
fn unreadable_config_is_an_io_error() {
    let dir = TempDir::new().unwrap();
    let o = robdiff(&["simulate", "-c", "/nonexistent/scenario.toml", "-o", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn seed_override_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), SIMPLE);
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let o = robdiff(&["simulate", "-c", &cfg, "-o", out.to_str().unwrap(), "--seed", seed]);
        assert!(o.status.success(), "{}", stderr(&o));
        (fs::read(out.join("trace.csv")).unwrap(), fs::read(out.join("manifest.toml")).unwrap())
    };
    let a = run("a", "7");
    assert_eq!(a, run("b", "7"));
    assert_ne!(a.0, run("c", "8").0);
}

#[test]
fn sweep_rejects_bad_grids() {
    let dir = TempDir::new().unwrap();
    for (text, key) in [
        ("version = 1\n[sweep]\nL = [1.0]\nN = [0.02]\ndt = [0.01]\ngamma_bar = 3.0\n", "sweep.gamma_bar"),
        ("version = 1\n[sweep]\nL = []\nN = [0.02]\ndt = [0.01]\n", "sweep.L"),
    ] {
        let cfg = write_config(dir.path(), text);
        let o = robdiff(&["sweep", "-c", &cfg, "-o", dir.path().to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(3));
        assert!(stderr(&o).contains(key), "{}", stderr(&o));
    }
}

#[test]
fn sweep_small_grid_passes() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "version = 1\n[sweep]\nL = [1.0]\nN = [0.02]\ndt = [0.02]\nn_bar = 0.08\ndraws = 20\n",
    );
    let o = robdiff(&["sweep", "-c", &cfg, "-o", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(dir.path().join("sweep.csv")).unwrap().lines().count(), 2);
}

fn certificate(dir: &Path) -> toml::Table {
    fs::read_to_string(dir.join("certificate.toml")).unwrap().parse().unwrap()
}

#[test]
fn adversary_exports_certificates() {
    let dir = TempDir::new().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = robdiff(&["adversary", "exact-trap", "--L", "1", "--N", "1", "-o", d]);
    assert!(o.status.success(), "{}", stderr(&o));
    let e = certificate(dir.path())["error"].as_float().unwrap();
    assert!((e - 2.0 * 2f64.sqrt()).abs() < 1e-4);

    let o = robdiff(&["adversary", "causal", "--L", "1", "--N", "1", "-o", d]);
    assert!(o.status.success());
    assert_eq!(certificate(dir.path())["error"].as_float(), Some(2.0));
    assert!(dir.path().join("trace_neg.csv").is_file());

    let o = robdiff(&["adversary", "sampled-zero", "--n", "4", "-o", d]);
    assert!(o.status.success());
    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 5);
    assert_eq!(certificate(dir.path())["step"].as_integer(), Some(3));
}

#[test]
fn fig4_writes_benchmark_table() {
    let dir = TempDir::new().unwrap();
    let o = robdiff(&["fig4", "-o", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = fs::read_to_string(dir.path().join("benchmark.csv")).unwrap();
    assert!(table.contains("adaptive,0.79"), "{table}");
    assert!(table.contains("red_1.1") && table.contains("red_1.96"));
}

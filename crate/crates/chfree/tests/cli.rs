//! End-to-end runs of the `chfree` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chfree::ExperimentConfig;

const SMALL: &str = r#"
pipeline = "all"
seed = 3

[output]
dir = "out"
snapshot_stride = 1

[model]
alpha = 0.1
beta = 0.1
potential = { kind = "quartic" }
proliferation = { kind = "smooth_ramp", p0 = 1.0, width = 0.5 }

[grid]
dim = 1
n = [16]
extents = [1.0]

[time]
t_final = 1.0
nt = 16

[initial]
preset = "tanh_front"
width = 0.1
position = 0.5

[cost]
b0 = 1e-3
b1 = 1.0
b2 = 0.0
b3 = 1.0
b4 = 0.0
b5 = 0.01
b6 = 1.0
tau_star = 0.5
phi_q = { kind = "equilibrium", c = 0.0 }
sigma_q = { kind = "equilibrium", c = 0.0 }
phi_omega = { kind = "constant", value = -1.0 }

[bounds]
lower = { kind = "constant", value = 0.0 }
upper = { kind = "constant", value = 2.0 }

[verification]
tau = 0.4321
gradient_directions = 2
duality_directions = 3
lipschitz_pairs = 2
"#;

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path
}

fn chfree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chfree")).args(args).output().unwrap()
}

fn run(cmd: &str, config: &Path, out: &Path) -> Output {
    chfree(&[cmd, config.to_str().unwrap(), "--out-dir", out.to_str().unwrap(), "--threads", "2"])
}

fn text(o: &Output) -> String {
    format!("{}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr))
}

fn repo_config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

#[test]
fn verify_suite_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run("verify", &repo_config("verify-suite.toml"), tmp.path());
    let out = text(&o);
    assert_eq!(o.status.code(), Some(0), "{out}");
    for check in ["gradient", "duality", "lipschitz", "mass"] {
        assert!(out.contains(&format!("PASS {check}")), "{out}");
        assert!(tmp.path().join("verify").join(format!("{check}.toml")).is_file());
    }
    assert!(tmp.path().join("verify/summary.json").is_file());
}

#[test]
fn all_pipeline_writes_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("out");
    let o = run("run", &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    for f in [
        "resolved_config.toml",
        "run_summary.toml",
        "simulate/state_manifest.toml",
        "simulate/diagnostics.csv",
        "simulate/breakdown.csv",
        "optimize/history.csv",
        "optimize/breakdown.csv",
        "optimize/control_manifest.toml",
        "optimize/state_manifest.toml",
        "optimize/adjoint_manifest.toml",
        "verify/summary.json",
    ] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let resolved = fs::read_to_string(out.join("resolved_config.toml")).unwrap();
    let reparsed = ExperimentConfig::from_toml(&resolved).unwrap();
    assert_eq!(reparsed.resolved_toml(), resolved);
}

#[test]
fn resolved_config_round_trips() {
    for name in ["baseline.toml", "verify-suite.toml", "logarithmic.toml", "relaxed-2d.toml"] {
        let cfg = ExperimentConfig::from_path(&repo_config(name)).unwrap();
        let again = ExperimentConfig::from_toml(&cfg.resolved_toml()).unwrap();
        assert_eq!(cfg, again, "{name}");
    }
}

#[test]
fn non_positive_beta_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &SMALL.replace("beta = 0.1", "beta = 0.0"));
    let o = run("run", &cfg, &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o).contains("alpha and beta must be positive"), "{}", text(&o));
}

#[test]
fn inverted_bounds_are_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &SMALL.replace("value = 0.0 }\nupper", "value = 3.0 }\nupper"));
    let o = run("run", &cfg, &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(2), "{}", text(&o));
}

#[test]
fn missing_physics_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &SMALL.replace("alpha = 0.1\n", ""));
    let o = run("run", &cfg, &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    let cfg = write_config(tmp.path(), &SMALL.replace("[time]", "[time]\nunknown = 1"));
    let o = run("run", &cfg, &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    let o = run("run", &tmp.path().join("absent.toml"), &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn newton_failure_is_a_solver_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &format!("{SMALL}\n[optimizer]\nnewton_max_iter = 1\n"));
    let o = run("simulate", &cfg, &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(3), "{}", text(&o));
}

#[test]
fn failed_check_is_a_verification_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &format!("{SMALL}gradient_tol = 1e-300\n"));
    let o = run("verify", &cfg, &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(4), "{}", text(&o));
    assert!(text(&o).contains("FAIL gradient"), "{}", text(&o));
}

#[test]
fn reruns_are_bitwise_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(run("run", &cfg, &a).status.code(), Some(0));
    assert_eq!(chfree(&["run", cfg.to_str().unwrap(), "--out-dir", b.to_str().unwrap(), "--threads", "1"]).status.code(), Some(0));
    for f in [
        "optimize/history.csv",
        "optimize/control/u_00000.chf",
        "optimize/state/phi_00016.chf",
        "simulate/diagnostics.csv",
        "verify/gradient.toml",
        "verify/summary.json",
    ] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
}

#[test]
fn seed_override_changes_random_initial_data() {
    let tmp = tempfile::tempdir().unwrap();
    let body = SMALL
        .replace("preset = \"tanh_front\"\nwidth = 0.1\nposition = 0.5", "preset = \"random_interior\"\namplitude = 0.3")
        .replace("pipeline = \"all\"", "pipeline = \"simulate\"");
    let cfg = write_config(tmp.path(), &body);
    let phi0 = |out: &Path, seed: &str| {
        let o = chfree(&["simulate", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap(), "--seed", seed]);
        assert_eq!(o.status.code(), Some(0), "{}", text(&o));
        fs::read(out.join("simulate/state/phi_00000.chf")).unwrap()
    };
    let a = phi0(&tmp.path().join("a"), "1");
    let b = phi0(&tmp.path().join("b"), "1");
    let c = phi0(&tmp.path().join("c"), "2");
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn snapshots_feed_back_as_inputs() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    let cfg = write_config(tmp.path(), &SMALL.replace("pipeline = \"all\"", "pipeline = \"simulate\""));
    assert_eq!(run("simulate", &cfg, &first).status.code(), Some(0));
    let state = first.join("simulate");
    let manifest = state.join("state_manifest.toml");
    let m = chfree::io::Manifest::read(&manifest).unwrap();
    assert_eq!(m.nodes.len(), 17);

    let grid = m.grid().unwrap();
    let phi16 = chfree::io::read_snapshot(&state.join("state/phi_00016.chf"), grid).unwrap();
    let bytes = chfree::io::encode_snapshot(&phi16);
    assert_eq!(chfree::io::decode_snapshot(&bytes, grid).unwrap(), phi16);

    // Restart from the final frame and track the first run.
    let restart = SMALL
        .replace(
            "preset = \"tanh_front\"\nwidth = 0.1\nposition = 0.5",
            &format!(
                "preset = \"snapshot\"\nmu = \"{0}/state/mu_00016.chf\"\nphi = \"{0}/state/phi_00016.chf\"\nsigma = \"{0}/state/sigma_00016.chf\"",
                state.display()
            ),
        )
        .replace(
            "phi_q = { kind = \"equilibrium\", c = 0.0 }",
            &format!("phi_q = {{ kind = \"trajectory\", manifest = \"{}\", component = \"phi\" }}", manifest.display()),
        )
        .replace("pipeline = \"all\"", "pipeline = \"simulate\"");
    let cfg = write_config(tmp.path(), &restart);
    let second = tmp.path().join("second");
    let o = run("simulate", &cfg, &second);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    let phi0 = fs::read(second.join("simulate/state/phi_00000.chf")).unwrap();
    assert_eq!(phi0, fs::read(state.join("state/phi_00016.chf")).unwrap());

    let truncated = tmp.path().join("bad.chf");
    fs::write(&truncated, &bytes[..bytes.len() - 8]).unwrap();
    assert!(chfree::io::read_snapshot(&truncated, grid).is_err());
    let bad = restart.replace(&format!("{}/state/mu_00016.chf", state.display()), truncated.to_str().unwrap());
    let cfg = write_config(tmp.path(), &bad);
    assert_eq!(run("simulate", &cfg, &tmp.path().join("third")).status.code(), Some(2));
}

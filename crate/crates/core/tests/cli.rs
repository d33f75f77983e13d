//! End-to-end runs of the `lhg` binary.

use laguerre_hypergroup::fixtures::Fixture;
use laguerre_hypergroup::io;
use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn lhg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lhg")).args(args).output().expect("lhg runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn special_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = lhg(&["verify", "special", "--out", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = read_json(&dir.path().join("special.json"));
    assert_eq!(report["pass"], Value::Bool(true));
    assert_eq!(report["schema_version"], 1);
    assert!(dir.path().join("special.log").exists());
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        assert_eq!(code(&lhg(&["verify", "special", "--out", d.to_str().unwrap()])), 0);
    }
    assert_eq!(std::fs::read(a.join("special.json")).unwrap(), std::fs::read(b.join("special.json")).unwrap());
}

#[test]
fn configuration_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(code(&lhg(&["verify", "all", "--set", "n_x=8", "--out", out])), 2);
    assert_eq!(code(&lhg(&["verify", "all", "--set", "no_such_key=1", "--out", out])), 2);
    assert_eq!(code(&lhg(&["frobnicate"])), 2);
    assert_eq!(code(&lhg(&["verify", "special", "--tol-scale", "-1", "--out", out])), 2);
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "m_max = 2\n").unwrap();
    assert_eq!(code(&lhg(&["--config", cfg.to_str().unwrap(), "verify", "basis", "--out", out])), 2);
    assert!(!dir.path().join("all.json").exists());
}

#[test]
fn help_exits_0() {
    let o = lhg(&["--help"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("verify"));
}

#[test]
fn failed_checks_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = lhg(&["verify", "special", "--tol-scale", "1e-300", "--out", out]);
    assert_eq!(code(&o), 1);
    let report = read_json(&dir.path().join("special.json"));
    assert_eq!(report["pass"], Value::Bool(false));
}

#[test]
fn heat_kernel_fixture_round_trips_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("h");
    let o = lhg(&["fixture", "heat-kernel", "--alpha", "0", "--s", "0.5", "--out", stem.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let read = io::read_grid_function(&stem).unwrap();
    assert_eq!(read, Fixture::HeatKernel { alpha: 0.0, s: 0.5 }.build().unwrap());
    let again = dir.path().join("h2");
    io::write_grid_function(&read, &again).unwrap();
    let (c1, j1) = io::pair_paths(&stem);
    let (c2, j2) = io::pair_paths(&again);
    assert_eq!(std::fs::read(c1).unwrap(), std::fs::read(c2).unwrap());
    assert_eq!(std::fs::read(j1).unwrap(), std::fs::read(j2).unwrap());
}

#[test]
fn bump_fixture_has_compact_support() {
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("bump");
    assert_eq!(code(&lhg(&["fixture", "bump", "--radius", "1", "--out", stem.to_str().unwrap()])), 0);
    let f = io::read_grid_function(&stem).unwrap();
    let xs = &f.radial.x_nodes;
    let dx = xs.windows(2).fold(0.0_f64, |m, w| m.max(w[1] - w[0]));
    let step = dx.max(f.time.step);
    for i in 0..f.n_x() {
        for j in 0..f.n_t() {
            if xs[i].hypot(f.time.node(j)) > 1.0 + step {
                assert_eq!(f.at(i, j).norm(), 0.0);
            }
        }
    }
}

#[test]
fn packet_fixture_transforms_to_its_peak() {
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("packet");
    let hat = dir.path().join("packet_hat");
    let s = stem.to_str().unwrap();
    assert_eq!(code(&lhg(&["fixture", "psi-packet", "--lambda", "1", "--m", "2", "--out", s])), 0);
    let o = lhg(&["transform", "--input", s, "--output", hat.to_str().unwrap(), "--m-max", "8", "--lambda-max", "3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let fh = io::read_spectral_function(&hat).unwrap();
    let (mut best, mut at) = (0.0, (0.0, 0));
    for l in 0..fh.grid.n_lambda() {
        for m in 0..fh.grid.n_m() {
            if fh.at(l, m).norm() > best {
                best = fh.at(l, m).norm();
                at = (fh.grid.lambda_nodes[l], m);
            }
        }
    }
    assert_eq!(at.1, 2);
    assert!((at.0 - 1.0).abs() < 0.1, "{at:?}");
    // and back onto the original grids
    let back = dir.path().join("back");
    let o = lhg(&[
        "transform", "--direction", "inverse", "--input", hat.to_str().unwrap(), "--grid", s,
        "--output", back.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let f = io::read_grid_function(&stem).unwrap();
    let g = io::read_grid_function(&back).unwrap();
    assert!(f.same_grid(&g));
}

#[test]
fn miyachi_suite_reports_the_three_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = lhg(&["verify", "miyachi", "--set", "alpha_set=0", "--out", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = read_json(&dir.path().join("miyachi.json"));
    let sc = &report["details"]["miyachi.scenarios.alpha=0"];
    assert_eq!(sc["divergent"]["conclusion"], "hypotheses_not_met");
    assert_eq!(sc["bounded"]["conclusion"], "inconclusive");
    assert_eq!(sc["zero"]["conclusion"], "must_vanish");
}

#[test]
fn miyachi_command_certifies_a_grid_function() {
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("h");
    let s = stem.to_str().unwrap();
    assert_eq!(code(&lhg(&["fixture", "heat-kernel", "--s", "1", "--out", s])), 0);
    let report = dir.path().join("cert.json");
    let o = lhg(&["miyachi", "--b", "0.05", "--big-a", "0.25", "--input", s, "--report", report.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&report);
    assert!(r["conclusion"].is_string());
}

#[test]
fn tables_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let o = lhg(&["tables", "--out", dir.path().to_str().unwrap(), "--m-max", "3"]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(dir.path().join("laguerre.csv")).unwrap();
    assert!(text.lines().count() > 4);
    assert!(dir.path().join("bessel.csv").exists());
}

#[test]
fn heat_command_writes_report_and_kernel() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("heat.json");
    let o = lhg(&["heat", "--alpha", "0", "--s", "1", "--out", report.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&report);
    assert_eq!(r["schema_version"], 1);
    let kernel = io::read_grid_function(&dir.path().join("heat_kernel")).unwrap();
    assert!(kernel.max_abs() > 0.0);
}

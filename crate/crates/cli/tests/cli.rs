use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn hypdel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypdel"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn malformed_mesh_reports_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("bad.mesh");
    fs::write(&mesh, "surface-complex v1\nvertex 0\nface 0 : 0-0#0, 0-0 1\n").unwrap();
    let out = hypdel(&["inner", "--mesh", path_str(&mesh)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("3:17:"), "{}", stderr(&out));
}

#[test]
fn capped_inner_solve_fails_with_code_two() {
    let mesh = fixtures().join("octagon_with_center.mesh");
    let out = hypdel(&["inner", "--mesh", path_str(&mesh), "--init", "random", "--max-iter", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("did not converge"), "{}", stderr(&out));
}

#[test]
fn torus_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("torus.mesh");
    fs::write(&mesh, "surface-complex v1\nvertex 0\nface 0 : 0-0#0, 0-0#1, 0-0#0, 0-0#1\n").unwrap();
    let out = hypdel(&["optimize", "--mesh", path_str(&mesh)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("genus 1"), "{}", stderr(&out));
}

#[test]
fn bad_relator_in_rep_file() {
    let dir = tempfile::tempdir().unwrap();
    let rep = dir.path().join("bent.rep");
    let mut text = String::from("holonomy v1\n");
    for k in 1..=4 {
        text.push_str(&format!("gen {k}\n1 0 0\n0 1 0\n0 0 1\n"));
    }
    text.push_str("relator x1 x2 X1 X2 x3 x4 X3 X4\n");
    // a rotation in the first generator breaks the relator
    let (s, c) = 0.1f64.sin_cos();
    text = text.replacen("gen 1\n1 0 0\n0 1 0\n", &format!("gen 1\n{c:e} {:e} 0\n{s:e} {c:e} 0\n", -s), 1);
    fs::write(&rep, text).unwrap();
    let cfg = dir.path().join("run.conf");
    let mesh = fixtures().join("standard_octagon.mesh");
    fs::write(&cfg, format!("mesh = {}\nrep = bent.rep\n", mesh.display())).unwrap();
    let out = hypdel(&["inner", "--config", path_str(&cfg)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("relator"), "{}", stderr(&out));
}

#[test]
fn optimize_and_render_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixtures().join("optimize.conf");
    let mut reports = Vec::new();
    let mut svgs = Vec::new();
    for k in 0..2 {
        let state = dir.path().join(format!("run{k}.state"));
        let svg = dir.path().join(format!("run{k}.svg"));
        let out = hypdel(&["optimize", "--config", path_str(&cfg), "--out-state", path_str(&state)]);
        assert!(out.status.success(), "{}", stderr(&out));
        reports.push(out.stdout);
        let out = hypdel(&["render", "--state", path_str(&state), "--svg", path_str(&svg)]);
        assert!(out.status.success(), "{}", stderr(&out));
        svgs.push(fs::read(&svg).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
    assert_eq!(svgs[0], svgs[1]);
    let report = String::from_utf8(reports[0].clone()).unwrap();
    assert!(report.contains("\ncertified=true\n"), "{report}");
}

#[test]
fn render_needs_a_state() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.state");
    let out = hypdel(&["render", "--state", path_str(&missing)]);
    assert_eq!(out.status.code(), Some(3));
    let empty = dir.path().join("empty.state");
    fs::write(&empty, "").unwrap();
    let out = hypdel(&["render", "--state", path_str(&empty)]);
    assert_eq!(out.status.code(), Some(3));
    let out = hypdel(&["render"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn round_trip_config_certifies_at_the_start() {
    let out = hypdel(&["optimize", "--config", path_str(&fixtures().join("roundtrip.conf"))]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report = String::from_utf8(out.stdout).unwrap();
    assert!(report.contains("\niterations: 0\n"), "{report}");
    assert!(report.contains("\ncertified=true\n"), "{report}");
}

#[test]
fn unknown_flag_is_an_input_error() {
    let out = hypdel(&["inner", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(3));
}

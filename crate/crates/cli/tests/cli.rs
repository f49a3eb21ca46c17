use std::process::Command;

use dpg_adapt::mesh::{read_mesh, unit_square, write_mesh, write_metric};
use dpg_adapt::metric::Metric;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_dpg-adapt"));
    c.env("RUST_LOG", "warn");
    c
}

#[test]
fn solve_prints_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "solve",
            "--case",
            "boundary-layer",
            "--p",
            "1",
            "--divisions",
            "3",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("cycle,"));
    assert!(lines[1].starts_with("0,18,"));
    assert!(dir.path().join("solve.csv").exists());
}

#[test]
fn adapt_runs_cycles() {
    let out = bin()
        .args([
            "adapt",
            "--p",
            "1",
            "--cycles",
            "2",
            "--n0",
            "40",
            "--divisions",
            "3",
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 3);
}

#[test]
fn remesh_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = unit_square(2).unwrap();
    let (mp, sp, op) = (
        dir.path().join("in.mesh"),
        dir.path().join("in.sol"),
        dir.path().join("out.mesh"),
    );
    write_mesh(&mesh, &mp).unwrap();
    let m = Metric::new(300.0, 0.0, 300.0).unwrap();
    write_metric(&vec![m; mesh.num_vertices()], &sp).unwrap();
    let out = bin()
        .arg("remesh")
        .args([
            "--mesh".as_ref(),
            mp.as_os_str(),
            "--metric".as_ref(),
            sp.as_os_str(),
            "--out".as_ref(),
            op.as_os_str(),
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let result = read_mesh(&op).unwrap();
    assert!(result.num_elements() > mesh.num_elements());
    assert!((result.total_area() - 1.0).abs() < 1e-12);
}

#[test]
fn errors_map_to_exit_codes() {
    let out = bin().args(["solve", "--case", "nope"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));
    let out = bin()
        .args([
            "remesh",
            "--mesh",
            "/nonexistent.mesh",
            "--metric",
            "x",
            "--out",
            "y",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["solve", "--norm", "fancy"]).output().unwrap();
    assert!(!out.status.success());
}

use std::fs;
use std::process::Command;

use stokes_bddc::bench::{parse_csv, CSV_HEADER};
use stokes_bddc::mesh::read_mesh;

fn bench() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_bench"));
    c.env("RUST_LOG", "error");
    c
}

const SMALL: &str = "\
family = cvt
cells = 120
nsub = 2x2
nsink = 2
coarse = frugal, first
scaling = deluxe
tol = 100
rtol = 1e-8
";

#[test]
fn run_writes_csv_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.cfg");
    fs::write(&cfg, SMALL).unwrap();
    let report = dir.path().join("report.txt");
    let out = bench()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--report")
        .arg(&report)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv.lines().next(), Some(CSV_HEADER));
    let rows = parse_csv(&csv).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.cells == 120 && r.nsub == 4 && r.iters > 0));
    let text = fs::read_to_string(&report).unwrap();
    assert!(text.contains("[config]") && text.contains("[run 1]") && text.contains("residual_history"));

    let again = bench().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(String::from_utf8(again.stdout).unwrap(), csv);
}

#[test]
fn bad_config_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "cells = 100\nflavour = strange\n").unwrap();
    let out = bench().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("flavour"));
    let missing = bench()
        .args(["run", "--config", "/nonexistent/x.cfg"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn mesh_and_svg_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let mesh_path = dir.path().join("m.mesh");
    let out = bench()
        .args(["mesh", "--family", "rnd", "--cells", "50", "--seed", "3", "--out"])
        .arg(&mesh_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mesh = read_mesh(&mesh_path).unwrap();
    assert_eq!(mesh.n_cells(), 50);

    for field in ["viscosity", "partition", "speed"] {
        let svg = dir.path().join(format!("{field}.svg"));
        let out = bench()
            .args(["svg", "--field", field, "--nsub", "4", "--nsink", "3", "--mesh"])
            .arg(&mesh_path)
            .arg("--out")
            .arg(&svg)
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{field}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let text = fs::read_to_string(&svg).unwrap();
        assert!(text.starts_with("<svg") || text.starts_with("<?xml"), "{field}");
        assert_eq!(text.matches("data-cell=").count(), 50, "{field}");
    }
}

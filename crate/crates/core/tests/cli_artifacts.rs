//! Artifact determinism, round-trips, and process exit codes.

mod common;

use std::path::PathBuf;
use std::process::Command;

use helmpseudo::cli::{run_gmres, run_psgrid, run_regions, Problem, RunConfig, SigmaRule};
use helmpseudo::pseudospectrum::{isolines_from_csv, GridDump};

fn tiny_poisson_config(out: PathBuf) -> RunConfig {
    let mut cfg = RunConfig::default_for(Problem::Poisson);
    cfg.level = 1;
    cfg.epsilons = vec![0.2];
    cfg.grid_n = 40;
    cfg.max_depth = 2;
    cfg.budget = 50_000;
    cfg.out_dir = out;
    cfg
}

#[test]
fn psgrid_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg1 = tiny_poisson_config(dir.path().join("a"));
    let cfg2 = tiny_poisson_config(dir.path().join("b"));
    run_psgrid(&cfg1).unwrap();
    run_psgrid(&cfg2).unwrap();
    for name in ["grid.csv", "isolines.csv", "psgrid.svg", "config.txt"] {
        let a = std::fs::read(cfg1.out_dir.join(name)).unwrap();
        let b = std::fs::read(cfg2.out_dir.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn artifact_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_poisson_config(dir.path().to_path_buf());
    let out = run_psgrid(&cfg).unwrap();
    let grid_csv = std::fs::read_to_string(cfg.out_dir.join("grid.csv")).unwrap();
    let dump = GridDump::from_csv(&grid_csv).unwrap();
    assert_eq!(dump, out.grid.to_dump());
    let iso_csv = std::fs::read_to_string(cfg.out_dir.join("isolines.csv")).unwrap();
    let iso = isolines_from_csv(&iso_csv).unwrap();
    assert_eq!(iso, out.isolines);
    // The config snapshot reproduces the effective configuration.
    let snap = std::fs::read_to_string(cfg.out_dir.join("config.txt")).unwrap();
    let mut cfg2 = RunConfig::default_for(Problem::Helmholtz);
    cfg2.apply_file(&snap).unwrap();
    assert_eq!(cfg2.problem, Problem::Poisson);
    assert_eq!(cfg2.level, 1);
    assert_eq!(cfg2.epsilons, vec![0.2]);
}

#[test]
fn regions_command_emits_parseable_records() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = tiny_poisson_config(dir.path().to_path_buf());
    cfg.epsilons = vec![0.05, 0.2];
    let regions = run_regions(&cfg).unwrap();
    assert!(!regions.is_empty());
    let text = std::fs::read_to_string(cfg.out_dir.join("regions.txt")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), regions.len());
    for line in lines {
        let variant = line.split(',').next().unwrap();
        assert!(
            ["disc", "dilated_polygon", "strip", "lemma41"].contains(&variant),
            "unknown region variant in `{line}`"
        );
        assert!(line.contains("provenance="));
        assert!(line.contains("kind="));
    }
}

#[test]
fn gmres_record_has_monotone_history_and_bound_columns() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::default_for(Problem::ShiftedLaplace);
    cfg.level = 2;
    cfg.kappa = 4.0 * std::f64::consts::PI;
    cfg.sigma_rule = SigmaRule::HalfKappa;
    cfg.tol = 1e-8;
    cfg.out_dir = dir.path().to_path_buf();
    let (record, status) = run_gmres(&cfg).unwrap();
    assert_eq!(status.exit_code(), 0);
    assert!(record.converged);
    for w in record.residual_history.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-12));
    }
    assert_eq!(record.bound_trajectory.len(), record.residual_history.len());
    assert!(record.predicted_iterations.is_some());
    let csv = std::fs::read_to_string(cfg.out_dir.join("residuals.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "iteration,residual,bound");
    assert_eq!(csv.lines().count(), record.residual_history.len() + 1);
}

#[test]
fn exit_codes_for_success_warning_and_error() {
    let exe = env!("CARGO_BIN_EXE_helmpseudo");
    let dir = tempfile::tempdir().unwrap();

    let ok = Command::new(exe)
        .args(["mesh", "--level", "1", "--out"])
        .arg(dir.path().join("m"))
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0), "mesh run failed: {ok:?}");

    // Tiny budget forces the warning path (exit 2) with partial artifacts.
    let warn = Command::new(exe)
        .args([
            "psgrid",
            "--problem",
            "poisson",
            "--level",
            "1",
            "--eps",
            "0.2",
            "--grid-n",
            "40",
            "--max-depth",
            "6",
            "--budget",
            "100",
            "--out",
        ])
        .arg(dir.path().join("w"))
        .output()
        .unwrap();
    assert_eq!(warn.status.code(), Some(2), "expected warning exit: {warn:?}");
    assert!(dir.path().join("w/grid.csv").exists(), "partial artifacts still written");

    let err = Command::new(exe)
        .args(["psgrid", "--problem", "nonsense"])
        .output()
        .unwrap();
    assert_eq!(err.status.code(), Some(1));

    let err2 = Command::new(exe)
        .args(["reproduce", "fig9"])
        .output()
        .unwrap();
    assert_eq!(err2.status.code(), Some(1));
}

#[test]
fn mesh_command_writes_loadable_mesh() {
    let exe = env!("CARGO_BIN_EXE_helmpseudo");
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(exe)
        .args(["mesh", "--level", "2", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("mesh.txt")).unwrap();
    let mesh = helmpseudo::mesh::Mesh::from_text(&text).unwrap();
    assert_eq!(mesh.level, 2);
    assert!((mesh.total_area() - 3.0).abs() < 1e-12);
}

#[test]
fn assemble_command_writes_matrix_market() {
    let exe = env!("CARGO_BIN_EXE_helmpseudo");
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(exe)
        .args([
            "assemble",
            "--problem",
            "shifted-laplace",
            "--level",
            "1",
            "--kappa",
            "4pi",
            "--sigma-rule",
            "halfk2",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    for name in ["K.mtx", "M.mtx", "Mb.mtx", "A.mtx", "B.mtx", "load.csv"] {
        assert!(dir.path().join(name).exists(), "{name} missing");
    }
    let header = std::fs::read_to_string(dir.path().join("A.mtx")).unwrap();
    assert!(header.starts_with("%%MatrixMarket matrix coordinate complex general"));
    let load = std::fs::read_to_string(dir.path().join("load.csv")).unwrap();
    assert!(load.starts_with("re,im"));
}

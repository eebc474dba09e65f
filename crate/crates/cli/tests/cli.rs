use std::path::Path;
use std::process::Command;

use spinguide::ensemble::{EnsembleSpec, RingSpec};
use spinguide::scenarios::{preset, run_scenario};
use spinguide_cli::output::{
    self, read_events, read_manifest, read_trajectories, sha256_file, trajectory_rows, EVENTS, MANIFEST, TRAJECTORIES,
};
use spinguide_cli::{parse_config_str, svg, write_bundle};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spinguide"))
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap()
}

#[test]
fn fig2_row_count() {
    let dir = tempfile::tempdir().unwrap();
    let result = run_scenario(&preset("fig2").unwrap()).unwrap();
    let bundle = write_bundle(&result, dir.path(), false).unwrap();
    let rows = read_trajectories(&bundle.trajectories).unwrap();
    assert_eq!(rows.len(), 16 * 101);
    let text = std::fs::read_to_string(&bundle.trajectories).unwrap();
    assert!(text.starts_with("traj_id,t,x,y,vx,vy,speed\n"));
}

#[test]
fn csv_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let result = run_scenario(&preset("fig4").unwrap()).unwrap();
    write_bundle(&result, dir.path(), false).unwrap();
    let back = read_trajectories(&dir.path().join(TRAJECTORIES)).unwrap();
    let rows = trajectory_rows(&result);
    assert_eq!(back.len(), rows.len());
    for (a, b) in rows.iter().zip(&back) {
        assert_eq!(a.id, b.id);
        for (p, q) in [
            (a.t, b.t),
            (a.x, b.x),
            (a.y, b.y),
            (a.vx, b.vx),
            (a.vy, b.vy),
            (a.speed, b.speed),
        ] {
            assert_eq!(p.to_bits(), q.to_bits());
        }
    }
}

#[test]
fn manifest_hashes_match_files() {
    let dir = tempfile::tempdir().unwrap();
    let result = run_scenario(&preset("fig2").unwrap()).unwrap();
    write_bundle(&result, dir.path(), true).unwrap();
    let m = read_manifest(dir.path()).unwrap();
    assert_eq!(m.files.len(), 5);
    for (name, hash) in &m.files {
        assert_eq!(&sha256_file(&dir.path().join(name)).unwrap(), hash, "{name}");
    }
    assert_eq!(m.config_hash, result.config.hash());
    assert!(m.passed);
}

#[test]
fn empty_result_gives_header_only_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut result = run_scenario(&preset("fig2").unwrap()).unwrap();
    for run in &mut result.runs {
        run.trajectories.clear();
    }
    write_bundle(&result, dir.path(), true).unwrap();
    assert_eq!(
        std::fs::read_to_string(dir.path().join(TRAJECTORIES)).unwrap(),
        "traj_id,t,x,y,vx,vy,speed\n"
    );
    assert_eq!(
        std::fs::read_to_string(dir.path().join(EVENTS)).unwrap(),
        "traj_id,kind,t,x,y\n"
    );
    assert!(read_trajectories(&dir.path().join(TRAJECTORIES)).unwrap().is_empty());
}

#[test]
fn same_seed_same_bundle() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = parse_config_str("scenario = fig2\nseed = 9\n[ensemble]\nkind = density\ncount = 40\n").unwrap();
    for d in [a.path(), b.path()] {
        write_bundle(&run_scenario(&cfg).unwrap(), d, true).unwrap();
    }
    for name in [
        TRAJECTORIES,
        EVENTS,
        output::REPORTS,
        MANIFEST,
        svg::PATHS_SVG,
        svg::SPEED_SVG,
    ] {
        assert_eq!(read(&a.path().join(name)), read(&b.path().join(name)), "{name}");
    }
}

#[test]
fn fig7_has_axis_crossing_events() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(["run", "fig7", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let events = read_events(&dir.path().join(EVENTS)).unwrap();
    let crossings: Vec<_> = events.iter().filter(|e| e.kind == "axis-crossing").collect();
    assert!(!crossings.is_empty());
    for e in crossings {
        assert!(e.y.abs() < 1e-8, "{e:?}");
    }
}

#[test]
fn fig7_without_spin_never_crosses() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["run", "fig7", "--spin", "off", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let events = read_events(&dir.path().join(EVENTS)).unwrap();
    assert!(events.iter().all(|e| e.kind != "axis-crossing"));
}

#[test]
fn plot_reproduces_run_svg() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["run", "fig5", "--svg", "--out"])
        .arg(dir.path())
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    let before = (
        read(&dir.path().join(svg::PATHS_SVG)),
        read(&dir.path().join(svg::SPEED_SVG)),
    );
    std::fs::remove_file(dir.path().join(svg::PATHS_SVG)).unwrap();
    let status = bin().arg("plot").arg(dir.path()).output().unwrap().status;
    assert!(status.success());
    assert_eq!(before.0, read(&dir.path().join(svg::PATHS_SVG)));
    assert_eq!(before.1, read(&dir.path().join(svg::SPEED_SVG)));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| bin().args(args).current_dir(dir.path()).output().unwrap().status.code();
    assert_eq!(code(&["list-presets"]), Some(0));
    assert_eq!(code(&["run", "no-such-preset"]), Some(2));
    assert_eq!(code(&["run"]), Some(2));
    assert_eq!(code(&["frobnicate"]), Some(2));
    assert_eq!(code(&["run", "fig2", "--spin", "sideways"]), Some(2));

    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "scenario = fig2\n[model]\nsigma0 = -1\n").unwrap();
    assert_eq!(code(&["run", "--config", bad.to_str().unwrap()]), Some(2));

    // Too short a horizon for any trajectory to reach the axis.
    let failing = dir.path().join("fail.cfg");
    std::fs::write(&failing, "scenario = fig7\n[integrator]\nt1 = 0.5\n").unwrap();
    assert_eq!(code(&["run", "--config", failing.to_str().unwrap()]), Some(1));
    assert!(dir
        .path()
        .join("out")
        .join("fig7-two-slit-spin")
        .join(MANIFEST)
        .exists());
}

#[test]
fn si_output_is_rescaled() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["run", "fig2", "--si", "--out"])
        .arg(dir.path())
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    let rows = read_trajectories(&dir.path().join(TRAJECTORIES)).unwrap();
    let r0 = rows[0].x.hypot(rows[0].y);
    assert!((r0 - 2e-8).abs() < 1e-20, "{r0}");
    assert!(read_manifest(dir.path()).unwrap().units.label() == "si");
}

#[test]
fn canonical_rings_override_from_config() {
    let cfg = parse_config_str("scenario = fig8\n[ensemble]\nradii = 1\nreference_radius = 1\nreference_count = 15\n")
        .unwrap();
    match &cfg.ensemble {
        EnsembleSpec::CanonicalRings { rings, .. } => assert_eq!(rings, &RingSpec::single(1.0, 15)),
        other => panic!("{other:?}"),
    }
}

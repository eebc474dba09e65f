//! CSV, JSON-lines and manifest emission, plus reading a bundle back.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};
use spinguide::integrator::EventKind;
use spinguide::scenarios::{ScenarioConfig, ScenarioResult, UnitSystem};

pub const TRAJECTORIES: &str = "trajectories.csv";
pub const EVENTS: &str = "events.csv";
pub const REPORTS: &str = "reports.jsonl";
pub const MANIFEST: &str = "manifest.json";
pub const TRAJECTORY_HEADER: [&str; 7] = ["traj_id", "t", "x", "y", "vx", "vy", "speed"];
pub const EVENT_HEADER: [&str; 5] = ["traj_id", "kind", "t", "x", "y"];

/// Shortest decimal that parses back to the same f64.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// One trajectory sample in output units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Row {
    pub id: usize,
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub speed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventRow {
    pub id: usize,
    pub kind: String,
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

pub fn trajectory_rows(result: &ScenarioResult) -> Vec<Row> {
    let u = result.config.units;
    let (l, t, v) = (u.length(), u.time(), u.speed());
    result
        .trajectories()
        .flat_map(|(id, _, tr)| {
            tr.samples.iter().map(move |s| Row {
                id,
                t: s.t * t,
                x: s.x.x * l,
                y: s.x.y * l,
                vx: s.v.x * v,
                vy: s.v.y * v,
                speed: s.speed * v,
            })
        })
        .collect()
}

pub fn event_rows(result: &ScenarioResult) -> Vec<EventRow> {
    let u = result.config.units;
    let (l, t) = (u.length(), u.time());
    result
        .trajectories()
        .flat_map(|(id, _, tr)| {
            tr.events.iter().map(move |e| EventRow {
                id,
                kind: e.kind.label().to_string(),
                t: e.t * t,
                x: e.x.x * l,
                y: e.x.y * l,
            })
        })
        .collect()
}

fn create(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(csv::Writer::from_writer(BufWriter::new(file)))
}

/// Files written for one scenario run.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputBundle {
    pub dir: PathBuf,
    pub trajectories: PathBuf,
    pub events: PathBuf,
    pub reports: PathBuf,
    pub plots: Vec<PathBuf>,
    pub manifest: PathBuf,
}

/// Writes the trajectories and events tables, sorted by (traj_id, t).
pub fn emit_csv(result: &ScenarioResult, out_dir: &Path) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(out_dir).with_context(|| format!("cannot create {}", out_dir.display()))?;
    let tpath = out_dir.join(TRAJECTORIES);
    let mut w = create(&tpath)?;
    w.write_record(TRAJECTORY_HEADER)?;
    for r in trajectory_rows(result) {
        w.write_record([
            r.id.to_string(),
            fmt_f64(r.t),
            fmt_f64(r.x),
            fmt_f64(r.y),
            fmt_f64(r.vx),
            fmt_f64(r.vy),
            fmt_f64(r.speed),
        ])?;
    }
    w.flush().with_context(|| format!("cannot write {}", tpath.display()))?;

    let epath = out_dir.join(EVENTS);
    let mut w = create(&epath)?;
    w.write_record(EVENT_HEADER)?;
    for e in event_rows(result) {
        w.write_record([e.id.to_string(), e.kind, fmt_f64(e.t), fmt_f64(e.x), fmt_f64(e.y)])?;
    }
    w.flush().with_context(|| format!("cannot write {}", epath.display()))?;
    Ok((tpath, epath))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub label: String,
    pub spin_term: bool,
    pub first_id: usize,
    pub count: usize,
    pub boost: Option<[f64; 2]>,
    pub node_aborts: usize,
    pub axis_crossings: usize,
}

pub fn run_summaries(result: &ScenarioResult) -> Vec<RunSummary> {
    let v = result.config.units.speed();
    let mut first = 0;
    result
        .runs
        .iter()
        .map(|r| {
            let s = RunSummary {
                label: r.label.clone(),
                spin_term: r.mode.spin_term,
                first_id: first,
                count: r.trajectories.len(),
                boost: r.boost.map(|u| [u.x * v, u.y * v]),
                node_aborts: r.trajectories.iter().filter(|t| t.aborted()).count(),
                axis_crossings: r
                    .trajectories
                    .iter()
                    .flat_map(|t| &t.events)
                    .filter(|e| matches!(e.kind, EventKind::AxisCrossing(_)))
                    .count(),
            };
            first += s.count;
            s
        })
        .collect()
}

/// One JSON object per line: a header, one line per run, one per gate.
pub fn emit_reports(result: &ScenarioResult, out_dir: &Path) -> Result<PathBuf> {
    let path = out_dir.join(REPORTS);
    let file = File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = BufWriter::new(file);
    let header = json!({
        "type": "scenario",
        "name": result.config.name,
        "passed": result.passed(),
        "config_hash": result.provenance.config_hash,
        "seed": result.provenance.seed,
        "version": result.provenance.version,
        "units": result.config.units.label(),
    });
    writeln!(w, "{header}")?;
    for run in run_summaries(result) {
        let mut obj = serde_json::to_value(&run)?;
        obj["type"] = json!("run");
        writeln!(w, "{obj}")?;
    }
    for gate in &result.gates {
        let mut obj = serde_json::to_value(gate)?;
        obj["type"] = json!("gate");
        writeln!(w, "{obj}")?;
    }
    w.flush().with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub scenario: String,
    pub seed: u64,
    pub config_hash: String,
    pub passed: bool,
    pub units: UnitSystem,
    pub runs: Vec<RunSummary>,
    pub config: ScenarioConfig,
    /// SHA-256 of every other file in the bundle.
    pub files: BTreeMap<String, String>,
}

pub fn write_manifest(result: &ScenarioResult, out_dir: &Path, files: &[PathBuf]) -> Result<PathBuf> {
    let mut hashes = BTreeMap::new();
    for f in files {
        let name = f
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        hashes.insert(name, sha256_file(f)?);
    }
    let manifest = Manifest {
        tool: "spinguide".into(),
        version: result.provenance.version.clone(),
        scenario: result.config.name.clone(),
        seed: result.provenance.seed,
        config_hash: result.provenance.config_hash.clone(),
        passed: result.passed(),
        units: result.config.units,
        runs: run_summaries(result),
        config: result.config.clone(),
        files: hashes,
    };
    let path = out_dir.join(MANIFEST);
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST);
    let text = std::fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("malformed {}", path.display()))
}

fn parse(field: &str, path: &Path) -> Result<f64> {
    field
        .parse()
        .with_context(|| format!("{}: bad number `{field}`", path.display()))
}

pub fn read_trajectories(path: &Path) -> Result<Vec<Row>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("cannot read {}", path.display()))?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    anyhow::ensure!(
        header == TRAJECTORY_HEADER,
        "{}: unexpected header {header:?}",
        path.display()
    );
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        rows.push(Row {
            id: rec[0].parse().with_context(|| format!("{}: bad id", path.display()))?,
            t: parse(&rec[1], path)?,
            x: parse(&rec[2], path)?,
            y: parse(&rec[3], path)?,
            vx: parse(&rec[4], path)?,
            vy: parse(&rec[5], path)?,
            speed: parse(&rec[6], path)?,
        });
    }
    Ok(rows)
}

pub fn read_events(path: &Path) -> Result<Vec<EventRow>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("cannot read {}", path.display()))?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    anyhow::ensure!(
        header == EVENT_HEADER,
        "{}: unexpected header {header:?}",
        path.display()
    );
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        rows.push(EventRow {
            id: rec[0].parse().with_context(|| format!("{}: bad id", path.display()))?,
            kind: rec[1].to_string(),
            t: parse(&rec[2], path)?,
            x: parse(&rec[3], path)?,
            y: parse(&rec[4], path)?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for v in [
            0.0,
            -0.0,
            0.1,
            1.0 / 3.0,
            1e-7,
            -2.5e-300,
            6.02e23,
            12345.678,
            f64::MAX,
            f64::MIN_POSITIVE,
        ] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(fmt_f64(0.25), "0.25");
        assert_eq!(fmt_f64(1e-7), "1e-7");
    }
}

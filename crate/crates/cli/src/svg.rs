//! Deterministic SVG plots: trajectory paths and speed histories.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use spinguide::ensemble::{ContourLevel, EnsembleSpec};
use spinguide::scenarios::{ModelSpec, ScenarioConfig, ScenarioResult, UnitSystem};

use crate::output::{event_rows, read_events, read_manifest, read_trajectories, trajectory_rows, EventRow, Row};
use crate::output::{EVENTS, TRAJECTORIES};

pub const PATHS_SVG: &str = "paths.svg";
pub const SPEED_SVG: &str = "speed.svg";

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 540.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

#[derive(Debug, Clone, Copy, PartialEq)]
struct Ellipse {
    cx: f64,
    cy: f64,
    rx: f64,
    ry: f64,
}

#[derive(Debug, Clone, Default)]
struct Figure {
    title: String,
    x_label: String,
    y_label: String,
    equal_aspect: bool,
    series: Vec<Vec<(f64, f64)>>,
    markers: Vec<(f64, f64)>,
    ellipses: Vec<Ellipse>,
}

#[derive(Debug, Clone, Copy)]
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let f = raw / mag;
    let m = if f < 1.5 {
        1.0
    } else if f < 3.5 {
        2.0
    } else if f < 7.5 {
        5.0
    } else {
        10.0
    };
    m * mag
}

fn ticks(lo: f64, hi: f64) -> (f64, Vec<f64>) {
    let step = nice_step(hi - lo);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (step, (first..=last).map(|k| k as f64 * step).collect())
}

fn tick_label(v: f64, step: f64) -> String {
    let v = if v.abs() < step * 1e-9 { 0.0 } else { v };
    if step >= 1e-4 && v.abs() < 1e6 {
        let decimals = (-step.log10().floor()).max(0.0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.2e}")
    }
}

fn bounds(fig: &Figure) -> Frame {
    let mut x0 = f64::INFINITY;
    let mut x1 = f64::NEG_INFINITY;
    let mut y0 = f64::INFINITY;
    let mut y1 = f64::NEG_INFINITY;
    let mut take = |x: f64, y: f64| {
        if x.is_finite() && y.is_finite() {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
    };
    for s in &fig.series {
        for &(x, y) in s {
            take(x, y);
        }
    }
    for &(x, y) in &fig.markers {
        take(x, y);
    }
    for e in &fig.ellipses {
        take(e.cx - e.rx, e.cy - e.ry);
        take(e.cx + e.rx, e.cy + e.ry);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (-1.0, 1.0, -1.0, 1.0);
    }
    let widen = |lo: f64, hi: f64| {
        if hi > lo {
            let pad = 0.05 * (hi - lo);
            (lo - pad, hi + pad)
        } else {
            let pad = if lo == 0.0 { 1.0 } else { 0.05 * lo.abs() };
            (lo - pad, hi + pad)
        }
    };
    let (mut x0, mut x1) = widen(x0, x1);
    let (mut y0, mut y1) = widen(y0, y1);
    if fig.equal_aspect {
        let pw = WIDTH - LEFT - RIGHT;
        let ph = HEIGHT - TOP - BOTTOM;
        let scale = ((x1 - x0) / pw).max((y1 - y0) / ph);
        let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
        x0 = cx - 0.5 * scale * pw;
        x1 = cx + 0.5 * scale * pw;
        y0 = cy - 0.5 * scale * ph;
        y1 = cy + 0.5 * scale * ph;
    }
    Frame { x0, x1, y0, y1 }
}

fn render(fig: &Figure) -> String {
    let f = bounds(fig);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(&fig.title)
    );
    let (left, right, top, bottom) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
    let _ = writeln!(
        s,
        r##"<rect x="{left}" y="{top}" width="{:.2}" height="{:.2}" fill="none" stroke="#000"/>"##,
        right - left,
        bottom - top
    );
    let (xs, xt) = ticks(f.x0, f.x1);
    for v in xt {
        let p = f.px(v);
        let _ = writeln!(
            s,
            r##"<line x1="{p:.2}" y1="{bottom}" x2="{p:.2}" y2="{:.2}" stroke="#000"/><text x="{p:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            bottom + 5.0,
            bottom + 18.0,
            tick_label(v, xs)
        );
    }
    let (ys, yt) = ticks(f.y0, f.y1);
    for v in yt {
        let p = f.py(v);
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{p:.2}" x2="{left}" y2="{p:.2}" stroke="#000"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            left - 5.0,
            left - 8.0,
            p + 4.0,
            tick_label(v, ys)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        0.5 * (left + right),
        HEIGHT - 15.0,
        escape(&fig.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        0.5 * (top + bottom),
        0.5 * (top + bottom),
        escape(&fig.y_label)
    );
    let _ = writeln!(
        s,
        r#"<clipPath id="plot"><rect x="{left}" y="{top}" width="{:.2}" height="{:.2}"/></clipPath>"#,
        right - left,
        bottom - top
    );
    let _ = writeln!(s, r#"<g clip-path="url(#plot)">"#);
    for e in &fig.ellipses {
        let rx = (f.px(e.cx + e.rx) - f.px(e.cx)).abs();
        let ry = (f.py(e.cy + e.ry) - f.py(e.cy)).abs();
        let _ = writeln!(
            s,
            r##"<ellipse cx="{:.2}" cy="{:.2}" rx="{rx:.2}" ry="{ry:.2}" fill="none" stroke="#999" stroke-dasharray="4 3"/>"##,
            f.px(e.cx),
            f.py(e.cy)
        );
    }
    for (i, series) in fig.series.iter().enumerate() {
        let mut pts = String::new();
        for &(x, y) in series {
            if x.is_finite() && y.is_finite() {
                let _ = write!(pts, "{:.2},{:.2} ", f.px(x), f.py(y));
            }
        }
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{}" stroke-width="1" points="{}"/>"#,
            PALETTE[i % PALETTE.len()],
            pts.trim_end()
        );
    }
    for &(x, y) in &fig.markers {
        let _ = writeln!(
            s,
            r##"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="#000"/>"##,
            f.px(x),
            f.py(y)
        );
    }
    s.push_str("</g>\n</svg>\n");
    s
}

fn unit_suffix(units: &UnitSystem, dimension: &str) -> String {
    match (units, dimension) {
        (UnitSystem::Dimensionless, "length") => "σ0".into(),
        (UnitSystem::Dimensionless, "time") => "mσ0²/ħ".into(),
        (UnitSystem::Dimensionless, _) => "ħ/mσ0".into(),
        (UnitSystem::Si { .. }, "length") => "m".into(),
        (UnitSystem::Si { .. }, "time") => "s".into(),
        (UnitSystem::Si { .. }, _) => "m/s".into(),
    }
}

/// Constant-density contours through the initial points (single packets)
/// or at one width around each packet centre.
fn contours(config: &ScenarioConfig) -> Vec<Ellipse> {
    let l = config.units.length();
    let scale = match config.ensemble {
        EnsembleSpec::UniformContour {
            level: ContourLevel::Scale(s),
            ..
        } => s,
        _ => 1.0,
    };
    match config.model {
        ModelSpec::Gaussian { sigma0 } => vec![Ellipse {
            cx: 0.0,
            cy: 0.0,
            rx: sigma0 * scale * l,
            ry: sigma0 * scale * l,
        }],
        ModelSpec::Product { sigma0_x, sigma0_y } => vec![Ellipse {
            cx: 0.0,
            cy: 0.0,
            rx: sigma0_x * scale * l,
            ry: sigma0_y * scale * l,
        }],
        ModelSpec::TwoSlit { sigma0, separation, .. } => [0.5, -0.5]
            .iter()
            .map(|s| Ellipse {
                cx: 0.0,
                cy: s * separation * l,
                rx: sigma0 * l,
                ry: sigma0 * l,
            })
            .collect(),
        ModelSpec::PlaneWave { .. } => vec![],
    }
}

fn group(rows: &[Row]) -> BTreeMap<usize, Vec<Row>> {
    let mut map: BTreeMap<usize, Vec<Row>> = BTreeMap::new();
    for r in rows {
        map.entry(r.id).or_default().push(*r);
    }
    map
}

fn paths_figure(config: &ScenarioConfig, rows: &[Row], events: &[EventRow]) -> Figure {
    let u = unit_suffix(&config.units, "length");
    Figure {
        title: format!("{}: trajectories", config.name),
        x_label: format!("x [{u}]"),
        y_label: format!("y [{u}]"),
        equal_aspect: true,
        series: group(rows)
            .values()
            .map(|s| s.iter().map(|r| (r.x, r.y)).collect())
            .collect(),
        markers: events
            .iter()
            .filter(|e| e.kind == "axis-crossing")
            .map(|e| (e.x, e.y))
            .collect(),
        ellipses: contours(config),
    }
}

fn speed_figure(config: &ScenarioConfig, rows: &[Row]) -> Figure {
    let frame = config.model.frame_velocity() * config.units.speed();
    let moving = frame.norm() > 0.0;
    let series = group(rows)
        .values()
        .map(|s| {
            s.iter()
                .map(|r| {
                    let v = if moving {
                        ((r.vx - frame.x).powi(2) + (r.vy - frame.y).powi(2)).sqrt() / frame.norm()
                    } else {
                        r.speed
                    };
                    (r.t, v)
                })
                .collect()
        })
        .collect();
    Figure {
        title: format!("{}: speed along trajectories", config.name),
        x_label: format!("t [{}]", unit_suffix(&config.units, "time")),
        y_label: if moving {
            "|v − V| / |V|".into()
        } else {
            format!("|v| [{}]", unit_suffix(&config.units, "speed"))
        },
        equal_aspect: false,
        series,
        markers: vec![],
        ellipses: vec![],
    }
}

fn write_figures(config: &ScenarioConfig, rows: &[Row], events: &[EventRow], out_dir: &Path) -> Result<Vec<PathBuf>> {
    let paths = out_dir.join(PATHS_SVG);
    std::fs::write(&paths, render(&paths_figure(config, rows, events)))
        .with_context(|| format!("cannot write {}", paths.display()))?;
    let speed = out_dir.join(SPEED_SVG);
    std::fs::write(&speed, render(&speed_figure(config, rows)))
        .with_context(|| format!("cannot write {}", speed.display()))?;
    Ok(vec![paths, speed])
}

/// Writes `paths.svg` and `speed.svg` for a result.
pub fn emit_svg(result: &ScenarioResult, out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).with_context(|| format!("cannot create {}", out_dir.display()))?;
    write_figures(&result.config, &trajectory_rows(result), &event_rows(result), out_dir)
}

/// Re-renders the plots of an existing output directory from its CSV files.
pub fn plot_dir(dir: &Path) -> Result<Vec<PathBuf>> {
    let manifest = read_manifest(dir)?;
    let rows = read_trajectories(&dir.join(TRAJECTORIES))?;
    let events = read_events(&dir.join(EVENTS))?;
    write_figures(&manifest.config, &rows, &events, dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tick_steps() {
        assert_eq!(nice_step(6.0), 1.0);
        assert_eq!(nice_step(12.0), 2.0);
        assert_eq!(nice_step(0.3), 0.05);
        let (step, t) = ticks(-0.1, 1.1);
        assert_eq!(step, 0.2);
        assert_eq!(t.len(), 6);
        assert_eq!(tick_label(0.4, 0.2), "0.4");
        assert_eq!(tick_label(2e-8, 1e-8), "2.00e-8");
    }

    #[test]
    fn empty_figure_has_axes() {
        let svg = render(&Figure {
            title: "empty".into(),
            ..Figure::default()
        });
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("<line"));
        assert!(!svg.contains("<polyline"));
    }
}

//! Trajectory integration of dx/dt = v(x, t).
//!
//! The stepper is the Dormand–Prince 5(4) embedded pair with PI step-size
//! control and the standard fourth-order continuous extension. Records are
//! taken on a fixed time stride from the dense output, and axis crossings
//! are located by bisection on the same interpolant.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::guidance::{subluminal_margin, GuidanceField, GuidanceMode, SpinVector};
use crate::wavefunction::{eval_fields, WaveModel};
use crate::{Error, Result, Vec2};

/// A planar, time-dependent velocity field.
pub trait FlowField: Sync {
    fn velocity(&self, x: Vec2, t: f64) -> Result<Vec2>;

    /// ρ divided by the node floor; steps landing below 10 are rejected.
    fn node_margin(&self, _x: Vec2, _t: f64) -> f64 {
        f64::INFINITY
    }
}

impl<F> FlowField for F
where
    F: Fn(Vec2, f64) -> Vec2 + Sync,
{
    fn velocity(&self, x: Vec2, t: f64) -> Result<Vec2> {
        Ok(self(x, t))
    }
}

/// The line used for crossing detection: `X` is the x-axis (y = 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    /// Signed distance of a point from the axis.
    fn offset(self, p: Vec2) -> f64 {
        match self {
            Axis::X => p.y,
            Axis::Y => p.x,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub t0: f64,
    pub t1: f64,
    pub max_step: f64,
    /// Interval between recorded samples.
    pub stride: f64,
    pub crossing_axes: Vec<Axis>,
    /// Subluminal margin above which a warning event is recorded.
    pub subluminal_threshold: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            t0: 0.0,
            t1: 1.0,
            max_step: 0.05,
            stride: 0.01,
            crossing_axes: vec![Axis::X],
            subluminal_threshold: 0.1,
        }
    }
}

impl IntegratorConfig {
    pub fn span(t0: f64, t1: f64, samples: usize) -> Self {
        let intervals = samples.saturating_sub(1).max(1) as f64;
        IntegratorConfig {
            t0,
            t1,
            stride: (t1 - t0) / intervals,
            max_step: (t1 - t0) / 20.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("max_step", self.max_step),
            ("stride", self.stride),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(name, format!("must be positive, got {v}")));
            }
        }
        if !(self.t0.is_finite() && self.t1.is_finite() && self.t1 > self.t0) {
            return Err(Error::validation(
                "t1",
                format!("must exceed t0 ({} vs {})", self.t1, self.t0),
            ));
        }
        Ok(())
    }

    /// Record times: t0, t0 + stride, ..., always ending at t1.
    pub fn sample_times(&self) -> Vec<f64> {
        let span = self.t1 - self.t0;
        let n = (span / self.stride * (1.0 + 1e-12)).floor() as usize;
        let mut times: Vec<f64> = (0..=n).map(|i| self.t0 + i as f64 * self.stride).collect();
        let last = *times.last().unwrap();
        if self.t1 - last > 1e-9 * span {
            times.push(self.t1);
        } else {
            *times.last_mut().unwrap() = self.t1;
        }
        times
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub x: Vec2,
    pub v: Vec2,
    pub speed: f64,
}

impl Sample {
    fn new(t: f64, x: Vec2, v: Vec2) -> Self {
        Sample {
            t,
            x,
            v,
            speed: v.norm(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EventKind {
    AxisCrossing(Axis),
    NodeAbort,
    SubluminalWarning { margin: f64 },
}

impl EventKind {
    pub fn label(&self) -> &'static str {
        match self {
            EventKind::AxisCrossing(_) => "axis-crossing",
            EventKind::NodeAbort => "node-abort",
            EventKind::SubluminalWarning { .. } => "subluminal-warning",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub kind: EventKind,
    pub t: f64,
    pub x: Vec2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub initial: Vec2,
    pub samples: Vec<Sample>,
    pub events: Vec<Event>,
    pub crossing_axes: Vec<Axis>,
}

impl Trajectory {
    pub fn aborted(&self) -> bool {
        self.events.iter().any(|e| e.kind == EventKind::NodeAbort)
    }

    pub fn crossings(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e.kind, EventKind::AxisCrossing(_)))
            .count()
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    /// Position at time `t` by cubic Hermite interpolation of the records.
    pub fn position_at(&self, t: f64) -> Option<Vec2> {
        let s = &self.samples;
        let first = s.first()?;
        let last = s.last()?;
        if t < first.t || t > last.t {
            return None;
        }
        let i = s.partition_point(|p| p.t <= t);
        if i == 0 {
            return Some(first.x);
        }
        if i >= s.len() {
            return Some(last.x);
        }
        Some(hermite(&s[i - 1], &s[i], t))
    }
}

fn hermite(a: &Sample, b: &Sample, t: f64) -> Vec2 {
    let h = b.t - a.t;
    if h == 0.0 {
        return a.x;
    }
    let s = (t - a.t) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    a.x * (2.0 * s3 - 3.0 * s2 + 1.0)
        + a.v * (h * (s3 - 2.0 * s2 + s))
        + b.x * (-2.0 * s3 + 3.0 * s2)
        + b.v * (h * (s3 - s2))
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Dense output.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;
const EVENT_TIME_TOL: f64 = 1e-10;
const MAX_STEPS: usize = 2_000_000;

/// Continuous extension over one accepted step.
struct DenseStep {
    t: f64,
    h: f64,
    r: [Vec2; 5],
}

impl DenseStep {
    fn eval(&self, t: f64) -> Vec2 {
        let th = (t - self.t) / self.h;
        let th1 = 1.0 - th;
        self.r[0] + (self.r[1] + (self.r[2] + (self.r[3] + self.r[4] * th1) * th) * th1) * th
    }
}

fn error_norm(err: Vec2, y: Vec2, y_new: Vec2, cfg: &IntegratorConfig) -> f64 {
    let mut acc = 0.0;
    for i in 0..2 {
        let sc = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y_new[i].abs());
        acc += (err[i] / sc).powi(2);
    }
    (acc / 2.0).sqrt()
}

fn initial_step<F: FlowField + ?Sized>(field: &F, t: f64, y: Vec2, f0: Vec2, cfg: &IntegratorConfig) -> f64 {
    let scale = |v: Vec2| {
        let mut acc = 0.0;
        for i in 0..2 {
            let sc = cfg.abs_tol + cfg.rel_tol * y[i].abs();
            acc += (v[i] / sc).powi(2);
        }
        (acc / 2.0).sqrt()
    };
    let d0 = scale(y);
    let d1 = scale(f0);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(cfg.max_step).min(cfg.t1 - t);
    let d2 = match field.velocity(y + f0 * h0, t + h0) {
        Ok(f1) => scale(f1 - f0) / h0,
        Err(_) => return h0 * 0.1,
    };
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(cfg.max_step).min(cfg.t1 - t)
}

/// Strict sign change, or arrival on the axis from one side.
fn crosses(a: f64, b: f64) -> bool {
    a * b < 0.0 || (b == 0.0 && a != 0.0)
}

fn bisect_crossing(dense: &DenseStep, axis: Axis, t_lo: f64, t_hi: f64) -> (f64, Vec2) {
    let mut lo = t_lo;
    let mut hi = t_hi;
    let s_lo = axis.offset(dense.eval(lo)).signum();
    while hi - lo > EVENT_TIME_TOL {
        let mid = 0.5 * (lo + hi);
        if axis.offset(dense.eval(mid)).signum() == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    (t, dense.eval(t))
}

/// Integrates the flow of `field` from `x0` over the configured span.
///
/// A start point inside a node region, or a step that cannot be shrunk far
/// enough to stay above the node floor, ends the trajectory with a
/// node-abort event; the records up to that point are kept.
pub fn integrate_flow<F: FlowField + ?Sized>(field: &F, x0: Vec2, cfg: &IntegratorConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let times = cfg.sample_times();
    let mut traj = Trajectory {
        initial: x0,
        samples: Vec::with_capacity(times.len()),
        events: Vec::new(),
        crossing_axes: cfg.crossing_axes.clone(),
    };

    let mut t = cfg.t0;
    let mut y = x0;
    let mut k1 = match field.velocity(y, t) {
        Ok(v) => v,
        Err(_) => {
            traj.events.push(Event {
                kind: EventKind::NodeAbort,
                t,
                x: y,
            });
            return Ok(traj);
        }
    };
    traj.samples.push(Sample::new(t, y, k1));
    let mut next_sample = 1;

    let span = cfg.t1 - cfg.t0;
    let h_min = 1e-13 * span.max(t.abs());
    let mut h = initial_step(field, t, y, k1, cfg);
    let mut fac_old: f64 = 1e-4;
    let mut last_rejected = false;
    let mut steps = 0usize;

    while t < cfg.t1 {
        steps += 1;
        if steps > MAX_STEPS {
            log::warn!("step budget exhausted at t = {t}");
            break;
        }
        if h < h_min {
            traj.events.push(Event {
                kind: EventKind::NodeAbort,
                t,
                x: y,
            });
            return Ok(traj);
        }
        h = h.min(cfg.max_step);
        let last_step = t + h >= cfg.t1 - 1e-12 * span;
        if last_step {
            h = cfg.t1 - t;
        }

        let stages = (|| -> Result<_> {
            let k2 = field.velocity(y + k1 * (h * A21), t + C2 * h)?;
            let k3 = field.velocity(y + (k1 * A31 + k2 * A32) * h, t + C3 * h)?;
            let k4 = field.velocity(y + (k1 * A41 + k2 * A42 + k3 * A43) * h, t + C4 * h)?;
            let k5 = field.velocity(y + (k1 * A51 + k2 * A52 + k3 * A53 + k4 * A54) * h, t + C5 * h)?;
            let k6 = field.velocity(y + (k1 * A61 + k2 * A62 + k3 * A63 + k4 * A64 + k5 * A65) * h, t + h)?;
            let y_new = y + (k1 * A71 + k3 * A73 + k4 * A74 + k5 * A75 + k6 * A76) * h;
            let t_new = if last_step { cfg.t1 } else { t + h };
            let k7 = field.velocity(y_new, t_new)?;
            Ok((k2, k3, k4, k5, k6, k7, y_new, t_new))
        })();

        let (_k2, k3, k4, k5, k6, k7, y_new, t_new) = match stages {
            Ok(s) => s,
            Err(_) => {
                h *= 0.25;
                last_rejected = true;
                continue;
            }
        };

        let err_vec = (k1 * E1 + k3 * E3 + k4 * E4 + k5 * E5 + k6 * E6 + k7 * E7) * h;
        let err = error_norm(err_vec, y, y_new, cfg);
        let fac11 = err.max(1e-300).powf(0.2 - BETA * 0.75);

        if err > 1.0 || !err.is_finite() {
            let shrink = if err.is_finite() {
                (1.0 / FAC_MIN).min(fac11 / SAFETY)
            } else {
                4.0
            };
            h /= shrink;
            last_rejected = true;
            continue;
        }
        if field.node_margin(y_new, t_new) < 10.0 {
            h *= 0.25;
            last_rejected = true;
            continue;
        }

        let ydiff = y_new - y;
        let bspl = k1 * h - ydiff;
        let dense = DenseStep {
            t,
            h: t_new - t,
            r: [
                y,
                ydiff,
                bspl,
                ydiff - k7 * h - bspl,
                (k1 * D1 + k3 * D3 + k4 * D4 + k5 * D5 + k6 * D6 + k7 * D7) * h,
            ],
        };

        for &axis in &cfg.crossing_axes {
            if crosses(axis.offset(y), axis.offset(y_new)) {
                let (te, xe) = if axis.offset(y_new) == 0.0 {
                    (t_new, y_new)
                } else {
                    bisect_crossing(&dense, axis, t, t_new)
                };
                traj.events.push(Event {
                    kind: EventKind::AxisCrossing(axis),
                    t: te,
                    x: xe,
                });
            }
        }

        while next_sample < times.len() && times[next_sample] <= t_new {
            let ts = times[next_sample];
            let xs = if ts == t_new { y_new } else { dense.eval(ts) };
            let vs = if ts == t_new { Ok(k7) } else { field.velocity(xs, ts) };
            match vs {
                Ok(v) => traj.samples.push(Sample::new(ts, xs, v)),
                Err(_) => {
                    traj.events.push(Event {
                        kind: EventKind::NodeAbort,
                        t: ts,
                        x: xs,
                    });
                    return Ok(traj);
                }
            }
            next_sample += 1;
        }

        t = t_new;
        y = y_new;
        k1 = k7;

        let mut fac = fac11 / fac_old.powf(BETA);
        fac = (1.0 / FAC_MAX).max((1.0 / FAC_MIN).min(fac / SAFETY));
        let mut h_new = h / fac;
        if last_rejected {
            h_new = h_new.min(h);
        }
        fac_old = err.max(1e-4);
        last_rejected = false;
        h = h_new;
    }
    Ok(traj)
}

/// Integrates one guidance trajectory and flags the first sample whose
/// subluminal margin reaches the configured threshold.
pub fn integrate_trajectory(
    model: &WaveModel,
    spin: &SpinVector,
    mode: GuidanceMode,
    x0: Vec2,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let field = GuidanceField::new(model, *spin, mode);
    let mut traj = integrate_flow(&field, x0, cfg)?;
    let constants = model.constants();
    let warning = traj.samples.iter().find_map(|s| {
        let f = eval_fields(model, s.x, s.t).ok()?;
        let margin = subluminal_margin(&f, spin, constants);
        (margin >= cfg.subluminal_threshold).then_some(Event {
            kind: EventKind::SubluminalWarning { margin },
            t: s.t,
            x: s.x,
        })
    });
    if let Some(w) = warning {
        traj.events.push(w);
    }
    traj.events.sort_by(|a, b| a.t.total_cmp(&b.t));
    Ok(traj)
}

/// Integrates every start point independently; output order follows input.
pub fn integrate_ensemble(
    model: &WaveModel,
    spin: &SpinVector,
    mode: GuidanceMode,
    points: &[Vec2],
    cfg: &IntegratorConfig,
) -> Result<Vec<Trajectory>> {
    cfg.validate()?;
    points
        .par_iter()
        .map(|&p| integrate_trajectory(model, spin, mode, p, cfg))
        .collect()
}

/// Rest-frame orbit of the symmetric Gaussian with spreading rate `gamma`:
/// x = (x0 − y0 γt, y0 + x0 γt), moving with constant velocity γ(−y0, x0).
pub fn closed_form_gaussian_orbit(x0: Vec2, t: f64, gamma: f64) -> (Vec2, Vec2) {
    let v = Vec2::new(-x0.y, x0.x) * gamma;
    (x0 + v * t, v)
}

/// Galilean boost of a recorded path: x'(t) = x(t) + ut, v' = v + u.
///
/// Crossing events for an axis the boost does not move (u ⟂ axis normal)
/// are shifted exactly; otherwise they are re-located by bisection on the
/// Hermite interpolant of the boosted records.
pub fn boost_trajectory(traj: &Trajectory, u: Vec2) -> Trajectory {
    let samples: Vec<Sample> = traj
        .samples
        .iter()
        .map(|s| Sample::new(s.t, s.x + u * s.t, s.v + u))
        .collect();
    let mut events: Vec<Event> = Vec::new();
    for e in &traj.events {
        let keep = match e.kind {
            EventKind::AxisCrossing(axis) => axis.offset(u) == 0.0,
            _ => true,
        };
        if keep {
            events.push(Event { x: e.x + u * e.t, ..*e });
        }
    }
    for &axis in &traj.crossing_axes {
        if axis.offset(u) == 0.0 {
            continue;
        }
        for w in samples.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if axis.offset(b.x) == 0.0 && axis.offset(a.x) != 0.0 {
                events.push(Event {
                    kind: EventKind::AxisCrossing(axis),
                    t: b.t,
                    x: b.x,
                });
            } else if crosses(axis.offset(a.x), axis.offset(b.x)) {
                let (mut lo, mut hi) = (a.t, b.t);
                let s_lo = axis.offset(a.x).signum();
                while hi - lo > EVENT_TIME_TOL {
                    let mid = 0.5 * (lo + hi);
                    if axis.offset(hermite(a, b, mid)).signum() == s_lo {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let te = 0.5 * (lo + hi);
                events.push(Event {
                    kind: EventKind::AxisCrossing(axis),
                    t: te,
                    x: hermite(a, b, te),
                });
            }
        }
    }
    events.sort_by(|a, b| a.t.total_cmp(&b.t));
    Trajectory {
        initial: traj.initial,
        samples,
        events,
        crossing_axes: traj.crossing_axes.clone(),
    }
}

/// Angle between the rest-frame direction b̂ and the boosted direction of
/// γr0 b̂ + u, where β is the angle between b̂ and u.
pub fn rotation_angle_alpha(r0: f64, beta: f64, u: f64, gamma: f64) -> f64 {
    let v = gamma * r0;
    // Components of γr0 b̂ + u along b̂ and perpendicular to it.
    let along = v + u * beta.cos();
    let across = u * beta.sin();
    across.abs().atan2(along)
}

//! End-to-end verification gates, shared by the `acceptance` test target
//! and the `verify` subcommand.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    axis_crossings, density_transport_check, force_law_check, fringe_profile, mean_spin_angular_momentum,
    speed_distribution_check, speed_ratio_study, BinSpec,
};
use crate::ensemble::{sample_density, uniform_contour, ContourLevel};
use crate::fields::{continuity_residual, hj_residual, lorentz_force, FdStencil};
use crate::guidance::{GuidanceField, GuidanceMode, SpinVector};
use crate::integrator::{boost_trajectory, integrate_ensemble, integrate_flow, integrate_trajectory, IntegratorConfig};
use crate::scenarios::{preset, run_scenario, ModelSpec};
use crate::wavefunction::{boost_model, PhysicalConstants, WaveModel};
use crate::{Result, Vec2};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub title: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {} {} ({:.1}s): {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.seconds,
            self.detail
        )
    }
}

type Check = fn() -> Result<(bool, String)>;

pub const CRITERIA: [(u32, &str, Check); 11] = [
    (1, "inertial motion", inertial_motion),
    (2, "zero Lorentz force", zero_lorentz_force),
    (3, "mean spin angular momentum", mean_spin_moment),
    (4, "speed distribution", speed_distribution),
    (5, "density transport", density_transport),
    (6, "Galilean boost", galilean_boost),
    (7, "two-slit crossing dichotomy", crossing_dichotomy),
    (8, "fringe recovery", fringe_recovery),
    (9, "residual identities", residual_identities),
    (10, "force-law consistency", force_law),
    (11, "speed-ratio bound", speed_ratio),
];

pub fn run_criterion(id: u32) -> Option<CriterionOutcome> {
    let &(id, title, check) = CRITERIA.iter().find(|c| c.0 == id)?;
    let start = Instant::now();
    let (passed, detail) = match check() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    Some(CriterionOutcome {
        id,
        title: title.into(),
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    })
}

pub fn run_all() -> Vec<CriterionOutcome> {
    CRITERIA.iter().filter_map(|c| run_criterion(c.0)).collect()
}

fn defaults() -> (PhysicalConstants, SpinVector) {
    let c = PhysicalConstants::default();
    (c, SpinVector::up(&c))
}

fn symmetric() -> WaveModel {
    WaveModel::gaussian(PhysicalConstants::default(), 1.0).expect("valid model")
}

fn superposition() -> WaveModel {
    WaveModel::two_slit(PhysicalConstants::default(), 1.0, 5.0, Vec2::zeros()).expect("valid model")
}

fn inertial_motion() -> Result<(bool, String)> {
    let (c, spin) = defaults();
    let model = symmetric();
    let gamma = c.gamma(1.0);
    let points = uniform_contour(&model, ContourLevel::Scale(1.0), 16)?;
    let cfg = IntegratorConfig::span(0.0, 2.0 / gamma, 101);
    let trajs = integrate_ensemble(&model, &spin, GuidanceMode::SPIN_ON, &points, &cfg)?;
    let mut pos: f64 = 0.0;
    let mut speed: f64 = 0.0;
    for tr in &trajs {
        let r0 = tr.initial.norm();
        let th0 = tr.initial.y.atan2(tr.initial.x);
        for s in &tr.samples {
            // r = r0 (1 + γ²t²)^½, θ = θ0 + atan γt.
            let gt = gamma * s.t;
            let r = r0 * (1.0 + gt * gt).sqrt();
            let th = th0 + gt.atan();
            let exact = Vec2::new(r * th.cos(), r * th.sin());
            pos = pos.max((s.x - exact).norm() / r);
            speed = speed.max((s.speed - gamma * r0).abs() / (gamma * r0));
        }
    }
    Ok((
        pos < 1e-6 && speed < 1e-6,
        format!("max position error {pos:.2e}, max speed error {speed:.2e} (limit 1e-6)"),
    ))
}

fn zero_lorentz_force() -> Result<(bool, String)> {
    let (c, spin) = defaults();
    let model = symmetric();
    let unit = c.hbar * c.hbar / (2.0 * c.mass);
    let stencil = FdStencil::default();
    let mut worst: f64 = 0.0;
    for t in [0.0, 2.0, 6.0] {
        for i in 0..21 {
            for j in 0..21 {
                let x = Vec2::new(-3.0 + 0.3 * i as f64, -3.0 + 0.3 * j as f64);
                if x.norm() > 3.0 + 1e-12 {
                    continue;
                }
                let f = lorentz_force(&model, x, t, &spin, GuidanceMode::SPIN_ON, &stencil)?;
                worst = worst.max(f.xy().norm() / unit);
            }
        }
    }
    Ok((
        worst < 1e-5,
        format!("max |E + v×B| = {worst:.2e} ħ²/2mσ0³ (limit 1e-5)"),
    ))
}

fn mean_spin_moment() -> Result<(bool, String)> {
    let (c, spin) = defaults();
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, model) in [("symmetric", symmetric()), ("superposition", superposition())] {
        let est = mean_spin_angular_momentum(&model, &spin, 100_000, 31, 0.0)?;
        let z = est.mean.z;
        let pass = (z - c.hbar).abs() < 3.0 * est.std_error.z;
        ok &= pass;
        parts.push(format!("{name}: {z:.5} ± {:.5}", est.std_error.z));
    }
    Ok((ok, format!("⟨L_z⟩ vs ħ = 1 within 3 SE: {}", parts.join("; "))))
}

fn speed_distribution() -> Result<(bool, String)> {
    let (c, spin) = defaults();
    let model = symmetric();
    let points = sample_density(&model, 10_000, 41, 0.0)?;
    let cfg = IntegratorConfig {
        crossing_axes: vec![],
        max_step: 2.0,
        ..IntegratorConfig::span(0.0, 2.0, 2)
    };
    let trajs = integrate_ensemble(&model, &spin, GuidanceMode::SPIN_ON, &points, &cfg)?;
    let speeds: Vec<f64> = trajs.iter().filter_map(|t| t.last()).map(|s| s.speed).collect();
    let rep = speed_distribution_check(&c, 1.0, &speeds)?;
    Ok((
        rep.passed(),
        format!(
            "KS p = {:.3}, mode ≈ {:.3} (w = {}), tail {:.4} vs {:.4} ± {:.4}",
            rep.histogram.p_value,
            rep.mode,
            rep.w,
            rep.tail_fraction,
            rep.tail_expected,
            3.0 * rep.tail_sigma
        ),
    ))
}

fn density_transport() -> Result<(bool, String)> {
    let (c, spin) = defaults();
    let model = symmetric();
    let t_final = 1.0 / c.gamma(1.0);
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, mode) in [("spin on", GuidanceMode::SPIN_ON), ("spin off", GuidanceMode::SPIN_OFF)] {
        let rep = density_transport_check(&model, &spin, mode, 100_000, t_final, 51)?;
        ok &= rep.passed();
        parts.push(format!(
            "{name}: KS p = {:.3}, aborts {}",
            rep.histogram.p_value, rep.node_aborts
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn galilean_boost() -> Result<(bool, String)> {
    let (c, spin) = defaults();
    let model = symmetric();
    let w = c.characteristic_speed(1.0);
    let gamma = c.gamma(1.0);
    let tight = IntegratorConfig {
        rel_tol: 1e-11,
        abs_tol: 1e-12,
        ..IntegratorConfig::span(0.0, 4.0, 81)
    };

    // Covariance: integrate the boosted model vs boost the rest-frame path.
    let mut cov: f64 = 0.0;
    let starts = uniform_contour(&model, ContourLevel::Scale(1.0), 4)?;
    for u in [Vec2::new(2.0 * w, 0.0), Vec2::new(-0.6 * w, 1.3 * w)] {
        let boosted = boost_model(&model, u);
        for &x0 in &starts {
            let rest = integrate_trajectory(&model, &spin, GuidanceMode::SPIN_ON, x0, &tight)?;
            let moved = integrate_trajectory(&boosted, &spin, GuidanceMode::SPIN_ON, x0, &tight)?;
            let shifted = boost_trajectory(&rest, u);
            for (a, b) in moved.samples.iter().zip(&shifted.samples) {
                cov = cov.max((a.x - b.x).norm());
            }
        }
    }
    let mut ok = cov < 1e-6;
    let mut parts = vec![format!("covariance max deviation {cov:.2e} (limit 1e-6)")];

    // Rotation angle at u = 100w, starting at r0 = σ0 where b̂ = ŷ.
    let x0 = Vec2::new(1.0, 0.0);
    let bhat = Vec2::new(0.0, 1.0);
    for beta_deg in [0.0f64, 30.0, 90.0, 150.0] {
        let beta = beta_deg.to_radians();
        // Rotate b̂ clockwise by β.
        let u = Vec2::new(beta.sin(), beta.cos()) * (100.0 * w);
        let boosted = boost_model(&model, u);
        let tr = integrate_trajectory(&boosted, &spin, GuidanceMode::SPIN_ON, x0, &tight)?;
        let (a, b) = (tr.samples[0].x, tr.last().map(|s| s.x).unwrap_or(x0));
        let chord = b - a;
        let alpha = bhat.perp(&chord).atan2(bhat.dot(&chord)).abs().to_degrees();
        let oracle = crate::integrator::rotation_angle_alpha(1.0, beta, 100.0 * w, gamma).to_degrees();
        let dev = (alpha - beta_deg).abs();
        ok &= dev < 0.5;
        parts.push(format!(
            "β={beta_deg}°: α={alpha:.4}° (vector sum {oracle:.4}°), |α−β|={dev:.3}°"
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn crossing_dichotomy() -> Result<(bool, String)> {
    let fig6 = preset("fig6-two-slit-nospin").expect("preset");
    let mut ok = true;
    let mut parts = Vec::new();
    for mode in [GuidanceMode::SPIN_OFF, GuidanceMode::SPIN_ON] {
        let mut counts = Vec::new();
        for rel_tol in [1e-8, 5e-9] {
            let mut cfg = fig6.clone().with_mode(mode);
            cfg.integrator.rel_tol = rel_tol;
            cfg.gates.clear();
            let res = run_scenario(&cfg)?;
            let trajs = &res.runs[0].trajectories;
            if trajs.len() != 170 {
                ok = false;
            }
            counts.push(axis_crossings(trajs));
        }
        let expected = if mode.spin_term { counts[0] >= 1 } else { counts[0] == 0 };
        ok &= expected && counts[0] == counts[1];
        parts.push(format!(
            "{}: {} crossings (rel_tol 1e-8), {} (5e-9)",
            if mode.spin_term { "spin on" } else { "spin off" },
            counts[0],
            counts[1]
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn two_slit_model() -> Result<WaveModel> {
    let cfg = preset("fig7-two-slit-spin").expect("preset");
    cfg.model.build(cfg.constants())
}

fn fringe_recovery() -> Result<(bool, String)> {
    let (_, spin) = defaults();
    let model = two_slit_model()?;
    let t1 = 12.0;
    let points = sample_density(&model, 10_000, 81, 0.0)?;
    let cfg = IntegratorConfig {
        crossing_axes: vec![],
        max_step: 0.25,
        ..IntegratorConfig::span(0.0, t1, 2)
    };
    let trajs = integrate_ensemble(&model, &spin, GuidanceMode::SPIN_ON, &points, &cfg)?;
    let aborted = trajs.iter().filter(|t| t.aborted()).count();
    let rep = fringe_profile(
        &trajs,
        t1,
        BinSpec {
            lo: -40.0,
            hi: 40.0,
            count: 160,
        },
        Some(&model),
    )?;
    Ok((
        rep.passed(),
        format!(
            "chi-square {:.1} on {} dof, p = {:.3}, {} node aborts",
            rep.test_statistic,
            rep.dof.unwrap_or(0),
            rep.p_value,
            aborted
        ),
    ))
}

fn residual_identities() -> Result<(bool, String)> {
    let (c, spin) = defaults();
    let stencil = FdStencil::default();
    let models = [
        ("symmetric", symmetric()),
        ("product", WaveModel::product(c, 2.0, 1.0)?),
        ("superposition", superposition()),
    ];
    let mut worst_all: f64 = 0.0;
    let mut parts = Vec::new();
    for (k, (name, model)) in models.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(91 + k as u64);
        let mut worst: f64 = 0.0;
        for i in 0..100 {
            let t = 4.0 * rng.random::<f64>();
            let x = sample_density(model, 1, 1000 * k as u64 + i, t)?[0];
            for mode in [GuidanceMode::SPIN_ON, GuidanceMode::SPIN_OFF] {
                worst = worst.max(continuity_residual(model, x, t, &spin, mode, &stencil)?.abs());
            }
            worst = worst.max(hj_residual(model, x, t)?.abs());
        }
        worst_all = worst_all.max(worst);
        parts.push(format!("{name} {worst:.2e}"));
    }
    Ok((
        worst_all < 1e-5,
        format!("max residual: {} (limit 1e-5)", parts.join(", ")),
    ))
}

fn force_law() -> Result<(bool, String)> {
    let (c, spin) = defaults();
    let model = WaveModel::product(c, 2.0, 1.0)?;
    let points = uniform_contour(&model, ContourLevel::Scale(1.0), 5)?;
    let cfg = IntegratorConfig {
        rel_tol: 1e-12,
        abs_tol: 1e-14,
        max_step: 0.002,
        crossing_axes: vec![],
        ..IntegratorConfig::span(0.0, 4.0, 4001)
    };
    let stencil = FdStencil::default();
    let floor = 1e-3 * c.hbar * c.hbar / (2.0 * c.mass);
    let mut ok = true;
    let mut parts = Vec::new();
    for mode in [GuidanceMode::SPIN_ON, GuidanceMode::SPIN_OFF] {
        let field = GuidanceField::new(&model, spin, mode);
        let reports = points
            .par_iter()
            .map(|&p| {
                let tr = integrate_flow(&field, p, &cfg)?;
                force_law_check(&model, &spin, mode, &tr, &stencil, floor)
            })
            .collect::<Result<Vec<_>>>()?;
        let worst = reports.iter().map(|r| r.max_error).fold(0.0, f64::max);
        let n: usize = reports.iter().map(|r| r.points).sum();
        ok &= worst < 1e-3 && n > 0;
        parts.push(format!(
            "{}: max relative error {worst:.2e} over {n} points",
            if mode.spin_term { "E + v×B" } else { "−∇Q" }
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn speed_ratio() -> Result<(bool, String)> {
    let cfg = preset("fig8-speed-ratio").expect("preset");
    let res = run_scenario(&cfg)?;
    let model = cfg.model.build(cfg.constants())?;
    let frame = match cfg.model {
        ModelSpec::TwoSlit { group_velocity, .. } => group_velocity,
        _ => Vec2::zeros(),
    };
    let trajs = &res.runs[0].trajectories;
    let rep = speed_ratio_study(&model, frame, trajs)?;
    Ok((
        rep.passed() && trajs.len() == 15,
        format!(
            "{} trajectories, max |v − V|/Vx = {:.4} (limit 0.05), max |v| = {:.2} < c = {:.0}, overlap from t = {:.2}, {} spikes, {} before overlap",
            trajs.len(),
            rep.max_ratio,
            rep.max_speed,
            rep.c_ratio,
            rep.overlap_onset,
            rep.spikes,
            rep.spikes_outside_overlap
        ),
    ))
}

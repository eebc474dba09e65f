//! Figure presets and the scenario runner.
//!
//! Configurations are always stored in internal units (ħ = m = σ0 = 1);
//! [`UnitSystem`] only records how to convert results back to SI.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{axis_crossings, gaussian_orbit_report, mirror_asymmetry, speed_ratio_study};
use crate::ensemble::{ContourLevel, EnsembleSpec, RingSpec};
use crate::fields::{continuity_residual, hj_residual, FdStencil};
use crate::guidance::{GuidanceMode, SpinVector};
use crate::integrator::{boost_trajectory, integrate_ensemble, rotation_angle_alpha, IntegratorConfig, Trajectory};
use crate::wavefunction::{PhysicalConstants, WaveModel};
use crate::{Error, Result, Vec2};

pub const HBAR_SI: f64 = 1.054_571_817e-34;
pub const ELECTRON_MASS_SI: f64 = 9.109_383_701_5e-31;
pub const LIGHT_SPEED_SI: f64 = 299_792_458.0;
/// Packet width used for the SI rendering of every preset.
pub const SI_SIGMA0: f64 = 2e-8;
/// Two-slit group speed used in SI mode.
pub const SI_GROUP_SPEED: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum UnitSystem {
    Dimensionless,
    /// SI scale constants: packet width (m), mass (kg), ħ (J s).
    Si {
        sigma0: f64,
        mass: f64,
        hbar: f64,
    },
}

impl UnitSystem {
    pub fn electron() -> Self {
        UnitSystem::Si {
            sigma0: SI_SIGMA0,
            mass: ELECTRON_MASS_SI,
            hbar: HBAR_SI,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let UnitSystem::Si { sigma0, mass, hbar } = *self {
            for (name, v) in [("sigma0", sigma0), ("mass", mass), ("hbar", hbar)] {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::validation(name, "SI scale constants must be positive"));
                }
            }
        }
        Ok(())
    }

    /// Metres per internal length unit (σ0).
    pub fn length(&self) -> f64 {
        match *self {
            UnitSystem::Dimensionless => 1.0,
            UnitSystem::Si { sigma0, .. } => sigma0,
        }
    }

    /// Seconds per internal time unit (mσ0²/ħ).
    pub fn time(&self) -> f64 {
        match *self {
            UnitSystem::Dimensionless => 1.0,
            UnitSystem::Si { sigma0, mass, hbar } => mass * sigma0 * sigma0 / hbar,
        }
    }

    /// Metres per second per internal speed unit (ħ/mσ0).
    pub fn speed(&self) -> f64 {
        self.length() / self.time()
    }

    pub fn label(&self) -> &'static str {
        match self {
            UnitSystem::Dimensionless => "dimensionless",
            UnitSystem::Si { .. } => "si",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelSpec {
    Gaussian {
        sigma0: f64,
    },
    Product {
        sigma0_x: f64,
        sigma0_y: f64,
    },
    /// Two equal packets at (0, ±separation/2) sharing one group velocity.
    TwoSlit {
        sigma0: f64,
        separation: f64,
        group_velocity: Vec2,
    },
    PlaneWave {
        k: Vec2,
    },
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::validation(name, format!("must be positive, got {v}")))
            }
        };
        match *self {
            ModelSpec::Gaussian { sigma0 } => positive("sigma0", sigma0),
            ModelSpec::Product { sigma0_x, sigma0_y } => {
                positive("sigma0_x", sigma0_x)?;
                positive("sigma0_y", sigma0_y)
            }
            ModelSpec::TwoSlit {
                sigma0,
                separation,
                group_velocity,
            } => {
                positive("sigma0", sigma0)?;
                positive("separation", separation)?;
                if !(group_velocity.x.is_finite() && group_velocity.y.is_finite()) {
                    return Err(Error::validation("group_velocity", "must be finite"));
                }
                Ok(())
            }
            ModelSpec::PlaneWave { k } => {
                if k.x.is_finite() && k.y.is_finite() {
                    Ok(())
                } else {
                    Err(Error::validation("k", "must be finite"))
                }
            }
        }
    }

    pub fn build(&self, constants: PhysicalConstants) -> Result<WaveModel> {
        self.validate()?;
        match *self {
            ModelSpec::Gaussian { sigma0 } => WaveModel::gaussian(constants, sigma0),
            ModelSpec::Product { sigma0_x, sigma0_y } => WaveModel::product(constants, sigma0_x, sigma0_y),
            ModelSpec::TwoSlit {
                sigma0,
                separation,
                group_velocity,
            } => WaveModel::two_slit(constants, sigma0, separation, group_velocity),
            ModelSpec::PlaneWave { k } => WaveModel::plane_wave(constants, k),
        }
    }

    /// Common group velocity of the packets.
    pub fn frame_velocity(&self) -> Vec2 {
        match *self {
            ModelSpec::TwoSlit { group_velocity, .. } => group_velocity,
            _ => Vec2::zeros(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gate {
    /// Closed-form orbits, constant speed and straight paths of the symmetric packet.
    GaussianOrbit,
    /// Boosted path directions against the vector-sum rotation angle.
    RotationAngle,
    /// Continuity and Hamilton–Jacobi residuals at recorded points.
    Residuals,
    /// Mirror symmetry without the spin term, broken with it.
    Chirality,
    /// No axis crossings without the spin term, at least one with it.
    AxisCrossings,
    /// Packet-frame speed stays below 5% of the group speed outside overlap spikes.
    SpeedRatio,
    /// No trajectory ended in a node region.
    NoNodeAborts,
}

impl Gate {
    pub fn name(self) -> &'static str {
        match self {
            Gate::GaussianOrbit => "gaussian-orbit",
            Gate::RotationAngle => "rotation-angle",
            Gate::Residuals => "residuals",
            Gate::Chirality => "chirality",
            Gate::AxisCrossings => "axis-crossings",
            Gate::SpeedRatio => "speed-ratio",
            Gate::NoNodeAborts => "no-node-aborts",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub description: String,
    pub model: ModelSpec,
    /// Speed of light in internal speed units.
    pub c_ratio: f64,
    pub ensemble: EnsembleSpec,
    /// One run per mode, in order.
    pub modes: Vec<GuidanceMode>,
    pub integrator: IntegratorConfig,
    /// Boost speeds in units of w, applied along +x to the rest-frame runs.
    pub boosts: Vec<f64>,
    pub gates: Vec<Gate>,
    pub units: UnitSystem,
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.ensemble.validate()?;
        self.integrator.validate()?;
        self.units.validate()?;
        if !(self.c_ratio.is_finite() && self.c_ratio > 0.0) {
            return Err(Error::validation("c_ratio", "must be positive"));
        }
        if self.modes.is_empty() {
            return Err(Error::validation("spin", "at least one guidance mode is required"));
        }
        if self.boosts.iter().any(|b| !b.is_finite()) {
            return Err(Error::validation("boosts", "must be finite"));
        }
        Ok(())
    }

    pub fn constants(&self) -> PhysicalConstants {
        PhysicalConstants {
            hbar: 1.0,
            mass: 1.0,
            c_ratio: self.c_ratio,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        if let EnsembleSpec::DensitySample { seed: s, .. } = &mut self.ensemble {
            *s = seed;
        }
        self
    }

    /// Replaces the guidance modes by a single mode.
    pub fn with_mode(mut self, mode: GuidanceMode) -> Self {
        self.modes = vec![mode];
        self
    }

    /// Switches to SI output with the preset's literal SI values: an
    /// electron with σ0 = 20 nm and, for two-slit models, a group speed of
    /// 10⁸ m/s.
    pub fn into_si(mut self) -> Self {
        let units = UnitSystem::electron();
        self.units = units;
        self.c_ratio = LIGHT_SPEED_SI / units.speed();
        if let ModelSpec::TwoSlit { group_velocity, .. } = &mut self.model {
            if group_velocity.norm() > 0.0 {
                *group_velocity = group_velocity.normalize() * (SI_GROUP_SPEED / units.speed());
            }
        }
        self
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serialises");
        hex::encode(Sha256::digest(&bytes))
    }
}

const DEFAULT_C_RATIO: f64 = 2e5;

fn base(name: &str, description: &str, model: ModelSpec, ensemble: EnsembleSpec) -> ScenarioConfig {
    ScenarioConfig {
        name: name.into(),
        description: description.into(),
        model,
        c_ratio: DEFAULT_C_RATIO,
        ensemble,
        modes: vec![GuidanceMode::SPIN_ON],
        integrator: IntegratorConfig::span(0.0, 4.0, 101),
        boosts: vec![],
        gates: vec![Gate::NoNodeAborts],
        units: UnitSystem::Dimensionless,
        seed: 0,
    }
}

/// Two-slit defaults: 2a = 20σ0, Vx = 200w, horizon 6/γ.
fn two_slit(name: &str, description: &str, ensemble: EnsembleSpec, samples: usize) -> ScenarioConfig {
    let model = ModelSpec::TwoSlit {
        sigma0: 1.0,
        separation: 20.0,
        group_velocity: Vec2::new(100.0, 0.0),
    };
    ScenarioConfig {
        integrator: IntegratorConfig {
            max_step: 0.05,
            ..IntegratorConfig::span(0.0, 12.0, samples)
        },
        ..base(name, description, model, ensemble)
    }
}

pub fn builtin_presets() -> Vec<ScenarioConfig> {
    let wheel = EnsembleSpec::UniformContour {
        level: ContourLevel::Scale(1.0),
        count: 16,
    };
    let gaussian = ModelSpec::Gaussian { sigma0: 1.0 };
    let rings = EnsembleSpec::CanonicalRings {
        rings: RingSpec::two_slit_default(1.0),
        centers: vec![],
    };

    let mut fig2 = base(
        "fig2-catherine-wheel",
        "Symmetric packet, 16 points on r0 = σ0, spin term on",
        gaussian.clone(),
        wheel.clone(),
    );
    fig2.gates.insert(0, Gate::GaussianOrbit);

    let mut fig3 = base(
        "fig3-boosted",
        "Catherine wheel seen from frames moving at 0.8, 2 and 5 times w",
        gaussian,
        wheel,
    );
    fig3.boosts = vec![0.8, 2.0, 5.0];
    fig3.gates = vec![Gate::GaussianOrbit, Gate::RotationAngle, Gate::NoNodeAborts];

    let mut fig4 = base(
        "fig4-asymmetric-product",
        "Product of Gaussians with σ0x = 2σ0y, spin term on",
        ModelSpec::Product {
            sigma0_x: 2.0,
            sigma0_y: 1.0,
        },
        EnsembleSpec::UniformContour {
            level: ContourLevel::Scale(1.0),
            count: 16,
        },
    );
    fig4.gates = vec![Gate::Residuals, Gate::NoNodeAborts];

    let mut fig5 = base(
        "fig5-superposition",
        "Two packets 5σ0 apart, rings at 0.5σ0, spin term off then on",
        ModelSpec::TwoSlit {
            sigma0: 1.0,
            separation: 5.0,
            group_velocity: Vec2::zeros(),
        },
        EnsembleSpec::CanonicalRings {
            rings: RingSpec::single(0.5, 12),
            centers: vec![],
        },
    );
    fig5.modes = vec![GuidanceMode::SPIN_OFF, GuidanceMode::SPIN_ON];
    fig5.integrator = IntegratorConfig::span(0.0, 6.0, 151);
    fig5.gates = vec![Gate::Chirality, Gate::NoNodeAborts];

    let mut fig6 = two_slit(
        "fig6-two-slit-nospin",
        "Two-slit canonical ensemble without the spin term",
        rings.clone(),
        601,
    );
    fig6.modes = vec![GuidanceMode::SPIN_OFF];
    fig6.gates = vec![Gate::AxisCrossings, Gate::NoNodeAborts];

    let mut fig7 = two_slit(
        "fig7-two-slit-spin",
        "Two-slit canonical ensemble with the spin term",
        rings,
        601,
    );
    fig7.gates = vec![Gate::AxisCrossings, Gate::NoNodeAborts];

    let mut fig8 = two_slit(
        "fig8-speed-ratio",
        "Speed along 15 two-slit trajectories from the 1.5σ0 contour of the upper slit",
        EnsembleSpec::CanonicalRings {
            rings: RingSpec::single(1.5, 15),
            centers: vec![Vec2::new(0.0, 10.0)],
        },
        1201,
    );
    fig8.gates = vec![Gate::SpeedRatio, Gate::NoNodeAborts];

    vec![fig2, fig3, fig4, fig5, fig6, fig7, fig8]
}

/// Looks a preset up by full name or by its short prefix (`fig7`).
pub fn preset(name: &str) -> Option<ScenarioConfig> {
    builtin_presets()
        .into_iter()
        .find(|p| p.name == name || p.name.split('-').next() == Some(name))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Run {
    pub label: String,
    pub mode: GuidanceMode,
    /// Boost applied to a rest-frame run, if any.
    pub boost: Option<Vec2>,
    pub trajectories: Vec<Trajectory>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateReport {
    pub gate: String,
    pub run: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub config: ScenarioConfig,
    pub runs: Vec<Run>,
    pub gates: Vec<GateReport>,
    pub provenance: Provenance,
}

impl ScenarioResult {
    pub fn passed(&self) -> bool {
        self.gates.iter().all(|g| g.passed)
    }

    /// Every trajectory with its global index, in run order.
    pub fn trajectories(&self) -> impl Iterator<Item = (usize, &Run, &Trajectory)> {
        self.runs
            .iter()
            .flat_map(|r| r.trajectories.iter().map(move |t| (r, t)))
            .enumerate()
            .map(|(i, (r, t))| (i, r, t))
    }

    pub fn node_aborts(&self) -> usize {
        self.runs
            .iter()
            .flat_map(|r| &r.trajectories)
            .filter(|t| t.aborted())
            .count()
    }
}

fn mode_label(mode: GuidanceMode) -> &'static str {
    if mode.spin_term {
        "spin-on"
    } else {
        "spin-off"
    }
}

/// Builds the model and ensemble, integrates one run per mode, applies the
/// boosts and evaluates every gate.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioResult> {
    config.validate()?;
    let constants = config.constants();
    let model = config.model.build(constants)?;
    let spin = SpinVector::up(&constants);
    let points = config.ensemble.generate(&model)?;

    let mut runs = Vec::new();
    for &mode in &config.modes {
        let trajectories = integrate_ensemble(&model, &spin, mode, &points, &config.integrator)?;
        runs.push(Run {
            label: mode_label(mode).into(),
            mode,
            boost: None,
            trajectories,
        });
    }
    let w = model
        .packets()
        .first()
        .map(|p| constants.characteristic_speed(p.sigma0.x.min(p.sigma0.y)))
        .unwrap_or(0.0);
    let rest = runs.len();
    for i in 0..rest {
        for &factor in &config.boosts {
            let u = Vec2::new(factor * w, 0.0);
            let base = &runs[i];
            let trajectories = base.trajectories.iter().map(|t| boost_trajectory(t, u)).collect();
            runs.push(Run {
                label: format!("{} u={factor}w", base.label),
                mode: base.mode,
                boost: Some(u),
                trajectories,
            });
        }
    }

    let mut gates = Vec::new();
    for &gate in &config.gates {
        gates.extend(evaluate_gate(gate, config, &model, &spin, &runs)?);
    }
    Ok(ScenarioResult {
        config: config.clone(),
        runs,
        gates,
        provenance: Provenance {
            config_hash: config.hash(),
            seed: config.seed,
            version: env!("CARGO_PKG_VERSION").into(),
        },
    })
}

fn report(gate: Gate, run: &Run, passed: bool, value: f64, threshold: f64, detail: String) -> GateReport {
    GateReport {
        gate: gate.name().into(),
        run: run.label.clone(),
        passed,
        value,
        threshold,
        detail,
    }
}

fn evaluate_gate(
    gate: Gate,
    config: &ScenarioConfig,
    model: &WaveModel,
    spin: &SpinVector,
    runs: &[Run],
) -> Result<Vec<GateReport>> {
    let rest_runs = runs.iter().filter(|r| r.boost.is_none());
    let mut out = Vec::new();
    match gate {
        Gate::GaussianOrbit => {
            for run in rest_runs {
                let rep = gaussian_orbit_report(model, run.mode, &run.trajectories)?;
                let (value, threshold) = if run.mode.spin_term {
                    (rep.position_error.max(rep.speed_error), 1e-6)
                } else {
                    (rep.position_error, 1e-8)
                };
                let passed = value < threshold && rep.linearity_error < 1e-6;
                let detail = format!(
                    "position {:.3e}, speed {:.3e}, chord deviation {:.3e}",
                    rep.position_error, rep.speed_error, rep.linearity_error
                );
                out.push(report(gate, run, passed, value, threshold, detail));
            }
        }
        Gate::RotationAngle => {
            let gamma = model.max_gamma();
            for run in runs.iter().filter(|r| r.boost.is_some()) {
                if !run.mode.spin_term {
                    out.push(report(
                        gate,
                        run,
                        true,
                        0.0,
                        1e-6,
                        "not applicable without the spin term".into(),
                    ));
                    continue;
                }
                let u = run.boost.unwrap_or_default();
                let mut worst: f64 = 0.0;
                for tr in &run.trajectories {
                    let (Some(a), Some(b)) = (tr.samples.first(), tr.samples.last()) else {
                        continue;
                    };
                    // Rest-frame direction of motion.
                    let bhat = (a.v - u).normalize();
                    let chord = b.x - a.x;
                    let measured = bhat.perp(&chord).atan2(bhat.dot(&chord)).abs();
                    let beta = bhat.perp(&u).atan2(bhat.dot(&u)).abs();
                    let oracle = rotation_angle_alpha(tr.initial.norm(), beta, u.norm(), gamma);
                    worst = worst.max((measured - oracle).abs());
                }
                out.push(report(
                    gate,
                    run,
                    worst < 1e-6,
                    worst,
                    1e-6,
                    format!("max |α_measured − α| = {worst:.3e} rad"),
                ));
            }
        }
        Gate::Residuals => {
            let stencil = FdStencil::default();
            for run in rest_runs {
                let worst = run
                    .trajectories
                    .par_iter()
                    .map(|tr| {
                        let mut w: f64 = 0.0;
                        for s in tr.samples.iter().step_by(5) {
                            let c = continuity_residual(model, s.x, s.t, spin, run.mode, &stencil)?;
                            let h = hj_residual(model, s.x, s.t)?;
                            w = w.max(c.abs()).max(h.abs());
                        }
                        Ok(w)
                    })
                    .collect::<Result<Vec<f64>>>()?
                    .into_iter()
                    .fold(0.0, f64::max);
                out.push(report(
                    gate,
                    run,
                    worst < 1e-5,
                    worst,
                    1e-5,
                    format!("max residual {worst:.3e}"),
                ));
            }
        }
        Gate::Chirality => {
            for run in rest_runs {
                let asym = mirror_asymmetry(&run.trajectories);
                let (passed, threshold, detail) = if run.mode.spin_term {
                    (
                        asym > 1e-3,
                        1e-3,
                        format!("mirror asymmetry {asym:.3e} (must exceed threshold)"),
                    )
                } else {
                    (asym < 1e-6, 1e-6, format!("mirror asymmetry {asym:.3e}"))
                };
                out.push(report(gate, run, passed, asym, threshold, detail));
            }
        }
        Gate::AxisCrossings => {
            for run in rest_runs {
                let n = axis_crossings(&run.trajectories);
                let (passed, detail) = if run.mode.spin_term {
                    (n >= 1, format!("{n} axis crossings (at least 1 expected)"))
                } else {
                    (n == 0, format!("{n} axis crossings (none expected)"))
                };
                out.push(report(
                    gate,
                    run,
                    passed,
                    n as f64,
                    if run.mode.spin_term { 1.0 } else { 0.0 },
                    detail,
                ));
            }
        }
        Gate::SpeedRatio => {
            for run in rest_runs {
                let rep = speed_ratio_study(model, config.model.frame_velocity(), &run.trajectories)?;
                let detail = format!(
                    "max |v − V|/Vx = {:.4e}, max |v| = {:.4e} (c = {:.4e}), overlap from t = {:.3}, {} spikes, {} before overlap",
                    rep.max_ratio, rep.max_speed, rep.c_ratio, rep.overlap_onset, rep.spikes, rep.spikes_outside_overlap
                );
                out.push(report(gate, run, rep.passed(), rep.max_ratio, 0.05, detail));
            }
        }
        Gate::NoNodeAborts => {
            for run in rest_runs {
                let n = run.trajectories.iter().filter(|t| t.aborted()).count();
                out.push(report(gate, run, n == 0, n as f64, 0.0, format!("{n} node aborts")));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn preset_catalogue() {
        let p = builtin_presets();
        assert_eq!(p.len(), 7);
        let names: Vec<_> = p.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(
            names,
            [
                "fig2-catherine-wheel",
                "fig3-boosted",
                "fig4-asymmetric-product",
                "fig5-superposition",
                "fig6-two-slit-nospin",
                "fig7-two-slit-spin",
                "fig8-speed-ratio"
            ]
        );
        for c in &p {
            c.validate().unwrap();
        }
        let fig7 = preset("fig7-two-slit-spin").unwrap();
        assert!(matches!(fig7.model, ModelSpec::TwoSlit { separation, .. } if separation == 20.0));
        let fig4 = preset("fig4-asymmetric-product").unwrap();
        assert!(matches!(fig4.model, ModelSpec::Product { sigma0_x, sigma0_y } if sigma0_x == 2.0 * sigma0_y));
        assert!(preset("nope").is_none());
    }

    #[test]
    fn si_scales() {
        let u = UnitSystem::electron();
        // ħ/(mσ0) for an electron at 20 nm.
        assert_relative_eq!(u.speed(), 5788.38, max_relative = 1e-4);
        assert_relative_eq!(u.length() / u.time(), u.speed());
        let fig7 = preset("fig7-two-slit-spin").unwrap().into_si();
        let ModelSpec::TwoSlit { group_velocity, .. } = fig7.model else {
            panic!()
        };
        assert_relative_eq!(group_velocity.x * u.speed(), 1e8, max_relative = 1e-12);
        assert_relative_eq!(fig7.c_ratio * u.speed(), LIGHT_SPEED_SI, max_relative = 1e-12);
        assert!(UnitSystem::Si {
            sigma0: 0.0,
            mass: 1.0,
            hbar: 1.0
        }
        .validate()
        .is_err());
    }

    #[test]
    fn hash_tracks_config() {
        let a = preset("fig2-catherine-wheel").unwrap();
        assert_eq!(a.hash(), a.clone().hash());
        assert_ne!(a.hash(), a.clone().with_seed(1).hash());
    }

    #[test]
    fn catherine_wheel_passes() {
        let r = run_scenario(&preset("fig2-catherine-wheel").unwrap()).unwrap();
        assert!(r.passed(), "{:?}", r.gates);
        assert_eq!(r.runs[0].trajectories.len(), 16);
        assert_eq!(r.runs[0].trajectories[0].samples.len(), 101);
    }

    #[test]
    fn boosted_runs() {
        let r = run_scenario(&preset("fig3-boosted").unwrap()).unwrap();
        assert_eq!(r.runs.len(), 4);
        assert!(r.passed(), "{:?}", r.gates);
    }

    #[test]
    fn invalid_config_names_field() {
        let mut c = preset("fig6-two-slit-nospin").unwrap();
        c.model = ModelSpec::TwoSlit {
            sigma0: 1.0,
            separation: -1.0,
            group_velocity: Vec2::zeros(),
        };
        match run_scenario(&c) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "separation"),
            other => panic!("{other:?}"),
        }
    }
}

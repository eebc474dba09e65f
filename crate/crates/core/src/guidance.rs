//! Spin-extended guidance law and its diagnostics.

use serde::{Deserialize, Serialize};

use crate::integrator::FlowField;
use crate::wavefunction::{eval_fields, FieldSample, PhysicalConstants, WaveModel};
use crate::{Error, Result, Vec2, Vec3};

/// Fixed spin eigenvector `s` with |s| = ħ/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinVector {
    direction: Vec3,
    magnitude: f64,
}

impl SpinVector {
    pub fn new(direction: Vec3, constants: &PhysicalConstants) -> Result<Self> {
        let n = direction.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidModel("spin direction must be non-zero".into()));
        }
        Ok(SpinVector {
            direction: direction / n,
            magnitude: 0.5 * constants.hbar,
        })
    }

    /// s = (ħ/2) ẑ.
    pub fn up(constants: &PhysicalConstants) -> Self {
        SpinVector {
            direction: Vec3::z(),
            magnitude: 0.5 * constants.hbar,
        }
    }

    /// s = −(ħ/2) ẑ.
    pub fn down(constants: &PhysicalConstants) -> Self {
        SpinVector {
            direction: -Vec3::z(),
            magnitude: 0.5 * constants.hbar,
        }
    }

    pub fn direction(&self) -> Vec3 {
        self.direction
    }

    pub fn magnitude(&self) -> f64 {
        self.magnitude
    }

    pub fn vector(&self) -> Vec3 {
        self.direction * self.magnitude
    }

    /// True when the spin is perpendicular to the plane of motion.
    pub fn is_normal_to_plane(&self) -> bool {
        self.direction.x == 0.0 && self.direction.y == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GuidanceMode {
    pub spin_term: bool,
}

impl GuidanceMode {
    /// m v = ∇S − A.
    pub const SPIN_ON: GuidanceMode = GuidanceMode { spin_term: true };
    /// m v = ∇S.
    pub const SPIN_OFF: GuidanceMode = GuidanceMode { spin_term: false };
}

impl Default for GuidanceMode {
    fn default() -> Self {
        Self::SPIN_ON
    }
}

fn planar(v: Vec2) -> Vec3 {
    Vec3::new(v.x, v.y, 0.0)
}

/// A = −∇log ρ × s.
pub fn vector_potential(sample: &FieldSample, spin: &SpinVector) -> Vec3 {
    -planar(sample.grad_log_rho()).cross(&spin.vector())
}

fn velocity3(sample: &FieldSample, spin: &SpinVector, mode: GuidanceMode, constants: &PhysicalConstants) -> Vec3 {
    let mut p = planar(sample.grad_s);
    if mode.spin_term {
        p -= vector_potential(sample, spin);
    }
    p / constants.mass
}

/// Guidance velocity: `(∇S − A)/m` with the spin term, `∇S/m` without.
///
/// Only the in-plane components are returned; an out-of-plane spin would
/// also drive motion along z, which planar scenarios reject.
pub fn velocity(sample: &FieldSample, spin: &SpinVector, mode: GuidanceMode, constants: &PhysicalConstants) -> Vec2 {
    velocity3(sample, spin, mode, constants).xy()
}

/// |∇S| / ((ħ/2)|∇log ρ|); large values mean the spin term is negligible.
/// Infinite where ∇ρ = 0.
pub fn spin_significance(sample: &FieldSample, constants: &PhysicalConstants) -> f64 {
    let denom = 0.5 * constants.hbar * sample.grad_log_rho().norm();
    if denom == 0.0 {
        return f64::INFINITY;
    }
    sample.grad_s.norm() / denom
}

/// ½ (|j|²/c²ρ² + ((1/mc) ∇log ρ·s)²)^½, with j the spin-extended current.
pub fn subluminal_margin(sample: &FieldSample, spin: &SpinVector, constants: &PhysicalConstants) -> f64 {
    let c = constants.c_ratio;
    let v = velocity3(sample, spin, GuidanceMode::SPIN_ON, constants);
    let spin_part = planar(sample.grad_log_rho()).dot(&spin.vector()) / (constants.mass * c);
    0.5 * ((v.norm_squared() / (c * c)) + spin_part * spin_part).sqrt()
}

/// Velocity field of a wave model under a guidance law.
#[derive(Debug, Clone)]
pub struct GuidanceField<'a> {
    pub model: &'a WaveModel,
    pub spin: SpinVector,
    pub mode: GuidanceMode,
}

impl<'a> GuidanceField<'a> {
    pub fn new(model: &'a WaveModel, spin: SpinVector, mode: GuidanceMode) -> Self {
        GuidanceField { model, spin, mode }
    }

    pub fn sample(&self, x: Vec2, t: f64) -> Result<FieldSample> {
        eval_fields(self.model, x, t)
    }
}

impl FlowField for GuidanceField<'_> {
    fn velocity(&self, x: Vec2, t: f64) -> Result<Vec2> {
        let s = eval_fields(self.model, x, t)?;
        Ok(velocity(&s, &self.spin, self.mode, self.model.constants()))
    }

    fn node_margin(&self, x: Vec2, t: f64) -> f64 {
        self.model.density(x, t) / self.model.node_floor(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavefunction::PhysicalConstants;
    use approx::assert_relative_eq;

    fn setup() -> (PhysicalConstants, WaveModel, SpinVector) {
        let c = PhysicalConstants::default();
        (c, WaveModel::gaussian(c, 1.0).unwrap(), SpinVector::up(&c))
    }

    #[test]
    fn vector_potential_of_symmetric_packet() {
        let (_, m, s) = setup();
        let f = eval_fields(&m, Vec2::new(1.0, 0.0), 0.0).unwrap();
        let a = vector_potential(&f, &s);
        assert!(a.x.abs() < 1e-15 && a.z == 0.0);
        assert_relative_eq!(a.y, -0.5, max_relative = 1e-14);
        let centre = eval_fields(&m, Vec2::zeros(), 2.3).unwrap();
        assert_eq!(vector_potential(&centre, &s).norm(), 0.0);
    }

    #[test]
    fn velocity_modes_at_t0() {
        let (c, m, s) = setup();
        let f = eval_fields(&m, Vec2::new(1.0, 0.0), 0.0).unwrap();
        let on = velocity(&f, &s, GuidanceMode::SPIN_ON, &c);
        assert!(on.x.abs() < 1e-15);
        assert_relative_eq!(on.y, 0.5, max_relative = 1e-14);
        let off = velocity(&f, &s, GuidanceMode::SPIN_OFF, &c);
        assert!(off.norm() < 1e-15);
    }

    #[test]
    fn plane_wave_velocity_independent_of_mode() {
        let c = PhysicalConstants::default();
        let m = WaveModel::plane_wave(c, Vec2::new(2.0, 0.0)).unwrap();
        let s = SpinVector::up(&c);
        let f = eval_fields(&m, Vec2::new(0.1, 0.2), 0.3).unwrap();
        assert_eq!(vector_potential(&f, &s).norm(), 0.0);
        for mode in [GuidanceMode::SPIN_ON, GuidanceMode::SPIN_OFF] {
            let v = velocity(&f, &s, mode, &c);
            assert_relative_eq!(v.x, 2.0, max_relative = 1e-14);
            assert!(v.y.abs() < 1e-14);
        }
    }

    #[test]
    fn spin_significance_values() {
        let (c, m, _) = setup();
        let f0 = eval_fields(&m, Vec2::new(0.7, -0.4), 0.0).unwrap();
        assert!(spin_significance(&f0, &c) < 1e-14);
        // γt = 1: ratio equals γt.
        let f1 = eval_fields(&m, Vec2::new(1.0, 0.0), 2.0).unwrap();
        assert_relative_eq!(spin_significance(&f1, &c), 1.0, max_relative = 1e-12);
        let pw = WaveModel::plane_wave(c, Vec2::new(1.0, 1.0)).unwrap();
        let fp = eval_fields(&pw, Vec2::zeros(), 0.0).unwrap();
        assert_eq!(spin_significance(&fp, &c), f64::INFINITY);
    }

    #[test]
    fn subluminal_margin_values() {
        let c = PhysicalConstants {
            c_ratio: 50.0,
            ..PhysicalConstants::default()
        };
        let m = WaveModel::gaussian(c, 1.0).unwrap();
        let s = SpinVector::up(&c);
        let r0 = 1.7;
        let f = eval_fields(&m, Vec2::new(r0, 0.0), 0.0).unwrap();
        assert_relative_eq!(
            subluminal_margin(&f, &s, &c),
            0.5 * 0.5 * r0 / 50.0,
            max_relative = 1e-12
        );

        let k = 0.01 * c.c_ratio;
        let pw = WaveModel::plane_wave(c, Vec2::new(k, 0.0)).unwrap();
        let fp = eval_fields(&pw, Vec2::zeros(), 0.0).unwrap();
        assert_relative_eq!(subluminal_margin(&fp, &s, &c), 0.005, max_relative = 1e-12);
    }

    #[test]
    fn subluminal_margin_in_si_units() {
        // Electron, σ0 = 20 nm: the margin reaches ½ at r0 = c/γ.
        let c_light = 299_792_458.0;
        let c = PhysicalConstants::new(1.054_571_817e-34, 9.109_383_701_5e-31, c_light).unwrap();
        let sigma0 = 2e-8;
        let s = SpinVector::up(&c);
        let r0 = c_light / c.gamma(sigma0);
        // r0 ≈ 2.07 mm; ρ there underflows, so use the t = 0 closed form of
        // the sample instead of evaluating Ψ.
        assert!((r0 - 2.07e-3).abs() < 0.01e-3, "{r0}");
        let sample = FieldSample {
            psi: num_complex::Complex64::new(1.0, 0.0),
            rho: 1.0,
            grad_rho: Vec2::new(-r0 / (sigma0 * sigma0), 0.0),
            grad_s: Vec2::zeros(),
        };
        assert_relative_eq!(subluminal_margin(&sample, &s, &c), 0.5, max_relative = 1e-12);
    }

    #[test]
    fn off_axis_spin_contributes_to_margin() {
        let c = PhysicalConstants {
            c_ratio: 10.0,
            ..PhysicalConstants::default()
        };
        let m = WaveModel::gaussian(c, 1.0).unwrap();
        let s = SpinVector::new(Vec3::new(1.0, 0.0, 1.0), &c).unwrap();
        let f = eval_fields(&m, Vec2::new(1.0, 0.0), 0.0).unwrap();
        // ∇log ρ = −x̂ and s = a(x̂ + ẑ): ∇log ρ·s = −a and v = a ŷ.
        let a = 0.5 / 2f64.sqrt();
        let expected = 0.5 * (2.0 * (a / 10.0).powi(2)).sqrt();
        assert_relative_eq!(subluminal_margin(&f, &s, &c), expected, max_relative = 1e-12);
        assert!(!s.is_normal_to_plane());
        assert!(SpinVector::new(Vec3::zeros(), &c).is_err());
    }

    #[test]
    fn euler_potentials_reproduce_vector_potential() {
        let c = PhysicalConstants::default();
        let m = WaveModel::two_slit(c, 1.0, 3.0, Vec2::new(0.4, 0.0)).unwrap();
        let s = SpinVector::up(&c);
        let h = 1e-5;
        for &(x, y, t) in &[(0.3, 0.8, 0.5), (-1.0, -2.1, 1.5), (2.0, 0.1, 3.0)] {
            let p = Vec2::new(x, y);
            let a = |q: Vec2| -m.density(q, t).ln();
            let grad_a = Vec3::new(
                (a(p + Vec2::x() * h) - a(p - Vec2::x() * h)) / (2.0 * h),
                (a(p + Vec2::y() * h) - a(p - Vec2::y() * h)) / (2.0 * h),
                0.0,
            );
            // ∇(s·x) = s.
            let euler = grad_a.cross(&s.vector());
            let direct = vector_potential(&eval_fields(&m, p, t).unwrap(), &s);
            assert!((euler - direct).norm() < 1e-8, "{euler} vs {direct}");
            // A ⟂ ∇log ρ.
            let f = eval_fields(&m, p, t).unwrap();
            assert!(direct.xy().dot(&f.grad_log_rho()).abs() < 1e-14 * f.grad_log_rho().norm_squared().max(1.0));
        }
    }
}

//! Quantum potentials, electric-like and magnetic-like fields, the
//! Lorentz-like force and the continuity / Hamilton–Jacobi residuals.
//!
//! First and second derivatives of ρ and S come from the analytic jet of Ψ.
//! Quantities that need one more derivative (∇Q′ and ∇×A) are obtained by
//! central differences of those analytic values.

use serde::{Deserialize, Serialize};

use crate::guidance::{self, GuidanceMode, SpinVector};
use crate::wavefunction::{fields_from_jet, FieldSample, WaveModel};
use crate::{Result, Vec2, Vec3};

/// Central second-order stencil with step `relative_step · σ(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdStencil {
    pub relative_step: f64,
}

impl Default for FdStencil {
    fn default() -> Self {
        FdStencil { relative_step: 1e-4 }
    }
}

impl FdStencil {
    pub fn step(&self, model: &WaveModel, t: f64) -> f64 {
        self.relative_step * model.length_scale(t)
    }
}

/// Everything the force law needs at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceFieldSample {
    pub q: f64,
    pub q_prime: f64,
    pub e: Vec3,
    pub b: Vec3,
    pub lorentz: Vec3,
}

/// ρ and S with derivatives up to second order in space and first in time.
#[derive(Debug, Clone, Copy)]
struct Derived {
    fields: FieldSample,
    /// (∂xx ρ, ∂xy ρ, ∂yy ρ)
    hess_rho: [f64; 3],
    drho_dt: f64,
    dgrad_rho_dt: Vec2,
    /// ∂S/∂t = ħ Im(∂tΨ/Ψ)
    ds_dt: f64,
}

fn derived(model: &WaveModel, x: Vec2, t: f64) -> Result<Derived> {
    let jet = model.jet(x, t);
    let fields = fields_from_jet(model, &jet, x, t)?;
    let p = jet.psi;
    let pc = p.conj();
    let g = jet.grad;
    let h = jet.hess;
    let hess_rho = [
        2.0 * (pc * h[0] + g[0].conj() * g[0]).re,
        2.0 * (pc * h[1] + g[0].conj() * g[1]).re,
        2.0 * (pc * h[2] + g[1].conj() * g[1]).re,
    ];
    let drho_dt = 2.0 * (pc * jet.dt).re;
    let dgrad_rho_dt = Vec2::new(
        2.0 * (jet.dt.conj() * g[0] + pc * jet.grad_dt[0]).re,
        2.0 * (jet.dt.conj() * g[1] + pc * jet.grad_dt[1]).re,
    );
    let ds_dt = model.constants().hbar * (pc * jet.dt).im / fields.rho;
    Ok(Derived {
        fields,
        hess_rho,
        drho_dt,
        dgrad_rho_dt,
        ds_dt,
    })
}

impl Derived {
    fn laplacian_rho(&self) -> f64 {
        self.hess_rho[0] + self.hess_rho[2]
    }

    fn quantum_potential(&self, model: &WaveModel) -> f64 {
        let c = model.constants();
        let rho = self.fields.rho;
        let lap_sqrt_over_sqrt =
            0.5 * self.laplacian_rho() / rho - 0.25 * self.fields.grad_rho.norm_squared() / (rho * rho);
        -(c.hbar * c.hbar / (2.0 * c.mass)) * lap_sqrt_over_sqrt
    }

    fn vector_potential(&self, spin: &SpinVector, mode: GuidanceMode) -> Vec3 {
        if mode.spin_term {
            guidance::vector_potential(&self.fields, spin)
        } else {
            Vec3::zeros()
        }
    }

    fn q_prime(&self, model: &WaveModel, spin: &SpinVector, mode: GuidanceMode) -> f64 {
        let m = model.constants().mass;
        let a = self.vector_potential(spin, mode);
        let grad_s = Vec3::new(self.fields.grad_s.x, self.fields.grad_s.y, 0.0);
        self.quantum_potential(model) + grad_s.dot(&a) / m - a.norm_squared() / (2.0 * m)
    }

    /// ∂A/∂t = −∂t(∇log ρ) × s.
    fn vector_potential_dt(&self, spin: &SpinVector, mode: GuidanceMode) -> Vec3 {
        if !mode.spin_term {
            return Vec3::zeros();
        }
        let rho = self.fields.rho;
        let d = self.dgrad_rho_dt / rho - self.fields.grad_rho * (self.drho_dt / (rho * rho));
        -Vec3::new(d.x, d.y, 0.0).cross(&spin.vector())
    }

    /// Hessian of log ρ as (xx, xy, yy).
    fn hess_log_rho(&self) -> [f64; 3] {
        let rho = self.fields.rho;
        let g = self.fields.grad_rho;
        [
            self.hess_rho[0] / rho - g.x * g.x / (rho * rho),
            self.hess_rho[1] / rho - g.x * g.y / (rho * rho),
            self.hess_rho[2] / rho - g.y * g.y / (rho * rho),
        ]
    }
}

/// Q = −(ħ²/2m) ∇²√ρ / √ρ from the analytic Hessian of Ψ.
pub fn quantum_potential(model: &WaveModel, x: Vec2, t: f64) -> Result<f64> {
    Ok(derived(model, x, t)?.quantum_potential(model))
}

/// Q′ = Q + ∇S·A/m − A²/2m; equal to Q with the spin term off.
pub fn scalar_potential_qprime(
    model: &WaveModel,
    x: Vec2,
    t: f64,
    spin: &SpinVector,
    mode: GuidanceMode,
) -> Result<f64> {
    Ok(derived(model, x, t)?.q_prime(model, spin, mode))
}

/// ∂A/∂t from the analytic time derivatives of Ψ and ∇Ψ.
pub fn vector_potential_dt(model: &WaveModel, x: Vec2, t: f64, spin: &SpinVector) -> Result<Vec3> {
    Ok(derived(model, x, t)?.vector_potential_dt(spin, GuidanceMode::SPIN_ON))
}

fn central_gradient<F>(x: Vec2, h: f64, mut f: F) -> Result<Vec2>
where
    F: FnMut(Vec2) -> Result<f64>,
{
    let dx = Vec2::new(h, 0.0);
    let dy = Vec2::new(0.0, h);
    let gx = (f(x + dx)? - f(x - dx)?) / (2.0 * h);
    let gy = (f(x + dy)? - f(x - dy)?) / (2.0 * h);
    Ok(Vec2::new(gx, gy))
}

/// Curl of A (planar fields, no z-dependence) by central differences.
fn curl_vector_potential(model: &WaveModel, x: Vec2, t: f64, spin: &SpinVector, h: f64) -> Result<Vec3> {
    let a = |p: Vec2| -> Result<Vec3> { Ok(guidance::vector_potential(&derived(model, p, t)?.fields, spin)) };
    let dx = Vec2::new(h, 0.0);
    let dy = Vec2::new(0.0, h);
    let da_dx = (a(x + dx)? - a(x - dx)?) / (2.0 * h);
    let da_dy = (a(x + dy)? - a(x - dy)?) / (2.0 * h);
    Ok(Vec3::new(da_dy.z, -da_dx.z, da_dx.y - da_dy.x))
}

/// E = −∇Q′ − ∂A/∂t and B = ∇×A.
///
/// ∇Q′ and ∇×A are central differences of analytic values; ∂A/∂t is
/// analytic. With the spin term off this reduces to E = −∇Q, B = 0.
pub fn fields_eb(
    model: &WaveModel,
    x: Vec2,
    t: f64,
    spin: &SpinVector,
    mode: GuidanceMode,
    stencil: &FdStencil,
) -> Result<(Vec3, Vec3)> {
    let h = stencil.step(model, t);
    let here = derived(model, x, t)?;
    let grad_qp = central_gradient(x, h, |p| Ok(derived(model, p, t)?.q_prime(model, spin, mode)))?;
    let e = -Vec3::new(grad_qp.x, grad_qp.y, 0.0) - here.vector_potential_dt(spin, mode);
    let b = if mode.spin_term {
        curl_vector_potential(model, x, t, spin, h)?
    } else {
        Vec3::zeros()
    };
    Ok((e, b))
}

/// B = −∇(∇log ρ·s) + s ∇²log ρ, evaluated from the analytic Hessian of ρ.
pub fn magnetic_field_closed_form(model: &WaveModel, x: Vec2, t: f64, spin: &SpinVector) -> Result<Vec3> {
    let d = derived(model, x, t)?;
    let [hxx, hxy, hyy] = d.hess_log_rho();
    let s = spin.vector();
    let grad_dot = Vec3::new(hxx * s.x + hxy * s.y, hxy * s.x + hyy * s.y, 0.0);
    Ok(-grad_dot + s * (hxx + hyy))
}

/// Full force-field bundle at one point.
pub fn force_sample(
    model: &WaveModel,
    x: Vec2,
    t: f64,
    spin: &SpinVector,
    mode: GuidanceMode,
    stencil: &FdStencil,
) -> Result<ForceFieldSample> {
    let d = derived(model, x, t)?;
    let (e, b) = fields_eb(model, x, t, spin, mode, stencil)?;
    let v = guidance::velocity(&d.fields, spin, mode, model.constants());
    let lorentz = e + Vec3::new(v.x, v.y, 0.0).cross(&b);
    Ok(ForceFieldSample {
        q: d.quantum_potential(model),
        q_prime: d.q_prime(model, spin, mode),
        e,
        b,
        lorentz,
    })
}

/// m ẍ = E + ẋ×B evaluated with the local guidance velocity; −∇Q with the
/// spin term off.
pub fn lorentz_force(
    model: &WaveModel,
    x: Vec2,
    t: f64,
    spin: &SpinVector,
    mode: GuidanceMode,
    stencil: &FdStencil,
) -> Result<Vec3> {
    Ok(force_sample(model, x, t, spin, mode, stencil)?.lorentz)
}

/// ∂ρ/∂t + ∇·j with j = ρ v under the given guidance law.
///
/// ∂ρ/∂t is analytic, the divergence is a central difference of ρ v.
pub fn continuity_residual(
    model: &WaveModel,
    x: Vec2,
    t: f64,
    spin: &SpinVector,
    mode: GuidanceMode,
    stencil: &FdStencil,
) -> Result<f64> {
    let h = stencil.step(model, t);
    let c = model.constants();
    let current = |p: Vec2| -> Result<Vec2> {
        let f = derived(model, p, t)?.fields;
        Ok(guidance::velocity(&f, spin, mode, c) * f.rho)
    };
    let dx = Vec2::new(h, 0.0);
    let dy = Vec2::new(0.0, h);
    let div =
        (current(x + dx)?.x - current(x - dx)?.x) / (2.0 * h) + (current(x + dy)?.y - current(x - dy)?.y) / (2.0 * h);
    Ok(derived(model, x, t)?.drho_dt + div)
}

/// ∂S/∂t + (∇S)²/2m + Q (V = 0). Every term is analytic.
pub fn hj_residual(model: &WaveModel, x: Vec2, t: f64) -> Result<f64> {
    let d = derived(model, x, t)?;
    let m = model.constants().mass;
    Ok(d.ds_dt + d.fields.grad_s.norm_squared() / (2.0 * m) + d.quantum_potential(model))
}

/// −∇Q by central differences of the analytic Q.
pub fn quantum_force(model: &WaveModel, x: Vec2, t: f64, stencil: &FdStencil) -> Result<Vec2> {
    let h = stencil.step(model, t);
    let g = central_gradient(x, h, |p| quantum_potential(model, p, t))?;
    Ok(-g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavefunction::{boost_model, PhysicalConstants};
    use approx::assert_relative_eq;

    fn gaussian() -> (WaveModel, SpinVector) {
        let c = PhysicalConstants::default();
        (WaveModel::gaussian(c, 1.0).unwrap(), SpinVector::up(&c))
    }

    /// Oracle: ∇²√ρ/√ρ by a five-point stencil on √ρ.
    fn fd_quantum_potential(model: &WaveModel, x: Vec2, t: f64) -> f64 {
        let h = 1e-3;
        let s = |p: Vec2| model.density(p, t).sqrt();
        let lap = (s(x + Vec2::x() * h) + s(x - Vec2::x() * h) + s(x + Vec2::y() * h) + s(x - Vec2::y() * h)
            - 4.0 * s(x))
            / (h * h);
        -0.5 * lap / s(x)
    }

    #[test]
    fn quantum_potential_of_symmetric_packet() {
        let (m, _) = gaussian();
        let q0 = quantum_potential(&m, Vec2::zeros(), 0.0).unwrap();
        assert_relative_eq!(q0, 0.5, max_relative = 1e-14);
        assert_relative_eq!(q0, fd_quantum_potential(&m, Vec2::zeros(), 0.0), max_relative = 1e-6);
        let q2 = quantum_potential(&m, Vec2::new(0.0, 2.0), 0.0).unwrap();
        assert!(q2.abs() < 1e-14);
        assert!(fd_quantum_potential(&m, Vec2::new(0.0, 2.0), 0.0).abs() < 1e-6);
        let pw = WaveModel::plane_wave(*m.constants(), Vec2::new(1.0, -2.0)).unwrap();
        assert!(quantum_potential(&pw, Vec2::new(0.3, 0.3), 1.0).unwrap().abs() < 1e-13);
    }

    #[test]
    fn quantum_potential_matches_fd_for_superposition() {
        let c = PhysicalConstants::default();
        let m = WaveModel::two_slit(c, 1.0, 5.0, Vec2::new(1.0, 0.0)).unwrap();
        for &(x, y, t) in &[(0.2, 1.0, 0.5), (3.0, -2.0, 2.5), (0.0, 0.4, 4.0)] {
            let p = Vec2::new(x, y);
            let q = quantum_potential(&m, p, t).unwrap();
            let fd = fd_quantum_potential(&m, p, t);
            assert!((q - fd).abs() < 1e-5 * (1.0 + q.abs()), "{q} vs {fd}");
        }
    }

    #[test]
    fn q_prime_values() {
        let (m, s) = gaussian();
        let x = Vec2::new(1.0, 0.0);
        let qp = scalar_potential_qprime(&m, x, 0.0, &s, GuidanceMode::SPIN_ON).unwrap();
        // Direct term-by-term evaluation: Q = 0.375, ∇S = 0, |A| = 0.5.
        assert_relative_eq!(qp, 0.375 - 0.125, max_relative = 1e-13);
        let off = scalar_potential_qprime(&m, Vec2::new(0.3, 1.1), 1.3, &s, GuidanceMode::SPIN_OFF).unwrap();
        let q = quantum_potential(&m, Vec2::new(0.3, 1.1), 1.3).unwrap();
        assert_eq!(off, q);
        let pw = WaveModel::plane_wave(*m.constants(), Vec2::new(1.0, 0.0)).unwrap();
        let qpw = scalar_potential_qprime(&pw, x, 0.4, &s, GuidanceMode::SPIN_ON).unwrap();
        assert!(qpw.abs() < 1e-13);
    }

    #[test]
    fn magnetic_field_of_symmetric_packet() {
        let (m, s) = gaussian();
        let st = FdStencil::default();
        for &(x, y) in &[(0.0, 0.0), (1.0, 0.5), (-2.0, 1.5)] {
            let (_, b) = fields_eb(&m, Vec2::new(x, y), 0.0, &s, GuidanceMode::SPIN_ON, &st).unwrap();
            assert!((b - Vec3::new(0.0, 0.0, -1.0)).norm() < 1e-7, "{b}");
            let closed = magnetic_field_closed_form(&m, Vec2::new(x, y), 0.0, &s).unwrap();
            assert!((closed - Vec3::new(0.0, 0.0, -1.0)).norm() < 1e-12);
        }
        // B = −ħ/σ² ẑ at later times too.
        let t = 3.0;
        let sig2 = 1.0 + 0.25 * t * t;
        let b = magnetic_field_closed_form(&m, Vec2::new(0.4, 0.1), t, &s).unwrap();
        assert_relative_eq!(b.z, -1.0 / sig2, max_relative = 1e-12);
    }

    #[test]
    fn plane_wave_has_no_fields() {
        let c = PhysicalConstants::default();
        let pw = WaveModel::plane_wave(c, Vec2::new(0.7, 0.2)).unwrap();
        let s = SpinVector::up(&c);
        let (e, b) = fields_eb(
            &pw,
            Vec2::new(1.0, 2.0),
            0.5,
            &s,
            GuidanceMode::SPIN_ON,
            &FdStencil::default(),
        )
        .unwrap();
        assert!(e.norm() < 1e-8 && b.norm() < 1e-8);
        let f = lorentz_force(
            &pw,
            Vec2::zeros(),
            0.0,
            &s,
            GuidanceMode::SPIN_ON,
            &FdStencil::default(),
        )
        .unwrap();
        assert!(f.norm() < 1e-8);
    }

    #[test]
    fn lorentz_force_vanishes_for_symmetric_packet() {
        let (m, s) = gaussian();
        let st = FdStencil::default();
        for &t in &[0.0, 2.0, 6.0] {
            for &(x, y) in &[(1.0, 0.0), (0.5, -1.5), (-2.0, 2.0)] {
                let f = lorentz_force(&m, Vec2::new(x, y), t, &s, GuidanceMode::SPIN_ON, &st).unwrap();
                assert!(f.xy().norm() < 1e-7, "t={t} {f}");
            }
        }
    }

    #[test]
    fn spin_off_force_is_minus_grad_q() {
        let (m, s) = gaussian();
        let st = FdStencil::default();
        let f = lorentz_force(&m, Vec2::new(1.0, 0.0), 0.0, &s, GuidanceMode::SPIN_OFF, &st).unwrap();
        assert!((f - Vec3::new(0.25, 0.0, 0.0)).norm() < 1e-8, "{f}");
        let g = quantum_force(&m, Vec2::new(1.0, 0.0), 0.0, &st).unwrap();
        assert!((g - f.xy()).norm() < 1e-12);
    }

    #[test]
    fn vector_potential_dt_matches_fd() {
        let c = PhysicalConstants::default();
        let s = SpinVector::up(&c);
        let m = WaveModel::two_slit(c, 1.0, 4.0, Vec2::new(0.5, 0.0)).unwrap();
        let ht = 1e-5;
        for &(x, y, t) in &[(0.3, 1.2, 1.0), (-0.8, -0.5, 2.5)] {
            let p = Vec2::new(x, y);
            let a = |tt: f64| guidance::vector_potential(&crate::wavefunction::eval_fields(&m, p, tt).unwrap(), &s);
            let fd = (a(t + ht) - a(t - ht)) / (2.0 * ht);
            let an = vector_potential_dt(&m, p, t, &s).unwrap();
            assert!((fd - an).norm() < 1e-7 * (1.0 + an.norm()), "{fd} vs {an}");
        }
    }

    #[test]
    fn residuals_small() {
        let (m, s) = gaussian();
        let st = FdStencil::default();
        let r = continuity_residual(&m, Vec2::new(1.0, 0.5), 1.0, &s, GuidanceMode::SPIN_ON, &st).unwrap();
        assert!(r.abs() < 1e-6, "{r}");
        let on = continuity_residual(&m, Vec2::new(0.4, -0.9), 2.0, &s, GuidanceMode::SPIN_ON, &st).unwrap();
        let off = continuity_residual(&m, Vec2::new(0.4, -0.9), 2.0, &s, GuidanceMode::SPIN_OFF, &st).unwrap();
        assert!((on - off).abs() < 1e-8);
        assert!(hj_residual(&m, Vec2::new(1.0, 0.0), 1.0).unwrap().abs() < 1e-12);

        let pw = WaveModel::plane_wave(*m.constants(), Vec2::new(1.5, -0.5)).unwrap();
        assert!(hj_residual(&pw, Vec2::new(2.0, 1.0), 3.0).unwrap().abs() < 1e-14);

        let c = PhysicalConstants::default();
        let two = WaveModel::two_slit(c, 1.0, 20.0, Vec2::new(100.0, 0.0)).unwrap();
        let t = 10.0;
        let p = Vec2::new(1000.0 + 2.0, 1.3);
        let r2 = continuity_residual(&two, p, t, &s, GuidanceMode::SPIN_ON, &st).unwrap();
        assert!(r2.abs() < 1e-5, "{r2}");
    }

    #[test]
    fn hj_residual_is_frame_independent() {
        let c = PhysicalConstants::default();
        let rest = WaveModel::gaussian(c, 1.0).unwrap();
        let u = Vec2::new(2.0, -1.0);
        let lab = boost_model(&rest, u);
        let t = 1.5;
        let x = Vec2::new(0.6, 0.2);
        assert!(hj_residual(&rest, x, t).unwrap().abs() < 1e-12);
        assert!(hj_residual(&lab, x + u * t, t).unwrap().abs() < 1e-12);
    }
}

//! Analytic wave models: free Gaussian packets (optionally moving, per-axis
//! widths), weighted superpositions of them, and plane waves.
//!
//! Every model is evaluated together with its exact first and second spatial
//! derivatives and its time derivatives, so the guidance velocity, the
//! quantum potential and the residual checks never difference Ψ itself.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::{Error, Result, Vec2};

/// Densities below this fraction of the model's peak density are treated as
/// nodes.
pub const NODE_FLOOR_FRACTION: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub mass: f64,
    /// Speed of light in internal units; only the subluminal diagnostic uses it.
    pub c_ratio: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        PhysicalConstants {
            hbar: 1.0,
            mass: 1.0,
            c_ratio: 2.0e5,
        }
    }
}

impl PhysicalConstants {
    pub fn new(hbar: f64, mass: f64, c_ratio: f64) -> Result<Self> {
        for (name, v) in [("hbar", hbar), ("mass", mass), ("c_ratio", c_ratio)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidModel(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(PhysicalConstants { hbar, mass, c_ratio })
    }

    /// Spreading rate γ = ħ/(2mσ0²).
    pub fn gamma(&self, sigma0: f64) -> f64 {
        self.hbar / (2.0 * self.mass * sigma0 * sigma0)
    }

    /// Characteristic trajectory speed w = γσ0 = ħ/(2mσ0).
    pub fn characteristic_speed(&self, sigma0: f64) -> f64 {
        self.gamma(sigma0) * sigma0
    }
}

/// Half-width of a freely spreading Gaussian, σ(t) = σ0 (1 + γ²t²)^½.
pub fn sigma_of_t(sigma0: f64, t: f64, constants: &PhysicalConstants) -> f64 {
    let gt = constants.gamma(sigma0) * t;
    sigma0 * (1.0 + gt * gt).sqrt()
}

/// One free Gaussian packet, separable in x and y.
///
/// `sigma0` is the per-axis standard deviation of |ψ|² at t = 0. The packet
/// phase is referenced to `center0`, so `weight` is the amplitude at the
/// packet centre at t = 0 up to the normalisation factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPacket {
    pub center0: Vec2,
    pub group_velocity: Vec2,
    pub sigma0: Vec2,
    pub weight: Complex64,
}

impl GaussianPacket {
    /// Unit-weight packet at rest.
    pub fn at_rest(center0: Vec2, sigma0: Vec2) -> Self {
        GaussianPacket {
            center0,
            group_velocity: Vec2::zeros(),
            sigma0,
            weight: Complex64::new(1.0, 0.0),
        }
    }

    pub fn with_velocity(mut self, velocity: Vec2) -> Self {
        self.group_velocity = velocity;
        self
    }

    pub fn with_weight(mut self, weight: Complex64) -> Self {
        self.weight = weight;
        self
    }

    pub fn center_at(&self, t: f64) -> Vec2 {
        self.center0 + self.group_velocity * t
    }

    pub fn sigma_at(&self, t: f64, constants: &PhysicalConstants) -> Vec2 {
        Vec2::new(
            sigma_of_t(self.sigma0.x, t, constants),
            sigma_of_t(self.sigma0.y, t, constants),
        )
    }

    pub fn is_symmetric(&self) -> bool {
        self.sigma0.x == self.sigma0.y
    }

    fn validate(&self) -> Result<()> {
        if !(self.sigma0.x > 0.0 && self.sigma0.y > 0.0) {
            return Err(Error::InvalidModel(format!(
                "packet widths must be positive, got ({}, {})",
                self.sigma0.x, self.sigma0.y
            )));
        }
        if self.weight.norm() <= 0.0 || self.weight.norm().is_nan() {
            return Err(Error::InvalidModel("packet weight must be non-zero".into()));
        }
        let finite = self
            .center0
            .iter()
            .chain(self.group_velocity.iter())
            .all(|v| v.is_finite())
            && self.weight.re.is_finite()
            && self.weight.im.is_finite();
        if !finite {
            return Err(Error::InvalidModel("packet parameters must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum WaveKind {
    /// Weighted sum of Gaussian packets.
    Packets(Vec<GaussianPacket>),
    /// Free plane wave `amplitude · exp(i(k·x − ħk²t/2m))`.
    PlaneWave { k: Vec2, amplitude: Complex64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveModel {
    kind: WaveKind,
    constants: PhysicalConstants,
}

/// Ψ with its exact derivatives at one spacetime point.
///
/// `hess` holds (∂xx, ∂xy, ∂yy).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub psi: Complex64,
    pub grad: [Complex64; 2],
    pub hess: [Complex64; 3],
    pub dt: Complex64,
    pub grad_dt: [Complex64; 2],
}

impl Jet {
    fn zero() -> Self {
        let z = Complex64::new(0.0, 0.0);
        Jet {
            psi: z,
            grad: [z; 2],
            hess: [z; 3],
            dt: z,
            grad_dt: [z; 2],
        }
    }

    fn add_scaled(&mut self, other: &Jet, w: Complex64) {
        self.psi += w * other.psi;
        for i in 0..2 {
            self.grad[i] += w * other.grad[i];
            self.grad_dt[i] += w * other.grad_dt[i];
        }
        for i in 0..3 {
            self.hess[i] += w * other.hess[i];
        }
        self.dt += w * other.dt;
    }
}

/// Pointwise density and phase-gradient data consumed by the guidance law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub psi: Complex64,
    pub rho: f64,
    pub grad_rho: Vec2,
    /// ∇S, computed as ħ Im(∇Ψ/Ψ).
    pub grad_s: Vec2,
}

impl FieldSample {
    pub fn grad_log_rho(&self) -> Vec2 {
        self.grad_rho / self.rho
    }
}

/// One-dimensional free Gaussian factor and its derivatives.
struct AxisFactor {
    f: Complex64,
    dx: Complex64,
    dxx: Complex64,
    dt: Complex64,
    dxt: Complex64,
}

fn axis_factor(x: f64, t: f64, c0: f64, u: f64, s0: f64, constants: &PhysicalConstants) -> AxisFactor {
    let i = Complex64::i();
    let hbar = constants.hbar;
    let m = constants.mass;
    let gamma = constants.gamma(s0);
    let k = m * u / hbar;
    let s2 = s0 * s0;
    let d = Complex64::new(1.0, gamma * t);
    let xi = x - c0 - u * t;

    let log_f =
        -0.25 * (2.0 * PI * s2).ln() - xi * xi / (4.0 * s2 * d) + i * (k * (x - c0) - hbar * k * k * t / (2.0 * m));
    let f = log_f.exp() / d.sqrt();

    let lx = -xi / (2.0 * s2 * d) + i * k;
    let lxx = -1.0 / (2.0 * s2 * d);
    let lt = -i * gamma / (2.0 * d) + xi * u / (2.0 * s2 * d) + i * gamma * xi * xi / (4.0 * s2 * d * d)
        - i * hbar * k * k / (2.0 * m);
    let lxt = u / (2.0 * s2 * d) + i * gamma * xi / (2.0 * s2 * d * d);

    AxisFactor {
        f,
        dx: f * lx,
        dxx: f * (lx * lx + lxx),
        dt: f * lt,
        dxt: f * (lx * lt + lxt),
    }
}

fn packet_jet(p: &GaussianPacket, x: Vec2, t: f64, constants: &PhysicalConstants) -> Jet {
    let fx = axis_factor(x.x, t, p.center0.x, p.group_velocity.x, p.sigma0.x, constants);
    let fy = axis_factor(x.y, t, p.center0.y, p.group_velocity.y, p.sigma0.y, constants);
    Jet {
        psi: fx.f * fy.f,
        grad: [fx.dx * fy.f, fx.f * fy.dx],
        hess: [fx.dxx * fy.f, fx.dx * fy.dx, fx.f * fy.dxx],
        dt: fx.dt * fy.f + fx.f * fy.dt,
        grad_dt: [fx.dxt * fy.f + fx.dx * fy.dt, fx.dt * fy.dx + fx.f * fy.dxt],
    }
}

impl WaveModel {
    pub fn new(kind: WaveKind, constants: PhysicalConstants) -> Result<Self> {
        match &kind {
            WaveKind::Packets(packets) => {
                if packets.is_empty() {
                    return Err(Error::InvalidModel("at least one packet is required".into()));
                }
                for p in packets {
                    p.validate()?;
                }
            }
            WaveKind::PlaneWave { k, amplitude } => {
                if !(k.x.is_finite() && k.y.is_finite()) {
                    return Err(Error::InvalidModel("wavevector must be finite".into()));
                }
                if amplitude.norm() <= 0.0 || amplitude.norm().is_nan() {
                    return Err(Error::InvalidModel("plane-wave amplitude must be non-zero".into()));
                }
            }
        }
        Ok(WaveModel { kind, constants })
    }

    /// Symmetric packet at rest at the origin.
    pub fn gaussian(constants: PhysicalConstants, sigma0: f64) -> Result<Self> {
        Self::product(constants, sigma0, sigma0)
    }

    /// Product of two stationary Gaussians with different widths.
    pub fn product(constants: PhysicalConstants, sigma0_x: f64, sigma0_y: f64) -> Result<Self> {
        let p = GaussianPacket::at_rest(Vec2::zeros(), Vec2::new(sigma0_x, sigma0_y));
        Self::new(WaveKind::Packets(vec![p]), constants)
    }

    pub fn superposition(constants: PhysicalConstants, packets: Vec<GaussianPacket>) -> Result<Self> {
        Self::new(WaveKind::Packets(packets), constants)
    }

    /// Two identical symmetric packets centred at (0, ±separation/2), both
    /// moving with `velocity`.
    pub fn two_slit(constants: PhysicalConstants, sigma0: f64, separation: f64, velocity: Vec2) -> Result<Self> {
        if !(separation >= 0.0 && separation.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "separation must be non-negative, got {separation}"
            )));
        }
        let a = 0.5 * separation;
        let w = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let s = Vec2::new(sigma0, sigma0);
        let packets = [a, -a]
            .iter()
            .map(|&cy| {
                GaussianPacket::at_rest(Vec2::new(0.0, cy), s)
                    .with_velocity(velocity)
                    .with_weight(w)
            })
            .collect();
        Self::superposition(constants, packets)
    }

    pub fn plane_wave(constants: PhysicalConstants, k: Vec2) -> Result<Self> {
        Self::new(
            WaveKind::PlaneWave {
                k,
                amplitude: Complex64::new(1.0, 0.0),
            },
            constants,
        )
    }

    pub fn kind(&self) -> &WaveKind {
        &self.kind
    }

    pub fn constants(&self) -> &PhysicalConstants {
        &self.constants
    }

    pub fn packets(&self) -> &[GaussianPacket] {
        match &self.kind {
            WaveKind::Packets(p) => p,
            WaveKind::PlaneWave { .. } => &[],
        }
    }

    pub fn is_plane_wave(&self) -> bool {
        matches!(self.kind, WaveKind::PlaneWave { .. })
    }

    /// The sole packet, if the model is exactly one Gaussian.
    pub fn single_packet(&self) -> Option<&GaussianPacket> {
        match self.packets() {
            [p] => Some(p),
            _ => None,
        }
    }

    pub fn jet(&self, x: Vec2, t: f64) -> Jet {
        match &self.kind {
            WaveKind::Packets(packets) => {
                let mut acc = Jet::zero();
                for p in packets {
                    acc.add_scaled(&packet_jet(p, x, t, &self.constants), p.weight);
                }
                acc
            }
            WaveKind::PlaneWave { k, amplitude } => {
                let i = Complex64::i();
                let hbar = self.constants.hbar;
                let m = self.constants.mass;
                let omega = hbar * k.norm_squared() / (2.0 * m);
                let psi = amplitude * (i * (k.dot(&x) - omega * t)).exp();
                let dt = -i * omega * psi;
                Jet {
                    psi,
                    grad: [i * k.x * psi, i * k.y * psi],
                    hess: [-k.x * k.x * psi, -k.x * k.y * psi, -k.y * k.y * psi],
                    dt,
                    grad_dt: [i * k.x * dt, i * k.y * dt],
                }
            }
        }
    }

    /// Upper bound on max |Ψ|² at time t, used to scale the node floor.
    pub fn peak_density(&self, t: f64) -> f64 {
        match &self.kind {
            WaveKind::Packets(packets) => {
                let amp: f64 = packets
                    .iter()
                    .map(|p| {
                        let s = p.sigma_at(t, &self.constants);
                        p.weight.norm() / (2.0 * PI * s.x * s.y).sqrt()
                    })
                    .sum();
                amp * amp
            }
            WaveKind::PlaneWave { amplitude, .. } => amplitude.norm_sqr(),
        }
    }

    pub fn node_floor(&self, t: f64) -> f64 {
        NODE_FLOOR_FRACTION * self.peak_density(t)
    }

    /// Smallest packet half-width at time t; unit length for plane waves.
    pub fn length_scale(&self, t: f64) -> f64 {
        match &self.kind {
            WaveKind::Packets(packets) => packets
                .iter()
                .map(|p| {
                    let s = p.sigma_at(t, &self.constants);
                    s.x.min(s.y)
                })
                .fold(f64::INFINITY, f64::min),
            WaveKind::PlaneWave { .. } => 1.0,
        }
    }

    /// Largest spreading rate among the packets (zero for plane waves).
    pub fn max_gamma(&self) -> f64 {
        self.packets()
            .iter()
            .map(|p| self.constants.gamma(p.sigma0.x.min(p.sigma0.y)))
            .fold(0.0, f64::max)
    }

    pub fn density(&self, x: Vec2, t: f64) -> f64 {
        self.psi(x, t).norm_sqr()
    }

    pub fn psi(&self, x: Vec2, t: f64) -> Complex64 {
        self.jet(x, t).psi
    }

    /// Fails with [`Error::NodeRegion`] below the node floor.
    pub fn check_density(&self, rho: f64, x: Vec2, t: f64) -> Result<()> {
        let floor = self.node_floor(t);
        if rho < floor || !rho.is_finite() {
            return Err(Error::NodeRegion {
                x: x.x,
                y: x.y,
                t,
                rho,
                floor,
            });
        }
        Ok(())
    }
}

/// Ψ(x, t).
pub fn eval_psi(model: &WaveModel, x: Vec2, t: f64) -> Complex64 {
    model.psi(x, t)
}

/// ρ, ∇ρ and ∇S at (x, t).
pub fn eval_fields(model: &WaveModel, x: Vec2, t: f64) -> Result<FieldSample> {
    let jet = model.jet(x, t);
    fields_from_jet(model, &jet, x, t)
}

pub(crate) fn fields_from_jet(model: &WaveModel, jet: &Jet, x: Vec2, t: f64) -> Result<FieldSample> {
    let rho = jet.psi.norm_sqr();
    model.check_density(rho, x, t)?;
    let conj = jet.psi.conj();
    let gx = conj * jet.grad[0];
    let gy = conj * jet.grad[1];
    let hbar = model.constants.hbar;
    Ok(FieldSample {
        psi: jet.psi,
        rho,
        grad_rho: Vec2::new(2.0 * gx.re, 2.0 * gy.re),
        grad_s: Vec2::new(hbar * gx.im / rho, hbar * gy.im / rho),
    })
}

/// Galilean boost by `u`: Ψ'(x, t) = Ψ(x − ut, t) exp(i(m u·x − ½ m u² t)/ħ).
///
/// Packets acquire the extra group velocity and a constant phase
/// exp(i m u·c0/ħ) because each packet's phase is referenced to its centre.
pub fn boost_model(model: &WaveModel, u: Vec2) -> WaveModel {
    let c = model.constants;
    let q = u * (c.mass / c.hbar);
    let kind = match &model.kind {
        WaveKind::Packets(packets) => WaveKind::Packets(
            packets
                .iter()
                .map(|p| GaussianPacket {
                    group_velocity: p.group_velocity + u,
                    weight: p.weight * Complex64::from_polar(1.0, q.dot(&p.center0)),
                    ..*p
                })
                .collect(),
        ),
        WaveKind::PlaneWave { k, amplitude } => WaveKind::PlaneWave {
            k: k + q,
            amplitude: *amplitude,
        },
    };
    WaveModel { kind, constants: c }
}

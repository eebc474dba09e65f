//! Initial-condition sets: rings on constant-density contours and seeded
//! samples from ρ.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::wavefunction::{GaussianPacket, WaveModel};
use crate::{Error, Result, Vec2};

/// Concentric rings whose point counts follow the radial density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingSpec {
    pub radii: Vec<f64>,
    pub reference_radius: f64,
    pub reference_count: usize,
}

impl RingSpec {
    /// Six rings at 0.4σ0, 0.8σ0, ..., 2.4σ0 with 20 points at σ0.
    pub fn two_slit_default(sigma0: f64) -> Self {
        RingSpec {
            radii: (1..=6).map(|k| 0.4 * k as f64 * sigma0).collect(),
            reference_radius: sigma0,
            reference_count: 20,
        }
    }

    /// A single ring of `count` points.
    pub fn single(radius: f64, count: usize) -> Self {
        RingSpec {
            radii: vec![radius],
            reference_radius: radius,
            reference_count: count,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.radii.is_empty() {
            return Err(Error::validation("radii", "at least one ring is required"));
        }
        if self.radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::validation("radii", "radii must be positive"));
        }
        if self.radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::validation("radii", "radii must be strictly increasing"));
        }
        if !(self.reference_radius.is_finite() && self.reference_radius > 0.0) {
            return Err(Error::validation("reference_radius", "must be positive"));
        }
        if self.reference_count == 0 {
            return Err(Error::validation("reference_count", "must be at least 1"));
        }
        Ok(())
    }

    /// Point count on each ring, zero for rings that round away.
    pub fn counts(&self, rho0: impl Fn(f64) -> f64) -> Vec<usize> {
        let reference = rho0(self.reference_radius);
        self.radii
            .iter()
            .map(|&r| {
                let n = (self.reference_count as f64 * rho0(r) / reference).round();
                if n.is_finite() && n > 0.0 {
                    n as usize
                } else {
                    0
                }
            })
            .collect()
    }
}

/// Radial profile e^{−r²/2σ0²} of a symmetric packet (unnormalised).
pub fn gaussian_radial(sigma0: f64) -> impl Fn(f64) -> f64 {
    move |r| (-r * r / (2.0 * sigma0 * sigma0)).exp()
}

/// `n` points on a circle, equally spaced in angle from angle 0.
fn circle(center: Vec2, radius: f64, n: usize) -> impl Iterator<Item = Vec2> {
    (0..n).map(move |j| {
        let th = 2.0 * PI * j as f64 / n as f64;
        center + Vec2::new(th.cos(), th.sin()) * radius
    })
}

/// Ring ensemble about `center`; rings rounding to zero points are dropped.
pub fn canonical_rings(spec: &RingSpec, rho0: impl Fn(f64) -> f64, center: Vec2) -> Result<Vec<Vec2>> {
    spec.validate()?;
    let counts = spec.counts(rho0);
    if counts.iter().all(|&n| n == 0) {
        return Err(Error::EmptyRing);
    }
    let mut points = Vec::new();
    for (&r, &n) in spec.radii.iter().zip(&counts) {
        if n == 0 {
            log::warn!("ring at radius {r} rounds to zero points; dropped");
            continue;
        }
        points.extend(circle(center, r, n));
    }
    Ok(points)
}

/// How a constant-density contour is named.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ContourLevel {
    /// Ellipse with semi-axes (σ0x, σ0y) times this factor.
    Scale(f64),
    /// Absolute value of ρ at t = 0.
    Density(f64),
}

/// Points on a constant-density contour of a single packet at t = 0.
pub fn uniform_contour(model: &WaveModel, level: ContourLevel, count: usize) -> Result<Vec<Vec2>> {
    let p = contour_packet(model)?;
    if count == 0 {
        return Err(Error::validation("count", "must be at least 1"));
    }
    let scale = match level {
        ContourLevel::Scale(s) if s.is_finite() && s > 0.0 => s,
        ContourLevel::Scale(s) => return Err(Error::validation("level", format!("scale must be positive, got {s}"))),
        ContourLevel::Density(rho) => {
            let peak = p.weight.norm_sqr() / (2.0 * PI * p.sigma0.x * p.sigma0.y);
            if !(rho > 0.0 && rho < peak) {
                return Err(Error::validation(
                    "level",
                    format!("density level must lie in (0, {peak}), got {rho}"),
                ));
            }
            (2.0 * (peak / rho).ln()).sqrt()
        }
    };
    Ok((0..count)
        .map(|j| {
            let th = 2.0 * PI * j as f64 / count as f64;
            p.center0 + Vec2::new(p.sigma0.x * th.cos(), p.sigma0.y * th.sin()) * scale
        })
        .collect())
}

fn contour_packet(model: &WaveModel) -> Result<&GaussianPacket> {
    model.single_packet().ok_or_else(|| Error::UnsupportedModel {
        operation: "uniform_contour",
        reason: "contours are only parametrised for a single packet; use density sampling".into(),
    })
}

fn index_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn normal2(rng: &mut ChaCha8Rng) -> Vec2 {
    Vec2::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

/// Draws `count` independent positions from ρ(·, t).
///
/// Sample `i` uses its own generator stream, so the output does not depend
/// on thread scheduling. A superposition is sampled by rejection against the
/// mixture Σ|wᵢ|gᵢ, which bounds |Ψ|² up to the factor Σ|wᵢ|.
pub fn sample_density(model: &WaveModel, count: usize, seed: u64, t: f64) -> Result<Vec<Vec2>> {
    let packets = model.packets();
    if packets.is_empty() {
        return Err(Error::UnsupportedModel {
            operation: "sample_density",
            reason: "plane waves are not normalisable".into(),
        });
    }
    let c = *model.constants();
    let centers: Vec<Vec2> = packets.iter().map(|p| p.center_at(t)).collect();
    let sigmas: Vec<Vec2> = packets.iter().map(|p| p.sigma_at(t, &c)).collect();

    if let [_] = packets {
        let (m, s) = (centers[0], sigmas[0]);
        return Ok((0..count)
            .into_par_iter()
            .map(|i| {
                let z = normal2(&mut index_rng(seed, i));
                m + z.component_mul(&s)
            })
            .collect());
    }

    let amps: Vec<f64> = packets.iter().map(|p| p.weight.norm()).collect();
    let total: f64 = amps.iter().sum();
    let cumulative: Vec<f64> = amps
        .iter()
        .scan(0.0, |acc, a| {
            *acc += a / total;
            Some(*acc)
        })
        .collect();
    let gauss = |k: usize, x: Vec2| {
        let d = (x - centers[k]).component_div(&sigmas[k]);
        (-0.5 * d.norm_squared()).exp() / (2.0 * PI * sigmas[k].x * sigmas[k].y)
    };
    let draw = |i: usize| {
        let mut rng = index_rng(seed, i);
        loop {
            let u: f64 = rng.random();
            let k = cumulative.iter().position(|&cum| u < cum).unwrap_or(packets.len() - 1);
            let x = centers[k] + normal2(&mut rng).component_mul(&sigmas[k]);
            let envelope: f64 = (0..packets.len()).map(|j| amps[j] * gauss(j, x)).sum::<f64>() * total;
            let accept: f64 = rng.random();
            if accept * envelope < model.density(x, t) {
                return x;
            }
        }
    };
    Ok((0..count).into_par_iter().map(draw).collect())
}

/// Declarative description of an initial-condition set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EnsembleSpec {
    /// Rings about each centre; an empty list uses the packet centres.
    CanonicalRings {
        rings: RingSpec,
        centers: Vec<Vec2>,
    },
    UniformContour {
        level: ContourLevel,
        count: usize,
    },
    DensitySample {
        count: usize,
        seed: u64,
    },
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            EnsembleSpec::CanonicalRings { rings, .. } => rings.validate(),
            EnsembleSpec::UniformContour { count, .. } | EnsembleSpec::DensitySample { count, .. } => {
                if *count == 0 {
                    Err(Error::validation("count", "must be at least 1"))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Initial points at t = 0.
    pub fn generate(&self, model: &WaveModel) -> Result<Vec<Vec2>> {
        self.validate()?;
        match self {
            EnsembleSpec::CanonicalRings { rings, centers } => {
                let packets = model.packets();
                let sigma0 = packets
                    .first()
                    .ok_or_else(|| Error::UnsupportedModel {
                        operation: "canonical_rings",
                        reason: "plane waves have no radial profile".into(),
                    })?
                    .sigma0;
                if packets.iter().any(|p| !p.is_symmetric()) {
                    return Err(Error::UnsupportedModel {
                        operation: "canonical_rings",
                        reason: "ring counts need a symmetric packet profile".into(),
                    });
                }
                let centers: Vec<Vec2> = if centers.is_empty() {
                    packets.iter().map(|p| p.center0).collect()
                } else {
                    centers.clone()
                };
                let mut out = Vec::new();
                for c in centers {
                    out.extend(canonical_rings(rings, gaussian_radial(sigma0.x), c)?);
                }
                Ok(out)
            }
            EnsembleSpec::UniformContour { level, count } => uniform_contour(model, *level, *count),
            EnsembleSpec::DensitySample { count, seed } => sample_density(model, *count, *seed, 0.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavefunction::PhysicalConstants;
    use approx::assert_relative_eq;

    #[test]
    fn default_ring_counts() {
        let spec = RingSpec::two_slit_default(1.0);
        // Oracle: n_k = round(20 exp(−(r² − 1)/2)) evaluated directly.
        let oracle: Vec<usize> = [0.4f64, 0.8, 1.2, 1.6, 2.0, 2.4]
            .iter()
            .map(|r| (20.0 * (-(r * r - 1.0) / 2.0).exp()).round() as usize)
            .collect();
        let counts = spec.counts(gaussian_radial(1.0));
        assert_eq!(counts, oracle);
        assert_eq!(counts, vec![30, 24, 16, 9, 4, 2]);
        let pts = canonical_rings(&spec, gaussian_radial(1.0), Vec2::new(0.0, 10.0)).unwrap();
        assert_eq!(pts.len(), 85);
    }

    #[test]
    fn single_ring_is_evenly_spaced_from_angle_zero() {
        let pts = canonical_rings(&RingSpec::single(1.0, 20), gaussian_radial(1.0), Vec2::zeros()).unwrap();
        assert_eq!(pts.len(), 20);
        assert_eq!(pts[0], Vec2::new(1.0, 0.0));
        for w in pts.windows(2) {
            let d = w[1].y.atan2(w[1].x) - w[0].y.atan2(w[0].x);
            assert_relative_eq!(d.rem_euclid(2.0 * PI), 2.0 * PI / 20.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn far_ring_is_empty() {
        let spec = RingSpec {
            radii: vec![40.0],
            reference_radius: 1.0,
            reference_count: 20,
        };
        assert_eq!(
            canonical_rings(&spec, gaussian_radial(1.0), Vec2::zeros()),
            Err(Error::EmptyRing)
        );
        let mixed = RingSpec {
            radii: vec![1.0, 40.0],
            ..spec
        };
        assert_eq!(
            canonical_rings(&mixed, gaussian_radial(1.0), Vec2::zeros())
                .unwrap()
                .len(),
            20
        );
    }

    #[test]
    fn ring_spec_validation() {
        let bad = RingSpec {
            radii: vec![1.0, 0.5],
            reference_radius: 1.0,
            reference_count: 3,
        };
        assert!(bad.validate().is_err());
        assert!(RingSpec::single(1.0, 0).validate().is_err());
    }

    #[test]
    fn contours() {
        let c = PhysicalConstants::default();
        let g = WaveModel::gaussian(c, 1.0).unwrap();
        let pts = uniform_contour(&g, ContourLevel::Scale(1.0), 16).unwrap();
        assert_eq!(pts.len(), 16);
        for p in &pts {
            assert_relative_eq!(p.norm(), 1.0, max_relative = 1e-15);
        }
        let prod = WaveModel::product(c, 2.0, 1.0).unwrap();
        let pts = uniform_contour(&prod, ContourLevel::Scale(1.5), 16).unwrap();
        assert_relative_eq!(pts[0].x, 3.0);
        assert_relative_eq!(pts[4].y, 1.5, max_relative = 1e-15);
        let rho = prod.density(pts[3], 0.0);
        for p in &pts {
            assert_relative_eq!(prod.density(*p, 0.0), rho, max_relative = 1e-12);
        }
        let one = uniform_contour(&g, ContourLevel::Scale(2.0), 1).unwrap();
        assert_eq!(one, vec![Vec2::new(2.0, 0.0)]);
        // Level given as ρ: e^{-1/2}/2π is the unit circle.
        let lvl = (-0.5f64).exp() / (2.0 * PI);
        let pts = uniform_contour(&g, ContourLevel::Density(lvl), 4).unwrap();
        assert_relative_eq!(pts[1].y, 1.0, max_relative = 1e-12);
        assert!(uniform_contour(&g, ContourLevel::Density(1.0), 4).is_err());
        let sup = WaveModel::two_slit(c, 1.0, 5.0, Vec2::zeros()).unwrap();
        assert!(matches!(
            uniform_contour(&sup, ContourLevel::Scale(1.0), 4),
            Err(Error::UnsupportedModel { .. })
        ));
    }

    #[test]
    fn sampling_is_reproducible() {
        let c = PhysicalConstants::default();
        let sup = WaveModel::two_slit(c, 1.0, 5.0, Vec2::zeros()).unwrap();
        let a = sample_density(&sup, 500, 9, 0.0).unwrap();
        let b = sample_density(&sup, 500, 9, 0.0).unwrap();
        assert_eq!(a, b);
        // Prefixes agree because every index has its own stream.
        let short = sample_density(&sup, 100, 9, 0.0).unwrap();
        assert_eq!(&a[..100], &short[..]);
        assert_ne!(sample_density(&sup, 100, 10, 0.0).unwrap(), short);
    }

    #[test]
    fn single_packet_sample_mean() {
        let c = PhysicalConstants::default();
        let g = WaveModel::gaussian(c, 1.0).unwrap();
        let n = 100_000;
        let pts = sample_density(&g, n, 1, 0.0).unwrap();
        let mean = pts.iter().fold(Vec2::zeros(), |a, p| a + p) / n as f64;
        let se = 1.0 / (n as f64).sqrt();
        assert!(mean.x.abs() < 3.0 * se && mean.y.abs() < 3.0 * se, "{mean}");
    }

    #[test]
    fn wide_superposition_splits_evenly() {
        let c = PhysicalConstants::default();
        let sup = WaveModel::two_slit(c, 1.0, 20.0, Vec2::zeros()).unwrap();
        let n = 20_000;
        let upper = sample_density(&sup, n, 3, 0.0)
            .unwrap()
            .iter()
            .filter(|p| p.y > 0.0)
            .count();
        let sd = (n as f64 * 0.25).sqrt();
        assert!((upper as f64 - n as f64 / 2.0).abs() < 3.0 * sd, "{upper}");
    }

    #[test]
    fn plane_wave_cannot_be_sampled() {
        let c = PhysicalConstants::default();
        let pw = WaveModel::plane_wave(c, Vec2::new(1.0, 0.0)).unwrap();
        assert!(sample_density(&pw, 10, 0, 0.0).is_err());
    }

    #[test]
    fn ensemble_spec_generate() {
        let c = PhysicalConstants::default();
        let m = WaveModel::two_slit(c, 1.0, 20.0, Vec2::new(100.0, 0.0)).unwrap();
        let spec = EnsembleSpec::CanonicalRings {
            rings: RingSpec::two_slit_default(1.0),
            centers: vec![],
        };
        let pts = spec.generate(&m).unwrap();
        assert_eq!(pts.len(), 170);
        assert!(pts[..85].iter().all(|p| p.y > 0.0));
        assert!(EnsembleSpec::DensitySample { count: 0, seed: 0 }.validate().is_err());
    }
}

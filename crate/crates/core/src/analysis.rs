//! Statistical and physical checks over trajectory sets.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::sample_density;
use crate::fields::{lorentz_force, quantum_force, FdStencil};
use crate::guidance::{spin_significance, vector_potential, GuidanceField, GuidanceMode, SpinVector};
use crate::integrator::{closed_form_gaussian_orbit, integrate_flow, IntegratorConfig, Trajectory};
use crate::stats::{chi_square, histogram, ks_test, rayleigh_cdf};
use crate::wavefunction::{eval_fields, GaussianPacket, PhysicalConstants, WaveModel};
use crate::{Error, Result, Vec2, Vec3};

/// Significance level shared by every statistical gate.
pub const SIGNIFICANCE: f64 = 0.01;
const MIN_SAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TestKind {
    KolmogorovSmirnov,
    ChiSquare,
    /// Histogram only.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramReport {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Expected counts per bin when a reference law is available.
    pub expected: Vec<f64>,
    pub test: TestKind,
    pub test_statistic: f64,
    pub dof: Option<usize>,
    pub p_value: f64,
    pub sample_count: usize,
}

impl HistogramReport {
    pub fn passed(&self) -> bool {
        self.p_value > SIGNIFICANCE
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedReport {
    pub histogram: HistogramReport,
    pub w: f64,
    /// Fraction of speeds above 3w.
    pub tail_fraction: f64,
    pub tail_expected: f64,
    /// Binomial standard deviation of the tail fraction.
    pub tail_sigma: f64,
    /// Centre of the fullest histogram bin.
    pub mode: f64,
}

impl SpeedReport {
    pub fn tail_ok(&self) -> bool {
        (self.tail_fraction - self.tail_expected).abs() <= 3.0 * self.tail_sigma
    }

    pub fn passed(&self) -> bool {
        self.histogram.passed() && self.tail_ok()
    }
}

/// KS test of trajectory speeds against the Rayleigh law with scale w = γσ0.
pub fn speed_distribution_check(constants: &PhysicalConstants, sigma0: f64, speeds: &[f64]) -> Result<SpeedReport> {
    if speeds.len() < MIN_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_SAMPLES,
            got: speeds.len(),
        });
    }
    let w = constants.characteristic_speed(sigma0);
    let cdf = rayleigh_cdf(w);
    let (d, p) = ks_test(speeds, &cdf);
    let bins = 50;
    let (edges, counts) = histogram(speeds, 0.0, 5.0 * w, bins);
    let n = speeds.len() as f64;
    let expected = edges.windows(2).map(|e| n * (cdf(e[1]) - cdf(e[0]))).collect();
    let tail_expected = (-4.5f64).exp();
    let tail_fraction = speeds.iter().filter(|&&v| v > 3.0 * w).count() as f64 / n;
    let peak = (0..bins)
        .max_by_key(|&k| (counts[k], std::cmp::Reverse(k)))
        .unwrap_or(0);
    let mode = 0.5 * (edges[peak] + edges[peak + 1]);
    Ok(SpeedReport {
        histogram: HistogramReport {
            bin_edges: edges,
            counts,
            expected,
            test: TestKind::KolmogorovSmirnov,
            test_statistic: d,
            dof: None,
            p_value: p,
            sample_count: speeds.len(),
        },
        w,
        tail_fraction,
        tail_expected,
        tail_sigma: (tail_expected * (1.0 - tail_expected) / n).sqrt(),
        mode,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinMomentEstimate {
    pub mean: Vec3,
    pub std_error: Vec3,
    pub samples: usize,
}

/// Monte-Carlo estimate of ⟨x × (∇log ρ × s)⟩ over ρ(·, t).
pub fn mean_spin_angular_momentum(
    model: &WaveModel,
    spin: &SpinVector,
    n_samples: usize,
    seed: u64,
    t: f64,
) -> Result<SpinMomentEstimate> {
    if n_samples < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: n_samples,
        });
    }
    let points = sample_density(model, n_samples, seed, t)?;
    let values: Vec<Vec3> = points
        .par_iter()
        .map(|&p| {
            let f = eval_fields(model, p, t)?;
            // −A = ∇log ρ × s
            let p_spin = -vector_potential(&f, spin);
            Ok(Vec3::new(p.x, p.y, 0.0).cross(&p_spin))
        })
        .collect::<Result<_>>()?;
    let n = values.len() as f64;
    let mean = values.iter().fold(Vec3::zeros(), |a, v| a + v) / n;
    let var = values
        .iter()
        .fold(Vec3::zeros(), |a, v| a + (v - mean).component_mul(&(v - mean)))
        / (n - 1.0);
    Ok(SpinMomentEstimate {
        mean,
        std_error: var.map(|x| (x / n).sqrt()),
        samples: values.len(),
    })
}

/// Tabulated y-marginal ∫|Ψ(x, y, t)|² dx, normalised to a CDF.
#[derive(Debug, Clone)]
pub struct MarginalY {
    ys: Vec<f64>,
    cdf: Vec<f64>,
}

impl MarginalY {
    /// Trapezoidal quadrature on a grid spanning every packet by ±12σ(t).
    pub fn new(model: &WaveModel, t: f64) -> Result<Self> {
        let packets = model.packets();
        if packets.is_empty() {
            return Err(Error::UnsupportedModel {
                operation: "marginal",
                reason: "plane waves are not normalisable".into(),
            });
        }
        let c = model.constants();
        let span = |axis: usize| {
            packets.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                let m = p.center_at(t)[axis];
                let s = p.sigma_at(t, c)[axis];
                (lo.min(m - 12.0 * s), hi.max(m + 12.0 * s))
            })
        };
        let (xlo, xhi) = span(0);
        let (ylo, yhi) = span(1);
        let nx = 1201;
        let ny = 8001;
        let hx = (xhi - xlo) / (nx - 1) as f64;
        let hy = (yhi - ylo) / (ny - 1) as f64;
        let ys: Vec<f64> = (0..ny).map(|j| ylo + j as f64 * hy).collect();
        let density: Vec<f64> = ys
            .par_iter()
            .map(|&y| {
                (0..nx)
                    .map(|i| {
                        let wgt = if i == 0 || i == nx - 1 { 0.5 } else { 1.0 };
                        wgt * model.density(Vec2::new(xlo + i as f64 * hx, y), t)
                    })
                    .sum::<f64>()
                    * hx
            })
            .collect();
        let mut cdf = Vec::with_capacity(ny);
        let mut acc = 0.0;
        cdf.push(0.0);
        for w in density.windows(2) {
            acc += 0.5 * (w[0] + w[1]) * hy;
            cdf.push(acc);
        }
        for v in &mut cdf {
            *v /= acc;
        }
        Ok(MarginalY { ys, cdf })
    }

    pub fn cdf(&self, y: f64) -> f64 {
        let ys = &self.ys;
        if y <= ys[0] {
            return 0.0;
        }
        if y >= ys[ys.len() - 1] {
            return 1.0;
        }
        let h = ys[1] - ys[0];
        let k = (((y - ys[0]) / h) as usize).min(ys.len() - 2);
        let s = (y - ys[k]) / h;
        self.cdf[k] + s * (self.cdf[k + 1] - self.cdf[k])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportReport {
    pub histogram: HistogramReport,
    pub node_aborts: usize,
    pub survivors: usize,
}

impl TransportReport {
    pub fn abort_fraction(&self) -> f64 {
        let total = self.node_aborts + self.survivors;
        if total == 0 {
            0.0
        } else {
            self.node_aborts as f64 / total as f64
        }
    }

    pub fn passed(&self) -> bool {
        self.histogram.passed() && self.abort_fraction() < 1e-3
    }
}

/// Advects samples of ρ(·, 0) to `t_final` and tests them against ρ(·, t_final).
///
/// A single symmetric packet is tested on the radial distance from its
/// centre (Rayleigh law); any other model on the y-marginal.
pub fn density_transport_check(
    model: &WaveModel,
    spin: &SpinVector,
    mode: GuidanceMode,
    n_samples: usize,
    t_final: f64,
    seed: u64,
) -> Result<TransportReport> {
    if n_samples < MIN_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_SAMPLES,
            got: n_samples,
        });
    }
    let start = sample_density(model, n_samples, seed, 0.0)?;
    let finals: Vec<Option<Vec2>> = if t_final == 0.0 {
        start.iter().copied().map(Some).collect()
    } else {
        let cfg = IntegratorConfig {
            t0: 0.0,
            t1: t_final,
            stride: t_final,
            max_step: t_final,
            crossing_axes: vec![],
            ..IntegratorConfig::default()
        };
        let field = GuidanceField::new(model, *spin, mode);
        start
            .par_iter()
            .map(|&p| {
                let tr = integrate_flow(&field, p, &cfg)?;
                Ok((!tr.aborted()).then(|| tr.last().map(|s| s.x)).flatten())
            })
            .collect::<Result<_>>()?
    };
    let survivors: Vec<Vec2> = finals.iter().flatten().copied().collect();
    let node_aborts = finals.len() - survivors.len();
    let n = survivors.len() as f64;

    let c = model.constants();
    let (values, cdf): (Vec<f64>, Box<dyn Fn(f64) -> f64 + Sync>) = match model.single_packet() {
        Some(p) if p.is_symmetric() => {
            let centre = p.center_at(t_final);
            let sigma = p.sigma_at(t_final, c).x;
            (
                survivors.iter().map(|x| (x - centre).norm()).collect(),
                Box::new(rayleigh_cdf(sigma)),
            )
        }
        _ => {
            let marginal = MarginalY::new(model, t_final)?;
            (
                survivors.iter().map(|x| x.y).collect(),
                Box::new(move |y| marginal.cdf(y)),
            )
        }
    };
    let (d, p) = ks_test(&values, &cdf);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if lo < hi {
        (lo, hi * (1.0 + 1e-12) + 1e-300)
    } else {
        (lo - 1.0, lo + 1.0)
    };
    let (edges, counts) = histogram(&values, lo, hi, 50);
    let expected = edges.windows(2).map(|e| n * (cdf(e[1]) - cdf(e[0]))).collect();
    Ok(TransportReport {
        histogram: HistogramReport {
            bin_edges: edges,
            counts,
            expected,
            test: TestKind::KolmogorovSmirnov,
            test_statistic: d,
            dof: None,
            p_value: p,
            sample_count: values.len(),
        },
        node_aborts,
        survivors: survivors.len(),
    })
}

/// Equal-width bins over [lo, hi).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinSpec {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Histogram of y at `t_snapshot`; with a model, a chi-square test against
/// its y-marginal (two overflow bins included).
pub fn fringe_profile(
    trajectories: &[Trajectory],
    t_snapshot: f64,
    bins: BinSpec,
    model: Option<&WaveModel>,
) -> Result<HistogramReport> {
    if !(bins.count > 0 && bins.hi > bins.lo) {
        return Err(Error::validation(
            "bins",
            "need at least one bin over a non-empty range",
        ));
    }
    let ys: Vec<f64> = trajectories
        .iter()
        .filter_map(|tr| tr.position_at(t_snapshot))
        .map(|x| x.y)
        .collect();
    if ys.len() < MIN_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_SAMPLES,
            got: ys.len(),
        });
    }
    let (edges, counts) = histogram(&ys, bins.lo, bins.hi, bins.count);
    let Some(model) = model else {
        return Ok(HistogramReport {
            bin_edges: edges,
            counts,
            expected: vec![],
            test: TestKind::None,
            test_statistic: f64::NAN,
            dof: None,
            p_value: f64::NAN,
            sample_count: ys.len(),
        });
    };
    let marginal = MarginalY::new(model, t_snapshot)?;
    let n = ys.len() as f64;
    let expected: Vec<f64> = edges
        .windows(2)
        .map(|e| n * (marginal.cdf(e[1]) - marginal.cdf(e[0])))
        .collect();
    let below = ys.iter().filter(|&&y| y < bins.lo).count() as f64;
    let above = ys.iter().filter(|&&y| y >= bins.hi).count() as f64;
    let mut obs = vec![below];
    obs.extend(counts.iter().map(|&c| c as f64));
    obs.push(above);
    let mut exp = vec![n * marginal.cdf(bins.lo)];
    exp.extend(expected.iter().copied());
    exp.push(n * (1.0 - marginal.cdf(bins.hi)));
    let (stat, dof, p) = chi_square(&obs, &exp)?;
    Ok(HistogramReport {
        bin_edges: edges,
        counts,
        expected,
        test: TestKind::ChiSquare,
        test_statistic: stat,
        dof: Some(dof),
        p_value: p,
        sample_count: ys.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitMonitor {
    pub spin_ratio: f64,
    /// |∇Q| in units of ħ²/(2mσ0³), σ0 the initial packet width.
    pub qforce_scale: f64,
}

impl LimitMonitor {
    /// Spin term negligible and quantum force small.
    pub fn classical(&self) -> bool {
        self.spin_ratio > 10.0 && self.qforce_scale < 0.1
    }
}

pub fn limit_monitors(model: &WaveModel, x: Vec2, t: f64) -> Result<LimitMonitor> {
    let c = model.constants();
    let f = eval_fields(model, x, t)?;
    let sigma0 = model.length_scale(0.0);
    let unit = c.hbar * c.hbar / (2.0 * c.mass * sigma0.powi(3));
    let qf = quantum_force(model, x, t, &FdStencil::default())?;
    Ok(LimitMonitor {
        spin_ratio: spin_significance(&f, c),
        qforce_scale: qf.norm() / unit,
    })
}

/// Deviations of symmetric-Gaussian trajectories from their closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitReport {
    /// Spin on: max |x − x_exact| / |x_exact|. Spin off: max |x × x0| / (|x||x0|).
    pub position_error: f64,
    /// Spin on: max ||v| − γr0| / γr0. Zero with the spin term off.
    pub speed_error: f64,
    /// Max distance from the chord through the end points over path length.
    pub linearity_error: f64,
}

/// Compares trajectories of a single symmetric packet at rest at the origin
/// with the exact orbits (spin on) or radial lines (spin off).
pub fn gaussian_orbit_report(
    model: &WaveModel,
    mode: GuidanceMode,
    trajectories: &[Trajectory],
) -> Result<OrbitReport> {
    let p = symmetric_rest_packet(model)?;
    let gamma = model.constants().gamma(p.sigma0.x);
    let mut rep = OrbitReport {
        position_error: 0.0,
        speed_error: 0.0,
        linearity_error: 0.0,
    };
    for tr in trajectories {
        let x0 = tr.initial;
        let r0 = x0.norm();
        for s in &tr.samples {
            if mode.spin_term {
                let (xe, _) = closed_form_gaussian_orbit(x0, s.t, gamma);
                rep.position_error = rep.position_error.max((s.x - xe).norm() / xe.norm());
                rep.speed_error = rep.speed_error.max((s.speed - gamma * r0).abs() / (gamma * r0));
            } else {
                let cross = s.x.perp(&x0).abs() / (s.x.norm() * r0);
                rep.position_error = rep.position_error.max(cross);
            }
        }
        rep.linearity_error = rep.linearity_error.max(chord_deviation(tr));
    }
    Ok(rep)
}

fn symmetric_rest_packet(model: &WaveModel) -> Result<&GaussianPacket> {
    match model.single_packet() {
        Some(p) if p.is_symmetric() && p.group_velocity == Vec2::zeros() && p.center0 == Vec2::zeros() => Ok(p),
        _ => Err(Error::UnsupportedModel {
            operation: "gaussian_orbit_report",
            reason: "needs a single symmetric packet at rest at the origin".into(),
        }),
    }
}

/// Largest distance of any sample from the end-point chord, over the chord length.
pub fn chord_deviation(tr: &Trajectory) -> f64 {
    let (Some(a), Some(b)) = (tr.samples.first(), tr.samples.last()) else {
        return 0.0;
    };
    let chord = b.x - a.x;
    let len = chord.norm();
    if len == 0.0 {
        return 0.0;
    }
    let dir = chord / len;
    tr.samples
        .iter()
        .map(|s| (s.x - a.x).perp(&dir).abs())
        .fold(0.0, f64::max)
        / len
}

/// Total number of axis-crossing events.
pub fn axis_crossings(trajectories: &[Trajectory]) -> usize {
    trajectories.iter().map(Trajectory::crossings).sum()
}

/// Largest distance between each trajectory and the y-reflection of its
/// mirror partner (the trajectory whose start point is the reflected start).
/// Trajectories without a partner are ignored.
pub fn mirror_asymmetry(trajectories: &[Trajectory]) -> f64 {
    let mirror = |p: Vec2| Vec2::new(p.x, -p.y);
    let mut worst: f64 = 0.0;
    for a in trajectories {
        let target = mirror(a.initial);
        let Some(b) = trajectories.iter().find(|b| (b.initial - target).norm() < 1e-9) else {
            continue;
        };
        for (sa, sb) in a.samples.iter().zip(&b.samples) {
            worst = worst.max((mirror(sa.x) - sb.x).norm());
        }
    }
    worst
}

/// Speed along two-slit trajectories measured in the common packet frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedRatioReport {
    /// max |v − V| / |V| over all samples.
    pub max_ratio: f64,
    /// max |v| in the lab frame.
    pub max_speed: f64,
    pub c_ratio: f64,
    /// Time after which the packets overlap appreciably.
    pub overlap_onset: f64,
    /// Samples whose ratio departs from its initial value by more than 1%.
    pub spikes: usize,
    /// Spikes before the overlap onset.
    pub spikes_outside_overlap: usize,
    /// Per-trajectory (t, ratio) series.
    pub series: Vec<Vec<(f64, f64)>>,
}

impl SpeedRatioReport {
    pub fn passed(&self) -> bool {
        self.max_ratio < 0.05 && self.max_speed < self.c_ratio && self.spikes_outside_overlap == 0
    }
}

/// Bhattacharyya coefficient of two packet densities at time t.
pub fn packet_overlap(a: &GaussianPacket, b: &GaussianPacket, t: f64, c: &PhysicalConstants) -> f64 {
    let sa = a.sigma_at(t, c).map(|s| s * s);
    let sb = b.sigma_at(t, c).map(|s| s * s);
    let s = (sa + sb) * 0.5;
    let d = a.center_at(t) - b.center_at(t);
    let maha = d.x * d.x / s.x + d.y * d.y / s.y;
    let logdet = (s.x * s.y).ln() - 0.5 * ((sa.x * sa.y).ln() + (sb.x * sb.y).ln());
    (-(maha / 8.0 + 0.5 * logdet)).exp()
}

/// First time on [t0, t1] at which some pair of packets overlaps by more
/// than `threshold` (Bhattacharyya coefficient); t1 if never.
pub fn overlap_onset(model: &WaveModel, t0: f64, t1: f64, threshold: f64) -> f64 {
    let p = model.packets();
    let c = model.constants();
    let worst = |t: f64| {
        let mut m: f64 = 0.0;
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                m = m.max(packet_overlap(&p[i], &p[j], t, c));
            }
        }
        m
    };
    if worst(t0) > threshold {
        return t0;
    }
    if worst(t1) <= threshold {
        return t1;
    }
    let (mut lo, mut hi) = (t0, t1);
    while hi - lo > 1e-9 * (t1 - t0).max(1.0) {
        let mid = 0.5 * (lo + hi);
        if worst(mid) > threshold {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Overlap threshold marking the start of the interference epoch.
pub const OVERLAP_THRESHOLD: f64 = 1e-3;

/// Speed-ratio study for packets sharing the group velocity `frame`.
pub fn speed_ratio_study(model: &WaveModel, frame: Vec2, trajectories: &[Trajectory]) -> Result<SpeedRatioReport> {
    let vx = frame.norm();
    if vx == 0.0 {
        return Err(Error::validation(
            "group_velocity",
            "speed-ratio study needs a moving frame",
        ));
    }
    let t0 = trajectories
        .iter()
        .filter_map(|t| t.samples.first())
        .map(|s| s.t)
        .fold(f64::INFINITY, f64::min);
    let t1 = trajectories
        .iter()
        .filter_map(|t| t.samples.last())
        .map(|s| s.t)
        .fold(f64::NEG_INFINITY, f64::max);
    let onset = if t0 < t1 {
        overlap_onset(model, t0, t1, OVERLAP_THRESHOLD)
    } else {
        f64::INFINITY
    };
    let mut rep = SpeedRatioReport {
        max_ratio: 0.0,
        max_speed: 0.0,
        c_ratio: model.constants().c_ratio,
        overlap_onset: onset,
        spikes: 0,
        spikes_outside_overlap: 0,
        series: Vec::with_capacity(trajectories.len()),
    };
    for tr in trajectories {
        let series: Vec<(f64, f64)> = tr.samples.iter().map(|s| (s.t, (s.v - frame).norm() / vx)).collect();
        if let Some(&(_, r0)) = series.first() {
            for (s, &(t, r)) in tr.samples.iter().zip(&series) {
                rep.max_ratio = rep.max_ratio.max(r);
                rep.max_speed = rep.max_speed.max(s.speed);
                if (r - r0).abs() > 0.01 * r0 {
                    rep.spikes += 1;
                    if t < onset {
                        rep.spikes_outside_overlap += 1;
                    }
                }
            }
        }
        rep.series.push(series);
    }
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceLawReport {
    /// Largest |m ẍ − F| / (|F| + floor) over interior samples.
    pub max_error: f64,
    pub points: usize,
}

/// Compares m·ẍ from second differences of equally spaced samples with the
/// force law: E + v×B with the spin term, −∇Q without.
pub fn force_law_check(
    model: &WaveModel,
    spin: &SpinVector,
    mode: GuidanceMode,
    trajectory: &Trajectory,
    stencil: &FdStencil,
    floor: f64,
) -> Result<ForceLawReport> {
    let s = &trajectory.samples;
    let m = model.constants().mass;
    let mut rep = ForceLawReport {
        max_error: 0.0,
        points: 0,
    };
    for w in s.windows(3) {
        let h1 = w[1].t - w[0].t;
        let h2 = w[2].t - w[1].t;
        if (h1 - h2).abs() > 1e-9 * h1 {
            continue;
        }
        let acc = (w[2].x - w[1].x * 2.0 + w[0].x) / (h1 * h1);
        let force = if mode.spin_term {
            lorentz_force(model, w[1].x, w[1].t, spin, mode, stencil)?.xy()
        } else {
            quantum_force(model, w[1].x, w[1].t, stencil)?
        };
        let err = (acc * m - force).norm() / (force.norm() + floor);
        rep.max_error = rep.max_error.max(err);
        rep.points += 1;
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::integrate_trajectory;
    use crate::wavefunction::PhysicalConstants;
    use approx::assert_relative_eq;

    fn setup() -> (PhysicalConstants, WaveModel, SpinVector) {
        let c = PhysicalConstants::default();
        (c, WaveModel::gaussian(c, 1.0).unwrap(), SpinVector::up(&c))
    }

    #[test]
    fn speed_report_rejects_degenerate_input() {
        let (c, _, _) = setup();
        let rep = speed_distribution_check(&c, 1.0, &vec![0.5; 500]).unwrap();
        assert!(rep.histogram.p_value < 1e-10);
        assert!(!rep.passed());
        assert!(matches!(
            speed_distribution_check(&c, 1.0, &[0.5; 10]),
            Err(Error::InsufficientSamples { needed: 100, got: 10 })
        ));
    }

    #[test]
    fn spin_moment_flips_with_spin() {
        let (c, m, s) = setup();
        let up = mean_spin_angular_momentum(&m, &s, 20_000, 4, 0.0).unwrap();
        let down = mean_spin_angular_momentum(&m, &SpinVector::down(&c), 20_000, 4, 0.0).unwrap();
        assert_relative_eq!(up.mean.z, -down.mean.z, max_relative = 1e-12);
        assert!((up.mean.z - 1.0).abs() < 3.0 * up.std_error.z);
        assert_eq!(up.mean.x, 0.0);
    }

    #[test]
    fn transport_identity_at_t0() {
        let (_, m, s) = setup();
        let rep = density_transport_check(&m, &s, GuidanceMode::SPIN_ON, 2000, 0.0, 5).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert_eq!(rep.node_aborts, 0);
    }

    #[test]
    fn marginal_of_single_packet_is_gaussian() {
        let (c, _, _) = setup();
        let m = WaveModel::product(c, 2.0, 1.0).unwrap();
        let t = 2.0;
        let marg = MarginalY::new(&m, t).unwrap();
        let sy = crate::wavefunction::sigma_of_t(1.0, t, &c);
        for y in [-2.0, -0.3, 0.0, 1.1] {
            let exact = 0.5 * (1.0 + libm_erf(y / (sy * 2f64.sqrt())));
            assert!((marg.cdf(y) - exact).abs() < 1e-6, "{y}");
        }
    }

    fn libm_erf(x: f64) -> f64 {
        statrs::function::erf::erf(x)
    }

    #[test]
    fn limit_monitor_cases() {
        let (c, m, _) = setup();
        let t0 = limit_monitors(&m, Vec2::new(0.8, 0.3), 0.0).unwrap();
        assert!(t0.spin_ratio < 1e-12);
        assert!(!t0.classical());
        let pw = WaveModel::plane_wave(c, Vec2::new(1.0, 0.0)).unwrap();
        let p = limit_monitors(&pw, Vec2::zeros(), 1.0).unwrap();
        assert_eq!(p.spin_ratio, f64::INFINITY);
        assert_eq!(p.qforce_scale, 0.0);
        assert!(p.classical());
    }

    #[test]
    fn overlap_of_identical_packets_is_one() {
        let (c, m, _) = setup();
        let p = m.packets()[0];
        assert_relative_eq!(packet_overlap(&p, &p, 3.0, &c), 1.0, max_relative = 1e-14);
        let two = WaveModel::two_slit(c, 1.0, 20.0, Vec2::new(100.0, 0.0)).unwrap();
        let onset = overlap_onset(&two, 0.0, 12.0, OVERLAP_THRESHOLD);
        // exp(−a²/2σ²) = 1e-3 with a = 10.
        let sigma2 = 100.0 / (2.0 * 1e3f64.ln());
        let expected = 2.0 * (sigma2 - 1.0).sqrt();
        assert_relative_eq!(onset, expected, max_relative = 1e-6);
    }

    #[test]
    fn gaussian_orbit_report_on_wheel() {
        let (_, m, s) = setup();
        let cfg = IntegratorConfig::span(0.0, 4.0, 41);
        let tr = integrate_trajectory(&m, &s, GuidanceMode::SPIN_ON, Vec2::new(0.0, 1.0), &cfg).unwrap();
        let rep = gaussian_orbit_report(&m, GuidanceMode::SPIN_ON, &[tr]).unwrap();
        assert!(
            rep.position_error < 1e-6 && rep.speed_error < 1e-6 && rep.linearity_error < 1e-6,
            "{rep:?}"
        );
    }

    #[test]
    fn fringe_profile_needs_samples() {
        assert!(matches!(
            fringe_profile(
                &[],
                1.0,
                BinSpec {
                    lo: 0.0,
                    hi: 1.0,
                    count: 4
                },
                None
            ),
            Err(Error::InsufficientSamples { .. })
        ));
    }
}

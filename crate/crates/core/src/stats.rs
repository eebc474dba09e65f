//! Small set of goodness-of-fit helpers used by the analysis gates.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::{Error, Result};

/// One-sample Kolmogorov–Smirnov statistic and asymptotic p-value.
pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut xs: Vec<f64> = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    let sn = n.sqrt();
    (d, kolmogorov_q((sn + 0.12 + 0.11 / sn) * d))
}

/// Q(λ) = 2 Σ (−1)^{j−1} e^{−2j²λ²}.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let a = -2.0 * lambda * lambda;
    let mut sum = 0.0;
    let mut sign = 2.0;
    let mut prev = 0.0;
    for j in 1..=200 {
        let term = sign * (a * (j * j) as f64).exp();
        sum += term;
        if term.abs() <= 1e-12 * prev || term.abs() <= 1e-300 {
            return sum.clamp(0.0, 1.0);
        }
        sign = -sign;
        prev = term.abs();
    }
    1.0
}

/// Pearson chi-square over bins; adjacent bins are merged until each expected
/// count is at least 5. Returns (statistic, degrees of freedom, p-value).
pub fn chi_square(observed: &[f64], expected: &[f64]) -> Result<(f64, usize, f64)> {
    let mut merged: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for (&o, &e) in observed.iter().zip(expected) {
        acc.0 += o;
        acc.1 += e;
        if acc.1 >= 5.0 {
            merged.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.1 > 0.0 || acc.0 > 0.0 {
        match merged.last_mut() {
            Some(last) => {
                last.0 += acc.0;
                last.1 += acc.1;
            }
            None => merged.push(acc),
        }
    }
    if merged.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 10,
            got: observed.iter().sum::<f64>() as usize,
        });
    }
    let stat: f64 = merged.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = merged.len() - 1;
    let p = ChiSquared::new(dof as f64).map(|d| d.sf(stat)).unwrap_or(f64::NAN);
    Ok((stat, dof, p))
}

/// CDF of the Rayleigh distribution with the given scale.
pub fn rayleigh_cdf(scale: f64) -> impl Fn(f64) -> f64 {
    move |r| {
        if r <= 0.0 {
            0.0
        } else {
            -(-r * r / (2.0 * scale * scale)).exp_m1()
        }
    }
}

/// Counts of `values` in equal-width bins over [lo, hi); values outside are
/// ignored.
pub fn histogram(values: &[f64], lo: f64, hi: f64, bins: usize) -> (Vec<f64>, Vec<u64>) {
    let width = (hi - lo) / bins as f64;
    let edges = (0..=bins).map(|i| lo + i as f64 * width).collect();
    let mut counts = vec![0u64; bins];
    for &v in values {
        if v >= lo && v < hi {
            let k = (((v - lo) / width) as usize).min(bins - 1);
            counts[k] += 1;
        }
    }
    (edges, counts)
}

//! Sample statistics: means, bootstrap intervals and goodness-of-fit.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::random::stream;

/// Default number of bootstrap resamples.
pub const RESAMPLES: usize = 2000;

/// A point estimate with a 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub n: usize,
}

pub fn mean(samples: &[f64]) -> f64 {
    samples.iter().sum::<f64>() / samples.len() as f64
}

/// Unbiased sample variance.
pub fn variance(samples: &[f64]) -> f64 {
    let m = mean(samples);
    samples.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (samples.len() as f64 - 1.0)
}

/// Mean with a percentile-bootstrap 95% interval, deterministic in `seed`.
pub fn bootstrap_mean(samples: &[f64], seed: u64) -> Result<Estimate> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} samples, need at least 2",
            samples.len()
        )));
    }
    let groups: Vec<(f64, f64)> = samples.iter().map(|&x| (x, 1.0)).collect();
    ratio_bootstrap(&groups, seed)
}

/// `sum(num) / sum(den)` over groups, with the interval from resampling
/// whole groups. Used for pooled means over correlated clusters.
pub fn ratio_bootstrap(groups: &[(f64, f64)], seed: u64) -> Result<Estimate> {
    if groups.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} groups, need at least 2",
            groups.len()
        )));
    }
    let ratio = |it: &mut dyn Iterator<Item = (f64, f64)>| {
        let (n, d) = it.fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
        n / d
    };
    let point = ratio(&mut groups.iter().copied());
    let mut rng = stream(seed, u64::MAX);
    let m = groups.len();
    let mut stats: Vec<f64> = (0..RESAMPLES)
        .map(|_| ratio(&mut (0..m).map(|_| groups[rng.random_range(0..m)])))
        .collect();
    stats.sort_by(f64::total_cmp);
    let lo = stats[(0.025 * RESAMPLES as f64) as usize];
    let hi = stats[((0.975 * RESAMPLES as f64) as usize).min(RESAMPLES - 1)];
    Ok(Estimate {
        mean: point,
        ci_lo: lo.min(point),
        ci_hi: hi.max(point),
        n: m,
    })
}

/// Two-sided Kolmogorov-Smirnov test against the exponential law with the
/// given mean. Returns `(D, p)` using the asymptotic distribution with the
/// Stephens small-sample correction.
pub fn ks_exponential(samples: &[f64], mean: f64) -> (f64, f64) {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in xs.iter().enumerate() {
        let cdf = 1.0 - (-x / mean).exp();
        d = d.max((i as f64 + 1.0) / n - cdf).max(cdf - i as f64 / n);
    }
    let sqrt_n = n.sqrt();
    (d, kolmogorov_q((sqrt_n + 0.12 + 0.11 / sqrt_n) * d))
}

/// `Q(lambda) = 2 sum_k (-1)^(k-1) exp(-2 k^2 lambda^2)`.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

//! Small statistics toolkit: Kolmogorov–Smirnov distances, means with
//! standard errors, batch means for correlated chains.

use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by std when it is in the build graph
use num_traits::Float;

/// Standard deviation of `√m·D` for the asymptotic Kolmogorov distribution.
pub const KOLMOGOROV_SD: f64 = 0.2603;

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// One-sample KS statistic `sup |F̂ − F|` against a continuous CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(xs: &[f64], cdf: F) -> f64 {
    let v = sorted(xs);
    let m = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / m - f).max(f - i as f64 / m);
    }
    d
}

/// Two-sample KS statistic `sup |F̂_a − F̂_b|`, ties handled exactly.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (a, b) = (sorted(a), sorted(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Approximate standard deviation of a KS statistic between samples of
/// sizes `n` and `m` under the null (`m = None` for one-sample).
pub fn ks_sigma(n: usize, m: Option<usize>) -> f64 {
    let inv = 1.0 / n as f64 + m.map_or(0.0, |m| 1.0 / m as f64);
    KOLMOGOROV_SD * inv.sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub stderr: f64,
}

/// Sample mean and `s/√m` for independent draws.
pub fn mean_stderr(xs: &[f64]) -> MeanEstimate {
    let m = xs.len() as f64;
    if xs.is_empty() {
        return MeanEstimate { mean: f64::NAN, stderr: f64::NAN };
    }
    let mean = xs.iter().sum::<f64>() / m;
    if xs.len() < 2 {
        return MeanEstimate { mean, stderr: 0.0 };
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    MeanEstimate { mean, stderr: (var / m).sqrt() }
}

/// Batch-means estimate for a correlated series: the standard error is that
/// of the `batches` batch averages. Trailing points that do not fill a batch
/// are dropped from the error estimate but not from the mean.
pub fn batch_means(xs: &[f64], batches: usize) -> MeanEstimate {
    let batches = batches.max(2);
    let size = xs.len() / batches;
    if size == 0 {
        return mean_stderr(xs);
    }
    let avgs: Vec<f64> = xs
        .chunks_exact(size)
        .take(batches)
        .map(|c| c.iter().sum::<f64>() / size as f64)
        .collect();
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    MeanEstimate { mean, stderr: mean_stderr(&avgs).stderr }
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / core::f64::consts::SQRT_2)
}

/// Standard error of a binomial proportion.
pub fn binomial_stderr(p: f64, m: usize) -> f64 {
    (p * (1.0 - p) / m as f64).sqrt()
}

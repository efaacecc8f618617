#![allow(dead_code)]

use quadrature::double_exponential;

/// 99.9% quantile of the chi-square law with 49 degrees of freedom.
pub const CHI2_49_Q999: f64 = 85.35056460859305;

/// Two-sided Kolmogorov–Smirnov distance of `samples` from `cdf`.
pub fn ks_distance(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    double_exponential::integrate(f, a, b, 1e-13).integral
}

/// Root of a nondecreasing `f` on `[lo, hi]` by bisection.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Pearson statistic of `samples` over the bins delimited by `edges`
/// (open-ended outer bins), each with expected probability `1 / bins`.
pub fn chi_square_equiprobable(samples: &[f64], edges: &[f64]) -> f64 {
    let bins = edges.len() + 1;
    let mut counts = vec![0u64; bins];
    for &x in samples {
        counts[edges.partition_point(|&e| e < x)] += 1;
    }
    let expected = samples.len() as f64 / bins as f64;
    counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum()
}

/// Histogram densities on `[lo, lo + width·bins)`.
pub fn histogram_density(samples: &[f64], lo: f64, width: f64, bins: usize) -> Vec<f64> {
    let mut counts = vec![0u64; bins];
    for &x in samples {
        let k = ((x - lo) / width).floor();
        if k >= 0.0 && (k as usize) < bins {
            counts[k as usize] += 1;
        }
    }
    let n = samples.len() as f64;
    counts.iter().map(|&c| c as f64 / (n * width)).collect()
}

pub fn mean_and_se(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut n, mut mean, mut m2) = (0.0f64, 0.0f64, 0.0f64);
    for x in values {
        n += 1.0;
        let d = x - mean;
        mean += d / n;
        m2 += d * (x - mean);
    }
    (mean, (m2 / (n - 1.0) / n).sqrt())
}

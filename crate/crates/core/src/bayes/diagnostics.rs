use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum chain length accepted by [`iat`].
pub const MIN_IAT_LEN: usize = 1000;

/// Autocovariances `γ_0 … γ_{n−1}` (biased, divided by n) via zero-padded FFT.
fn autocovariance(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let size = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = x
        .iter()
        .map(|v| Complex::new(v - mean, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(size)
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(size).process(&mut buf);
    buf.iter_mut().for_each(|c| *c = Complex::new(c.norm_sqr(), 0.0));
    planner.plan_fft_inverse(size).process(&mut buf);
    buf.iter().take(n).map(|c| c.re / (size as f64 * n as f64)).collect()
}

/// Integrated autocorrelation time by Geyer's initial positive sequence:
/// sums of adjacent autocovariance pairs are accumulated while positive.
pub fn iat(series: &[f64]) -> Result<f64> {
    if series.len() < MIN_IAT_LEN {
        return Err(Error::ChainTooShort { len: series.len(), min: MIN_IAT_LEN });
    }
    let gamma = autocovariance(series);
    let scale = series.iter().map(|v| v.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    if !(gamma[0] > 1e-28 * scale * scale) {
        return Err(Error::DegenerateChain);
    }
    let mut sum = 0.0;
    let mut k = 0;
    while 2 * k + 1 < gamma.len() {
        let pair = gamma[2 * k] + gamma[2 * k + 1];
        if pair <= 0.0 {
            break;
        }
        sum += pair;
        k += 1;
    }
    Ok(((2.0 * sum - gamma[0]) / gamma[0]).max(1.0))
}

/// Quantile with linear interpolation between order statistics
/// (`h = (n − 1) p`).
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    /// Probability mass per bin; sums to one.
    pub masses: Vec<f64>,
}

/// Normalized histogram on `bins` equal bins over `[lo, hi]`; values outside
/// the range are clamped into the end bins.
pub fn histogram(values: &[f64], bins: usize, lo: f64, hi: f64) -> Histogram {
    assert!(bins > 0 && hi > lo, "invalid histogram range");
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let b = ((v - lo) / width).floor();
        let b = if b.is_nan() { 0 } else { (b.max(0.0) as usize).min(bins - 1) };
        counts[b] += 1;
    }
    let total = values.len().max(1) as f64;
    Histogram {
        edges: (0..=bins).map(|i| lo + width * i as f64).collect(),
        masses: counts.iter().map(|&c| c as f64 / total).collect(),
    }
}

/// Total-variation distance `½ Σ |p_b − q_b|` between the histograms of two
/// samples over common bins. Without an explicit range the bins span the
/// union of both samples.
pub fn histogram_tv(a: &[f64], b: &[f64], bins: usize, range: Option<(f64, f64)>) -> Result<f64> {
    if bins < 10 {
        return Err(Error::InvalidArgument(format!("need at least 10 bins, got {bins}")));
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("histogram of an empty sample".into()));
    }
    let (lo, hi) = range.unwrap_or_else(|| {
        let lo = a.iter().chain(b).copied().fold(f64::INFINITY, f64::min);
        let hi = a.iter().chain(b).copied().fold(f64::NEG_INFINITY, f64::max);
        if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5, lo + 0.5)
        }
    });
    let p = histogram(a, bins, lo, hi);
    let q = histogram(b, bins, lo, hi);
    let tv = 0.5 * p.masses.iter().zip(&q.masses).map(|(x, y)| (x - y).abs()).sum::<f64>();
    Ok(tv.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn normals(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn iid_iat_is_one() {
        let tau = iat(&normals(100_000, 1)).unwrap();
        assert!((tau - 1.0).abs() < 0.1, "tau = {tau}");
    }

    #[test]
    fn ar1_iat_matches_closed_form() {
        let phi: f64 = 0.9;
        let noise = normals(200_000, 2);
        let mut x = vec![0.0; noise.len()];
        for t in 1..x.len() {
            x[t] = phi * x[t - 1] + noise[t];
        }
        let tau = iat(&x).unwrap();
        let expected = (1.0 + phi) / (1.0 - phi);
        assert!((tau / expected - 1.0).abs() < 0.2, "tau = {tau}");
    }

    #[test]
    fn iat_input_checks() {
        assert!(matches!(iat(&[1.0; 999]), Err(Error::ChainTooShort { len: 999, .. })));
        assert!(matches!(iat(&[3.5; 5000]), Err(Error::DegenerateChain)));
    }

    #[test]
    fn autocovariance_matches_direct_sum() {
        let x = normals(300, 3);
        let g = autocovariance(&x);
        let mean = x.iter().sum::<f64>() / 300.0;
        for lag in [0, 1, 5, 77] {
            let direct: f64 =
                (0..300 - lag).map(|t| (x[t] - mean) * (x[t + lag] - mean)).sum::<f64>() / 300.0;
            assert!((g[lag] - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn quantiles_interpolate_linearly() {
        let x: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert!((quantile(&x, 0.05) - 50.95).abs() < 1e-9);
        assert!((quantile(&x, 0.5) - 500.5).abs() < 1e-9);
        assert!((quantile(&x, 0.95) - 950.05).abs() < 1e-9);
        assert_eq!(quantile(&[2.0], 0.3), 2.0);
    }

    #[test]
    fn tv_cases() {
        let a = normals(100_000, 4);
        assert_eq!(histogram_tv(&a, &a, 50, None).unwrap(), 0.0);
        let shifted: Vec<f64> = a.iter().map(|v| v + 100.0).collect();
        assert_eq!(histogram_tv(&a, &shifted, 50, None).unwrap(), 1.0);
        let b = normals(100_000, 5);
        let tv = histogram_tv(&a, &b, 50, None).unwrap();
        assert!(tv < 0.05, "tv = {tv}");
        assert_eq!(tv, histogram_tv(&b, &a, 50, None).unwrap());
        assert!(histogram_tv(&a, &b, 9, None).is_err());
    }

    #[test]
    fn histogram_masses_sum_to_one() {
        let h = histogram(&normals(1000, 6), 20, -1.0, 1.0);
        assert!((h.masses.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(h.edges.len(), 21);
    }
}

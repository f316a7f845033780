use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::mesh::Point;
use crate::surrogate::ParameterDomain;

/// Unnormalized log density a sampler can target. `-∞` marks zero density.
pub trait LogDensity {
    fn dim(&self) -> usize;
    fn log_density(&self, theta: &[f64]) -> f64;
}

impl<T: LogDensity + ?Sized> LogDensity for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn log_density(&self, theta: &[f64]) -> f64 {
        (**self).log_density(theta)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub y: Vec<f64>,
    pub points: Vec<Point>,
    pub sigma: f64,
}

impl Observation {
    pub fn new(y: Vec<f64>, points: Vec<Point>, sigma: f64) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::InvalidArgument("observation needs at least one value".into()));
        }
        if y.len() != points.len() {
            return Err(Error::InvalidArgument(format!(
                "{} values for {} observation points",
                y.len(),
                points.len()
            )));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!("noise level must be positive, got {sigma}")));
        }
        Ok(Observation { y, points, sigma })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

/// `−(m/2) ln(2πσ²) − ‖y − pred‖² / (2σ²)`.
pub fn log_likelihood(y: &[f64], prediction: &[f64], sigma: f64) -> f64 {
    assert_eq!(y.len(), prediction.len(), "observation and prediction lengths differ");
    let m = y.len() as f64;
    let ss: f64 = y.iter().zip(prediction).map(|(a, b)| (a - b) * (a - b)).sum();
    -0.5 * m * (2.0 * PI * sigma * sigma).ln() - ss / (2.0 * sigma * sigma)
}

/// Uniform prior on `domain` times the Gaussian likelihood of `observation`
/// under `forward`.
pub struct PosteriorSpec<F> {
    pub forward: F,
    pub domain: ParameterDomain,
    pub observation: Observation,
}

impl<F> PosteriorSpec<F>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    pub fn new(forward: F, domain: ParameterDomain, observation: Observation) -> Self {
        PosteriorSpec { forward, domain, observation }
    }
}

/// Unnormalized log posterior; `-∞` outside the prior support or where the
/// forward map fails.
pub fn log_posterior<F>(theta: &[f64], spec: &PosteriorSpec<F>) -> f64
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    if !spec.domain.contains(theta) {
        return f64::NEG_INFINITY;
    }
    match (spec.forward)(theta) {
        Ok(pred) if pred.len() == spec.observation.len() => {
            log_likelihood(&spec.observation.y, &pred, spec.observation.sigma)
        }
        Ok(pred) => {
            log::warn!("forward map returned {} values, expected {}", pred.len(), spec.observation.len());
            f64::NEG_INFINITY
        }
        Err(e) => {
            log::warn!("forward map failed at {theta:?}: {e}");
            f64::NEG_INFINITY
        }
    }
}

impl<F> LogDensity for PosteriorSpec<F>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    fn dim(&self) -> usize {
        self.domain.dim()
    }

    fn log_density(&self, theta: &[f64]) -> f64 {
        log_posterior(theta, self)
    }
}

/// Noisy data `y_i = H_i(u_θ) + σ ξ_i` with `ξ_i ~ N(0,1)` from a seeded stream.
pub fn generate_synthetic_data(
    true_theta: &[f64],
    forward: impl Fn(&[f64]) -> Result<Vec<f64>>,
    points: Vec<Point>,
    sigma: f64,
    seed: u64,
) -> Result<Observation> {
    let clean = forward(true_theta)?;
    if clean.len() != points.len() {
        return Err(Error::InvalidArgument(format!(
            "forward map returned {} values for {} points",
            clean.len(),
            points.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y = clean
        .iter()
        .map(|v| {
            let xi: f64 = StandardNormal.sample(&mut rng);
            v + sigma * xi
        })
        .collect();
    // σ = 0 gives exact data; the stored scale must still be positive
    let stored_sigma = if sigma > 0.0 { sigma } else { f64::MIN_POSITIVE };
    Observation::new(y, points, stored_sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn points(m: usize) -> Vec<Point> {
        crate::fem::boundary_points(1.0, m)
    }

    #[test]
    fn likelihood_cases() {
        let s: f64 = 0.01;
        let y = [0.1, -0.2, 0.3];
        let base = -1.5 * (2.0 * PI * s * s).ln();
        assert_abs_diff_eq!(log_likelihood(&y, &y, s), base, epsilon = 1e-12);
        assert_abs_diff_eq!(
            log_likelihood(&[0.0], &[s], s),
            -0.5 * (2.0 * PI * s * s).ln() - 0.5,
            epsilon = 1e-12
        );
        let delta = log_likelihood(&y, &y, 2.0 * s) - log_likelihood(&y, &y, s);
        assert_abs_diff_eq!(delta, -3.0 * 2f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn posterior_outside_support_and_failures() {
        let obs = Observation::new(vec![0.0; 2], points(2), 0.1).unwrap();
        let spec = PosteriorSpec::new(
            |t: &[f64]| {
                if t[0] > 5.0 {
                    Err(Error::InvalidArgument("boom".into()))
                } else {
                    Ok(vec![t[0], t[0]])
                }
            },
            ParameterDomain::Interval { lo: 0.0, hi: 10.0 },
            obs,
        );
        assert_eq!(log_posterior(&[-0.1], &spec), f64::NEG_INFINITY);
        assert_eq!(log_posterior(&[10.1], &spec), f64::NEG_INFINITY);
        assert_eq!(log_posterior(&[6.0], &spec), f64::NEG_INFINITY);
        assert!(log_posterior(&[1.0], &spec).is_finite());
        // the forward map only sees |θ − 2| so mirrored points agree
        let spec = PosteriorSpec::new(
            |t: &[f64]| Ok(vec![(t[0] - 2.0).abs(); 2]),
            ParameterDomain::Interval { lo: 0.0, hi: 10.0 },
            Observation::new(vec![0.3, 0.1], points(2), 0.1).unwrap(),
        );
        assert_eq!(log_posterior(&[1.5], &spec), log_posterior(&[2.5], &spec));
    }

    #[test]
    fn noiseless_truth_maximizes_posterior() {
        let forward = |t: &[f64]| -> Result<Vec<f64>> {
            Ok((1..=10).map(|n| crate::oracle::mode_ratio(t[0], 0.85, n) / n as f64).collect())
        };
        let truth = 3.2;
        let clean = generate_synthetic_data(&[truth], forward, points(10), 0.0, 1).unwrap();
        let obs = Observation::new(clean.y, clean.points, 0.01).unwrap();
        let spec = PosteriorSpec::new(forward, ParameterDomain::Interval { lo: 0.0, hi: 10.0 }, obs);
        let best = (0..=1000)
            .map(|i| i as f64 * 0.01)
            .max_by(|a, b| log_posterior(&[*a], &spec).total_cmp(&log_posterior(&[*b], &spec)))
            .unwrap();
        assert_abs_diff_eq!(best, truth, epsilon = 1e-9);
    }

    #[test]
    fn synthetic_data_is_seeded() {
        let forward = |t: &[f64]| -> Result<Vec<f64>> { Ok(vec![t[0]; 10]) };
        let a = generate_synthetic_data(&[1.0], forward, points(10), 0.01, 7).unwrap();
        let b = generate_synthetic_data(&[1.0], forward, points(10), 0.01, 7).unwrap();
        let c = generate_synthetic_data(&[1.0], forward, points(10), 0.01, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.y, c.y);
        let exact = generate_synthetic_data(&[1.0], forward, points(10), 0.0, 7).unwrap();
        assert_eq!(exact.y, vec![1.0; 10]);
        assert!(a.y.iter().all(|v| (v - 1.0).abs() < 0.06));
    }

    #[test]
    fn observation_invariants() {
        assert!(Observation::new(vec![], vec![], 0.1).is_err());
        assert!(Observation::new(vec![1.0], points(1), 0.0).is_err());
        assert!(Observation::new(vec![1.0, 2.0], points(1), 0.1).is_err());
    }
}

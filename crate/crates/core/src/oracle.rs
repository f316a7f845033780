//! Closed-form boundary potential for the unit disk with a centered circular
//! inclusion of conductivity `1 + ρ` and radius `R`, under Neumann data
//! `f(θ) = Σ f_n cos(nθ)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Series truncation used when projecting general fluxes.
pub const MAX_TERMS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct CenteredInclusionProblem {
    pub contrast: f64,
    pub inclusion_radius: f64,
    /// `flux_coeffs[n - 1]` is the cosine coefficient `f_n`.
    pub flux_coeffs: Vec<f64>,
}

impl CenteredInclusionProblem {
    pub fn new(contrast: f64, inclusion_radius: f64, flux_coeffs: Vec<f64>) -> Result<Self> {
        if !(contrast > -1.0 && contrast.is_finite()) {
            return Err(Error::InvalidArgument(format!("contrast must exceed -1, got {contrast}")));
        }
        if !(0.0..=1.0).contains(&inclusion_radius) {
            return Err(Error::InvalidArgument(format!(
                "inclusion radius must lie in [0, 1], got {inclusion_radius}"
            )));
        }
        if flux_coeffs.len() > MAX_TERMS {
            return Err(Error::InvalidArgument(format!(
                "at most {MAX_TERMS} cosine terms are supported"
            )));
        }
        Ok(CenteredInclusionProblem { contrast, inclusion_radius, flux_coeffs })
    }

    /// The `cos(4θ)` flux used throughout the centered-inclusion experiments.
    pub fn cos4(contrast: f64, inclusion_radius: f64) -> Result<Self> {
        let mut coeffs = vec![0.0; 4];
        coeffs[3] = 1.0;
        Self::new(contrast, inclusion_radius, coeffs)
    }
}

/// `(α − R^{2n}) / (α + R^{2n})` with `α = 1 + 2/ρ`, written so that `ρ = 0`
/// (no inclusion) is handled without dividing by zero.
pub fn mode_ratio(contrast: f64, inclusion_radius: f64, n: u32) -> f64 {
    let a = inclusion_radius.powi(2 * n as i32);
    let rho = contrast;
    (rho + 2.0 - rho * a) / (rho + 2.0 + rho * a)
}

pub fn exact_boundary_series(problem: &CenteredInclusionProblem, theta: f64) -> f64 {
    problem
        .flux_coeffs
        .iter()
        .enumerate()
        .filter(|(_, &f)| f != 0.0)
        .map(|(i, &f)| {
            let n = (i + 1) as u32;
            mode_ratio(problem.contrast, problem.inclusion_radius, n) * f / n as f64
                * (n as f64 * theta).cos()
        })
        .sum()
}

/// `u(1, θ) = ¼ (α − R⁸)/(α + R⁸) cos 4θ`.
pub fn exact_boundary_cos4(contrast: f64, inclusion_radius: f64, theta: f64) -> f64 {
    0.25 * mode_ratio(contrast, inclusion_radius, 4) * (4.0 * theta).cos()
}

/// Trapezoid-rule cosine coefficients `f_1..f_N` from `M ≥ 4N` uniform
/// samples of `f` on `[0, 2π)`.
pub fn cosine_coefficients(samples: &[f64], n: usize) -> Result<Vec<f64>> {
    let m = samples.len();
    if m < 4 * n || m == 0 {
        return Err(Error::InvalidArgument(format!(
            "need at least {} samples for {n} coefficients, got {m}",
            4 * n
        )));
    }
    Ok((1..=n)
        .map(|k| {
            let s: f64 = samples
                .iter()
                .enumerate()
                .map(|(j, &f)| f * (2.0 * PI * (k * j) as f64 / m as f64).cos())
                .sum();
            2.0 * s / m as f64
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn zero_flux_gives_zero() {
        let p = CenteredInclusionProblem::new(2.0, 0.5, vec![0.0; 10]).unwrap();
        for i in 0..20 {
            assert_eq!(exact_boundary_series(&p, 0.3 * i as f64), 0.0);
        }
    }

    #[test]
    fn experiment_configuration_values() {
        assert_abs_diff_eq!(exact_boundary_cos4(3.2, 0.85, PI / 8.0), 0.0, epsilon = 1e-16);
        // α = 1.625, 0.85⁸ = 0.27249052503906246
        assert_abs_diff_eq!(exact_boundary_cos4(3.2, 0.85, 0.0), 0.178_197_131_568_429_62, epsilon = 1e-15);
        assert_abs_diff_eq!(exact_boundary_cos4(7.0, 1e-6, 0.0), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn large_contrast_limit() {
        let r = 0.7f64;
        let limit = (1.0 - r.powi(8)) / (1.0 + r.powi(8)) / 4.0;
        let p = CenteredInclusionProblem::cos4(1e12, r).unwrap();
        assert_abs_diff_eq!(exact_boundary_series(&p, 0.0), limit, epsilon = 1e-11);
    }

    #[test]
    fn zero_contrast_is_pure_laplace() {
        assert_abs_diff_eq!(exact_boundary_cos4(0.0, 0.85, 0.0), 0.25, epsilon = 1e-16);
    }

    #[test]
    fn cosine_projection() {
        let m = 64;
        let theta = |j: usize| 2.0 * PI * j as f64 / m as f64;
        let cos4: Vec<f64> = (0..m).map(|j| (4.0 * theta(j)).cos()).collect();
        let c = cosine_coefficients(&cos4, 8).unwrap();
        for (i, v) in c.iter().enumerate() {
            let expected = if i == 3 { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(*v, expected, epsilon = 1e-12);
        }

        let zero = cosine_coefficients(&vec![0.0; 64], 8).unwrap();
        assert!(zero.iter().all(|&v| v == 0.0));

        let mixed: Vec<f64> =
            (0..m).map(|j| 3.0 * theta(j).cos() + 0.5 * (2.0 * theta(j)).cos()).collect();
        let c = cosine_coefficients(&mixed, 8).unwrap();
        assert_abs_diff_eq!(c[0], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c[1], 0.5, epsilon = 1e-12);
        assert!(c[2..].iter().all(|v| v.abs() < 1e-12));

        assert!(cosine_coefficients(&vec![0.0; 31], 8).is_err());
    }

    #[test]
    fn rejects_invalid_problem() {
        assert!(CenteredInclusionProblem::new(-1.5, 0.5, vec![1.0]).is_err());
        assert!(CenteredInclusionProblem::new(1.0, 1.5, vec![1.0]).is_err());
        assert!(CenteredInclusionProblem::new(1.0, 0.5, vec![0.0; 65]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn closed_form_matches_series(rho in -0.99f64..50.0, r in 0.0f64..1.0, theta in 0.0f64..(2.0 * PI)) {
            let p = CenteredInclusionProblem::cos4(rho, r).unwrap();
            let a = exact_boundary_cos4(rho, r, theta);
            let b = exact_boundary_series(&p, theta);
            prop_assert!((a - b).abs() <= 1e-15);
        }

        #[test]
        fn cos4_shift_antisymmetry(rho in -0.99f64..50.0, r in 0.0f64..1.0, theta in 0.0f64..(2.0 * PI)) {
            let a = exact_boundary_cos4(rho, r, theta);
            let b = exact_boundary_cos4(rho, r, theta + PI / 4.0);
            prop_assert!((a + b).abs() <= 1e-14);
        }
    }
}

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::fem::FieldSolution;

/// Admissible parameter set Θ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParameterDomain {
    Interval { lo: f64, hi: f64 },
    /// Closed disk of the given radius centered at the origin.
    Disk { radius: f64 },
}

impl ParameterDomain {
    pub fn dim(&self) -> usize {
        match self {
            ParameterDomain::Interval { .. } => 1,
            ParameterDomain::Disk { .. } => 2,
        }
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        if theta.len() != self.dim() || theta.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match *self {
            ParameterDomain::Interval { lo, hi } => theta[0] >= lo && theta[0] <= hi,
            ParameterDomain::Disk { radius } => theta[0].hypot(theta[1]) <= radius,
        }
    }

    pub fn centroid(&self) -> Vec<f64> {
        match *self {
            ParameterDomain::Interval { lo, hi } => vec![0.5 * (lo + hi)],
            ParameterDomain::Disk { .. } => vec![0.0, 0.0],
        }
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match *self {
            ParameterDomain::Interval { lo, hi } => vec![rng.random_range(lo..=hi)],
            ParameterDomain::Disk { radius } => loop {
                let x = rng.random_range(-radius..=radius);
                let y = rng.random_range(-radius..=radius);
                if x.hypot(y) <= radius {
                    break vec![x, y];
                }
            },
        }
    }
}

/// Solution functional `F` in the continuity estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionFunctional {
    GradL2,
    GradL4,
}

impl SolutionFunctional {
    pub fn eval(&self, sol: &FieldSolution) -> f64 {
        match self {
            SolutionFunctional::GradL2 => sol.grad_l2,
            SolutionFunctional::GradL4 => sol.grad_l4,
        }
    }
}

/// Which parameter of the conductivity is unknown, with the known ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    /// Contrast ρ of a centered inclusion with known radius.
    Conductivity { inclusion_radius: f64 },
    /// Radius R of a centered inclusion with known contrast.
    Radius { contrast: f64 },
    /// Center of a small disk anomaly with known contrast and radius.
    Anomaly { contrast: f64, anomaly_radius: f64 },
}

/// The `(C, G, F)` triple of a continuity estimate
/// `|A_θ(u,v) − A_θ'(u,v)| ≤ C G(θ,θ') F(u) ‖v‖`, together with the
/// coercivity lower bound and the admissible set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelStructure {
    pub kind: ModelKind,
    pub continuity_constant: f64,
    pub coercivity_lb: f64,
    pub domain: ParameterDomain,
    pub functional: SolutionFunctional,
}

impl ModelStructure {
    /// `C = 1`, `G = |ρ − ρ'|`, `F = ‖∇u‖_{L²}`.
    pub fn conductivity(inclusion_radius: f64, lo: f64, hi: f64) -> Self {
        ModelStructure {
            kind: ModelKind::Conductivity { inclusion_radius },
            continuity_constant: 1.0,
            coercivity_lb: 1.0,
            domain: ParameterDomain::Interval { lo, hi },
            functional: SolutionFunctional::GradL2,
        }
    }

    /// `C = (2π)^{1/4} ρ`, `G = |R − R'|^{1/4}`, `F = ‖∇u‖_{L⁴}`.
    pub fn radius(contrast: f64, lo: f64, hi: f64) -> Self {
        ModelStructure {
            kind: ModelKind::Radius { contrast },
            continuity_constant: (2.0 * PI).powf(0.25) * contrast,
            coercivity_lb: 1.0,
            domain: ParameterDomain::Interval { lo, hi },
            functional: SolutionFunctional::GradL4,
        }
    }

    /// `C = 1`, `G = ρ |D_r(c) △ D_r(c')|^{1/4}`, `F = ‖∇u‖_{L⁴}`; centers
    /// range over the disk of radius `domain_radius − r`.
    pub fn anomaly(contrast: f64, anomaly_radius: f64, domain_radius: f64) -> Self {
        ModelStructure {
            kind: ModelKind::Anomaly { contrast, anomaly_radius },
            continuity_constant: 1.0,
            coercivity_lb: 1.0,
            domain: ParameterDomain::Disk { radius: domain_radius - anomaly_radius },
            functional: SolutionFunctional::GradL4,
        }
    }

    pub fn id(&self) -> &'static str {
        match self.kind {
            ModelKind::Conductivity { .. } => "conductivity",
            ModelKind::Radius { .. } => "radius",
            ModelKind::Anomaly { .. } => "anomaly",
        }
    }

    /// Parameter dissimilarity `G(θ, θ')`.
    pub fn g(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.kind {
            ModelKind::Conductivity { .. } => (a[0] - b[0]).abs(),
            ModelKind::Radius { .. } => (a[0] - b[0]).abs().powf(0.25),
            ModelKind::Anomaly { contrast, anomaly_radius } => {
                contrast.abs()
                    * symmetric_difference_area([a[0], a[1]], [b[0], b[1]], anomaly_radius).powf(0.25)
            }
        }
    }
}

/// Area of `D_r(c1) △ D_r(c2)` for two disks of equal radius.
pub fn symmetric_difference_area(c1: [f64; 2], c2: [f64; 2], r: f64) -> f64 {
    let d = (c1[0] - c2[0]).hypot(c1[1] - c2[1]);
    let disk = PI * r * r;
    if d >= 2.0 * r {
        return 2.0 * disk;
    }
    // 2(πr² − lens) written with asin so it vanishes exactly at d = 0
    2.0 * (2.0 * r * r * (d / (2.0 * r)).asin() + 0.5 * d * (4.0 * r * r - d * d).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn symmetric_difference_limits() {
        assert_eq!(symmetric_difference_area([0.3, 0.1], [0.3, 0.1], 0.7), 0.0);
        assert_abs_diff_eq!(symmetric_difference_area([0.0, 0.0], [2.0, 0.0], 1.0), 2.0 * PI, epsilon = 1e-15);
        assert_abs_diff_eq!(symmetric_difference_area([0.0, 0.0], [5.0, 0.0], 1.0), 2.0 * PI, epsilon = 1e-15);
        let expected = 2.0 * PI - 2.0 * (2.0 * PI / 3.0 - 3f64.sqrt() / 2.0);
        assert_abs_diff_eq!(symmetric_difference_area([0.0, 0.0], [1.0, 0.0], 1.0), expected, epsilon = 1e-14);
        assert_abs_diff_eq!(expected, 3.826_445_909_962_073, epsilon = 1e-14);
    }

    #[test]
    fn g_is_symmetric_and_vanishes_on_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let models = [
            ModelStructure::conductivity(0.85, 0.0, 10.0),
            ModelStructure::radius(6.0, 0.0, 1.0),
            ModelStructure::anomaly(6.0, 0.25, 5.0),
        ];
        for model in &models {
            for _ in 0..200 {
                let a = model.domain.sample_uniform(&mut rng);
                let b = model.domain.sample_uniform(&mut rng);
                assert_eq!(model.g(&a, &a), 0.0);
                assert_eq!(model.g(&a, &b), model.g(&b, &a));
                assert!(model.g(&a, &b) >= 0.0);
            }
            // shrinking perturbations drive G to zero
            let a = model.domain.centroid();
            let mut last = f64::INFINITY;
            for e in [1e-1, 1e-2, 1e-4, 1e-6] {
                let b: Vec<f64> = a.iter().map(|v| v + e).collect();
                let g = model.g(&a, &b);
                assert!(g < last);
                last = g;
            }
            assert!(last < 0.25);
        }
    }

    #[test]
    fn radius_constant() {
        let m = ModelStructure::radius(6.0, 0.0, 1.0);
        assert_abs_diff_eq!(m.continuity_constant, (2.0 * PI).powf(0.25) * 6.0, epsilon = 1e-15);
    }

    #[test]
    fn domain_membership() {
        let i = ParameterDomain::Interval { lo: 0.0, hi: 10.0 };
        assert!(i.contains(&[0.0]) && i.contains(&[10.0]) && !i.contains(&[10.01]));
        assert!(!i.contains(&[1.0, 2.0]));
        let d = ParameterDomain::Disk { radius: 4.75 };
        assert!(d.contains(&[2.5, -3.1]) && !d.contains(&[4.0, 4.0]));
        assert!(!d.contains(&[f64::NAN, 0.0]));
    }
}

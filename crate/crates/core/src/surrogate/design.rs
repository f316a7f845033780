use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::neighbors::nearest_neighbors;

/// How a design was generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DesignMeta {
    Dyadic { lo: f64, hi: f64, level: u32 },
    Triangular { domain_radius: f64, anomaly_radius: f64, spacing: f64 },
    Grid { domain_radius: f64, anomaly_radius: f64, spacing: f64 },
    Explicit,
}

/// Finite set of parameter points, stored row-major as `n × dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub dim: usize,
    pub coords: Vec<f64>,
    pub meta: DesignMeta,
}

impl Design {
    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let dim = points.first().map(Vec::len).ok_or(Error::EmptyDesign)?;
        if dim == 0 || points.iter().any(|p| p.len() != dim) {
            return Err(Error::InvalidArgument("design points must share one dimension".into()));
        }
        Ok(Design { dim, coords: points.concat(), meta: DesignMeta::Explicit })
    }

    pub fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.coords.len() / self.dim
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    /// Copy with points reordered so that new point `j` is old point `order[j]`.
    pub fn permuted(&self, order: &[usize]) -> Design {
        let coords = order.iter().flat_map(|&i| self.point(i).iter().copied()).collect();
        Design { dim: self.dim, coords, meta: self.meta.clone() }
    }
}

/// `2^l + 1` equispaced points on `[lo, hi]`, endpoints included.
pub fn build_design_dyadic_1d(lo: f64, hi: f64, level: u32) -> Result<Design> {
    if level < 1 || level > 30 {
        return Err(Error::InvalidArgument(format!("dyadic level must be in 1..=30, got {level}")));
    }
    if !(hi > lo) {
        return Err(Error::InvalidArgument(format!("empty interval [{lo}, {hi}]")));
    }
    let cells = 1u64 << level;
    let coords = (0..=cells)
        .map(|k| if k == cells { hi } else { lo + (hi - lo) * k as f64 / cells as f64 })
        .collect();
    Ok(Design { dim: 1, coords, meta: DesignMeta::Dyadic { lo, hi, level } })
}

/// Smallest admissible level `l ≥ 1` with `l ≥ ln((1 − ε)/ε) / ln 2`.
pub fn required_level(eps: f64) -> Result<u32> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("target must lie in (0, 1), got {eps}")));
    }
    let bound = ((1.0 - eps) / eps).ln() / 2f64.ln();
    Ok((bound - 1e-9).ceil().max(1.0) as u32)
}

fn lattice_design(
    admissible: f64,
    spacing: f64,
    basis: [[f64; 2]; 2],
    meta: DesignMeta,
) -> Result<Design> {
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::InvalidArgument(format!("spacing must be positive, got {spacing}")));
    }
    if !(admissible > 0.0) {
        return Err(Error::InvalidArgument("anomaly radius leaves no admissible centers".into()));
    }
    let reach = (2.0 * admissible / spacing).ceil() as i64 + 1;
    let limit = admissible * (1.0 + 1e-12);
    let mut coords = Vec::new();
    for j in -reach..=reach {
        for i in -reach..=reach {
            let x = spacing * (i as f64 * basis[0][0] + j as f64 * basis[1][0]);
            let y = spacing * (i as f64 * basis[0][1] + j as f64 * basis[1][1]);
            if x.hypot(y) <= limit {
                coords.push(x);
                coords.push(y);
            }
        }
    }
    Ok(Design { dim: 2, coords, meta })
}

/// Triangular-lattice centers with spacing `spacing`, clipped to
/// `|c| ≤ domain_radius − r`. Rows are emitted bottom to top.
pub fn build_design_triangular_2d(domain_radius: f64, r: f64, spacing: f64) -> Result<Design> {
    lattice_design(
        domain_radius - r,
        spacing,
        [[1.0, 0.0], [0.5, 3f64.sqrt() / 2.0]],
        DesignMeta::Triangular { domain_radius, anomaly_radius: r, spacing },
    )
}

/// Square-grid centers with spacing `spacing`, clipped to `|c| ≤ domain_radius − r`.
pub fn build_design_grid_2d(domain_radius: f64, r: f64, spacing: f64) -> Result<Design> {
    lattice_design(
        domain_radius - r,
        spacing,
        [[1.0, 0.0], [0.0, 1.0]],
        DesignMeta::Grid { domain_radius, anomaly_radius: r, spacing },
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    /// Largest `k`-th neighbor `G` value over the samples.
    pub max_kth_g: f64,
    pub worst_sample: Vec<f64>,
    pub target: f64,
    pub passes: bool,
    /// `C · F_max · ε`, the residual bound guaranteed by the target.
    pub implied_bound: f64,
    /// `C · F_max · max_kth_g`, the bound actually achieved on the samples.
    pub achieved_bound: f64,
    /// Estimate of `sup F` used in both bounds.
    pub f_max: f64,
}

/// Sweeps `samples` and checks that every sample's `k` nearest design
/// points have `G ≤ eps`.
pub fn verify_design_approximation(
    design: &Design,
    samples: &[Vec<f64>],
    g: impl Fn(&[f64], &[f64]) -> f64,
    f_max: f64,
    continuity_constant: f64,
    k: usize,
    eps: f64,
) -> Result<DesignReport> {
    let mut max_kth_g = f64::NEG_INFINITY;
    let mut worst_sample = Vec::new();
    for s in samples {
        let nb = nearest_neighbors(s, design, &g, k)?;
        let kth = *nb.g_values.last().expect("k >= 1");
        if kth > max_kth_g {
            max_kth_g = kth;
            worst_sample = s.clone();
        }
    }
    if samples.is_empty() {
        max_kth_g = 0.0;
    }
    Ok(DesignReport {
        max_kth_g,
        worst_sample,
        target: eps,
        passes: max_kth_g <= eps,
        implied_bound: continuity_constant * f_max * eps,
        achieved_bound: continuity_constant * f_max * max_kth_g,
        f_max,
    })
}

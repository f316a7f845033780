use crate::error::{Error, Result};

use super::design::Design;

/// Default snap threshold: parameters with `G < η` to a design point reuse
/// that point's stored data.
pub const DEFAULT_ETA: f64 = 1e-8;

/// The `k` design points closest to a parameter under `G`.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborSet {
    pub indices: Vec<usize>,
    /// `G(θ, θ_i)` for each index, nondecreasing.
    pub g_values: Vec<f64>,
}

impl NeighborSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Selects the `k` design points with smallest `G(θ, ·)`, ordered by
/// `(G, index)`; equal `G` values go to the lower design index.
pub fn nearest_neighbors(
    theta: &[f64],
    design: &Design,
    g: impl Fn(&[f64], &[f64]) -> f64,
    k: usize,
) -> Result<NeighborSet> {
    let n = design.len();
    if n == 0 {
        return Err(Error::EmptyDesign);
    }
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("k must lie in 1..={n}, got {k}")));
    }
    let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
    for (i, p) in design.points().enumerate() {
        let gi = g(theta, p);
        if best.len() == k && !(gi < best[k - 1].0) {
            continue;
        }
        // strict comparison keeps earlier (lower) indices ahead on ties
        let pos = best.partition_point(|&(gb, _)| gb <= gi);
        best.insert(pos, (gi, i));
        best.truncate(k);
    }
    Ok(NeighborSet {
        indices: best.iter().map(|&(_, i)| i).collect(),
        g_values: best.iter().map(|&(gv, _)| gv).collect(),
    })
}

/// Convex weights `α_i ∝ 1 / (G(θ, θ_i) F(u_{θ_i}))` over the neighbor set.
///
/// When the closest neighbor has `G < η` the Kronecker vector at that
/// neighbor is returned instead. `f_values[j]` belongs to `neighbors.indices[j]`.
pub fn coefficients(neighbors: &NeighborSet, f_values: &[f64], eta: f64) -> Vec<f64> {
    let k = neighbors.len();
    assert_eq!(f_values.len(), k);
    let mut alpha = vec![0.0; k];
    if k == 0 {
        return alpha;
    }
    if neighbors.g_values[0] < eta {
        alpha[0] = 1.0;
        return alpha;
    }
    let mut total = 0.0;
    for j in 0..k {
        alpha[j] = 1.0 / (neighbors.g_values[j] * f_values[j]);
        total += alpha[j];
    }
    alpha.iter_mut().for_each(|a| *a /= total);
    alpha
}

/// Residual bound `ε_θ = C / ((1/k) Σ_j 1/(G(θ,θ_j) F(u_{θ_j})))`; zero in
/// the snap branch.
pub fn residual_bound(
    neighbors: &NeighborSet,
    f_values: &[f64],
    continuity_constant: f64,
    eta: f64,
) -> f64 {
    let k = neighbors.len();
    if k == 0 || neighbors.g_values[0] < eta {
        return 0.0;
    }
    let mean_inv: f64 = neighbors
        .g_values
        .iter()
        .zip(f_values)
        .map(|(g, f)| 1.0 / (g * f))
        .sum::<f64>()
        / k as f64;
    continuity_constant / mean_inv
}

//! The t-walk of Christen & Fox: two coupled points, each move displacing
//! one of them relative to the other with one of four scale-free kernels.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

use super::chain::{Chain, SamplerKind};
use super::posterior::LogDensity;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwalkParams {
    /// Walk kernel scale.
    pub aw: f64,
    /// Traverse kernel scale.
    pub at: f64,
    /// Expected number of coordinates moved per step.
    pub n1phi: f64,
    /// Probabilities of traverse, walk, blow and hop.
    pub move_probs: [f64; 4],
}

impl Default for TwalkParams {
    fn default() -> Self {
        TwalkParams { aw: 1.5, at: 6.0, n1phi: 4.0, move_probs: [0.4918, 0.4918, 0.0082, 0.0082] }
    }
}

#[derive(Clone, Copy)]
enum Kernel {
    Traverse,
    Walk,
    Blow,
    Hop,
}

struct Walker<'a, R> {
    params: &'a TwalkParams,
    rng: R,
    dim: usize,
    pphi: f64,
}

impl<R: Rng> Walker<'_, R> {
    fn uniform(&mut self) -> f64 {
        self.rng.random()
    }

    fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    fn choose_phi(&mut self) -> Vec<bool> {
        (0..self.dim).map(|_| self.uniform() < self.pphi).collect()
    }

    fn traverse_beta(&mut self) -> f64 {
        let at = self.params.at;
        if self.uniform() < (at - 1.0) / (2.0 * at) {
            self.uniform().powf(1.0 / (at + 1.0))
        } else {
            self.uniform().powf(1.0 / (1.0 - at))
        }
    }

    /// Proposes a new position for `m` with `p` held fixed. Returns the
    /// proposal and the Hastings log correction, or `None` when the move is
    /// void (nothing selected, or a coordinate would coincide with `p`).
    fn propose(&mut self, kernel: Kernel, m: &[f64], p: &[f64]) -> Option<(Vec<f64>, f64)> {
        let phi = self.choose_phi();
        let nphi = phi.iter().filter(|&&b| b).count();
        if nphi == 0 {
            return None;
        }
        let mut y = m.to_vec();
        let correction = match kernel {
            Kernel::Traverse => {
                let beta = self.traverse_beta();
                for i in 0..self.dim {
                    if phi[i] {
                        y[i] = p[i] + beta * (p[i] - m[i]);
                    }
                }
                (nphi as f64 - 2.0) * beta.ln()
            }
            Kernel::Walk => {
                let aw = self.params.aw;
                for i in 0..self.dim {
                    if phi[i] {
                        let u = self.uniform();
                        let z = aw / (1.0 + aw) * (aw * u * u + 2.0 * u - 1.0);
                        y[i] = m[i] + (m[i] - p[i]) * z;
                    }
                }
                0.0
            }
            Kernel::Blow => {
                let sigma = max_gap(&phi, m, p);
                for i in 0..self.dim {
                    if phi[i] {
                        y[i] = p[i] + sigma * self.normal();
                    }
                }
                blow_energy(&phi, &y, m, p) - blow_energy(&phi, m, &y, p)
            }
            Kernel::Hop => {
                let sigma = max_gap(&phi, m, p) / 3.0;
                for i in 0..self.dim {
                    if phi[i] {
                        y[i] = m[i] + sigma * self.normal();
                    }
                }
                hop_energy(&phi, &y, m, p) - hop_energy(&phi, m, &y, p)
            }
        };
        if y.iter().zip(p).any(|(a, b)| a == b) || y.iter().any(|v| !v.is_finite()) {
            return None;
        }
        Some((y, correction))
    }
}

fn max_gap(phi: &[bool], a: &[f64], p: &[f64]) -> f64 {
    (0..a.len()).filter(|&i| phi[i]).map(|i| (p[i] - a[i]).abs()).fold(0.0, f64::max)
}

/// `−ln` density of landing at `h` by a blow of `a` around `p`.
fn blow_energy(phi: &[bool], h: &[f64], a: &[f64], p: &[f64]) -> f64 {
    gaussian_energy(phi, h, p, max_gap(phi, a, p))
}

/// `−ln` density of landing at `h` by a hop of `a` (pivot `p`).
fn hop_energy(phi: &[bool], h: &[f64], a: &[f64], p: &[f64]) -> f64 {
    gaussian_energy(phi, h, a, max_gap(phi, a, p) / 3.0)
}

fn gaussian_energy(phi: &[bool], h: &[f64], center: &[f64], sigma: f64) -> f64 {
    let nphi = phi.iter().filter(|&&b| b).count() as f64;
    let ss: f64 = (0..h.len()).filter(|&i| phi[i]).map(|i| (h[i] - center[i]).powi(2)).sum();
    0.5 * nphi * (2.0 * PI).ln() + nphi * sigma.ln() + 0.5 * ss / (sigma * sigma)
}

/// Runs the t-walk from the pair `(theta0, theta0p)` and records the
/// trajectory of the first point. Row `j` is the state after iteration `j + 1`.
pub fn twalk_sample<T: LogDensity>(
    target: &T,
    theta0: &[f64],
    theta0p: &[f64],
    n_iter: usize,
    seed: u64,
    params: &TwalkParams,
) -> Result<Chain> {
    let dim = target.dim();
    if theta0.len() != dim || theta0p.len() != dim {
        return Err(Error::InvalidStart(format!("start points must have {dim} components")));
    }
    if theta0.iter().zip(theta0p).any(|(a, b)| a == b) {
        return Err(Error::InvalidStart("start points must differ in every coordinate".into()));
    }
    let mut lx = target.log_density(theta0);
    let mut lxp = target.log_density(theta0p);
    if !lx.is_finite() || !lxp.is_finite() {
        return Err(Error::InvalidStart("log density at a start point is not finite".into()));
    }
    let total: f64 = params.move_probs.iter().sum();
    if !(total > 0.0) || params.move_probs.iter().any(|&p| p < 0.0) {
        return Err(Error::InvalidArgument("t-walk move probabilities must be nonnegative".into()));
    }
    let cumulative = {
        let mut acc = 0.0;
        params.move_probs.map(|p| {
            acc += p / total;
            acc
        })
    };
    let mut walker = Walker {
        params,
        rng: ChaCha8Rng::seed_from_u64(seed),
        dim,
        pphi: (dim as f64).min(params.n1phi) / dim as f64,
    };

    let mut x = theta0.to_vec();
    let mut xp = theta0p.to_vec();
    let mut samples = Vec::with_capacity(n_iter * dim);
    let mut logpost = Vec::with_capacity(n_iter);
    let mut accepted = 0usize;
    for _ in 0..n_iter {
        let ker = walker.uniform();
        let kernel = match cumulative.iter().position(|&c| ker < c).unwrap_or(3) {
            0 => Kernel::Traverse,
            1 => Kernel::Walk,
            2 => Kernel::Blow,
            _ => Kernel::Hop,
        };
        let move_first = walker.uniform() >= 0.5;
        let (m, p, lm) = if move_first { (&x, &xp, lx) } else { (&xp, &x, lxp) };
        if let Some((y, correction)) = walker.propose(kernel, m, p) {
            let ly = target.log_density(&y);
            let u = walker.uniform();
            if ly.is_finite() && u.ln() < ly - lm + correction {
                accepted += 1;
                if move_first {
                    x = y;
                    lx = ly;
                } else {
                    xp = y;
                    lxp = ly;
                }
            }
        }
        samples.extend_from_slice(&x);
        logpost.push(lx);
    }
    Ok(Chain {
        dim,
        samples,
        logpost,
        acceptance_rate: accepted as f64 / n_iter.max(1) as f64,
        seed,
        sampler: SamplerKind::Twalk,
        n_iter,
        burn_in: 0,
        offset: 1,
        iat: None,
    })
}

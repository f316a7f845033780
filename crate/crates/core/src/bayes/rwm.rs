use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

use super::chain::{Chain, SamplerKind};
use super::posterior::LogDensity;

/// Random-walk Metropolis with proposal `θ + s ξ`, `ξ ~ N(0, I)`.
/// Row `j` of the returned chain is the state after iteration `j + 1`.
pub fn rwm_sample<T: LogDensity>(
    target: &T,
    theta0: &[f64],
    n_iter: usize,
    step_scale: f64,
    seed: u64,
) -> Result<Chain> {
    let dim = target.dim();
    if theta0.len() != dim {
        return Err(Error::InvalidStart(format!("start has {} components, expected {dim}", theta0.len())));
    }
    if !(step_scale > 0.0 && step_scale.is_finite()) {
        return Err(Error::InvalidArgument(format!("step scale must be positive, got {step_scale}")));
    }
    let mut lp = target.log_density(theta0);
    if !lp.is_finite() {
        return Err(Error::InvalidStart(format!("log density at {theta0:?} is not finite")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = theta0.to_vec();
    let mut prop = vec![0.0; dim];
    let mut samples = Vec::with_capacity(n_iter * dim);
    let mut logpost = Vec::with_capacity(n_iter);
    let mut accepted = 0usize;
    for _ in 0..n_iter {
        for (p, xi) in prop.iter_mut().zip(&x) {
            let z: f64 = StandardNormal.sample(&mut rng);
            *p = xi + step_scale * z;
        }
        let u: f64 = rng.random();
        let lp_prop = target.log_density(&prop);
        if lp_prop.is_finite() && u.ln() < lp_prop - lp {
            x.copy_from_slice(&prop);
            lp = lp_prop;
            accepted += 1;
        }
        samples.extend_from_slice(&x);
        logpost.push(lp);
    }
    Ok(Chain {
        dim,
        samples,
        logpost,
        acceptance_rate: accepted as f64 / n_iter.max(1) as f64,
        seed,
        sampler: SamplerKind::Rwm,
        n_iter,
        burn_in: 0,
        offset: 1,
        iat: None,
    })
}

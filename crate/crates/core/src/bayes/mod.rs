//! Gaussian-noise posteriors over PDE parameters and the MCMC machinery to
//! sample and compare them.

pub mod chain;
pub mod diagnostics;
pub mod posterior;
pub mod rwm;
pub mod twalk;

pub use chain::{Chain, SamplerKind};
pub use diagnostics::{histogram, histogram_tv, iat, quantile, Histogram};
pub use posterior::{
    generate_synthetic_data, log_likelihood, log_posterior, LogDensity, Observation, PosteriorSpec,
};
pub use rwm::rwm_sample;
pub use twalk::{twalk_sample, TwalkParams};

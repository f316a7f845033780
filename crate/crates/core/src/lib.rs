//! Physics-based surrogate models for Bayesian inversion of elliptic PDE
//! parameters, with a P1 finite element forward solver for the
//! conductivity equation on a disk.

pub mod bayes;
pub mod error;
pub mod experiments;
pub mod fem;
pub mod mesh;
pub mod oracle;
pub mod sparse;
pub mod surrogate;

pub use error::{Error, Result};

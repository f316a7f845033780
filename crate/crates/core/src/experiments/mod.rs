//! Configuration-driven reproduction of the three inversion experiments:
//! synthetic data, offline preprocessing, sampling and analysis.

pub mod config;
pub mod forward;
pub mod pipeline;

pub use config::{ExperimentConfig, ExperimentKind, ReferenceMode};
pub use forward::{FemForward, MeshSpec, OracleForward};
pub use pipeline::{
    ensure_data, run_analysis, run_full, run_preprocess, run_sampling, Artifacts, Report,
    SamplingMode,
};

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("incompatible Neumann flux: boundary integral {integral:e} exceeds tolerance {tolerance:e}")]
    IncompatibleFlux { integral: f64, tolerance: f64 },

    #[error("linear solver did not converge: relative residual {residual:e} after {iterations} iterations")]
    SolverFailure { residual: f64, iterations: usize },

    #[error("forward solve failed at design point {index} ({point:?}): {source}")]
    DesignPointFailure {
        index: usize,
        point: Vec<f64>,
        #[source]
        source: Box<Error>,
    },

    #[error("point ({0}, {1}) lies outside the mesh domain")]
    PointOutsideDomain(f64, f64),

    #[error("design is empty")]
    EmptyDesign,

    #[error("parameter {0:?} lies outside the admissible domain")]
    ParameterOutsideDomain(Vec<f64>),

    #[error("invalid MCMC start: {0}")]
    InvalidStart(String),

    #[error("chain too short: {len} samples, need at least {min}")]
    ChainTooShort { len: usize, min: usize },

    #[error("degenerate chain: zero variance")]
    DegenerateChain,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("missing artifact: {}", .0.display())]
    MissingArtifact(PathBuf),

    #[error("malformed store file: {0}")]
    StoreFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by the user's configuration rather than numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::InvalidArgument(_) | Error::MissingArtifact(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

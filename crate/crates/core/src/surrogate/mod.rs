//! Offline/online surrogate built from exact solves at design points.

pub mod design;
pub mod model;
pub mod neighbors;
pub mod store;

pub use design::{
    build_design_dyadic_1d, build_design_grid_2d, build_design_triangular_2d, required_level,
    verify_design_approximation, Design, DesignMeta, DesignReport,
};
pub use model::{ModelKind, ModelStructure, ParameterDomain, SolutionFunctional};
pub use neighbors::{coefficients, nearest_neighbors, residual_bound, NeighborSet, DEFAULT_ETA};
pub use store::{preprocess, provenance_hash, ErrorBound, PreprocessOptions, SurrogateStore};

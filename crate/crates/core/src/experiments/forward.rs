use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::{
    boundary_points, BoundaryFlux, ConductivityField, FieldSolution, NeumannSolver, PointEvaluator,
};
use crate::mesh::{generate_disk_mesh_with_rings, refine_uniform, Mesh, Point};
use crate::oracle::exact_boundary_cos4;
use crate::surrogate::{ModelKind, ModelStructure};

/// Mesh resolution shared by every solve of one experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshSpec {
    pub domain_radius: f64,
    pub target_h: f64,
    pub refinements: u32,
}

impl MeshSpec {
    /// Disk mesh with rings fitted to `interfaces`, refined `refinements` times.
    pub fn build(&self, interfaces: &[f64]) -> Result<Mesh> {
        let mut mesh = generate_disk_mesh_with_rings(self.domain_radius, self.target_h, interfaces)?;
        for _ in 0..self.refinements {
            mesh = refine_uniform(&mesh)?;
        }
        Ok(mesh)
    }

    pub fn describe(&self) -> String {
        format!(
            "disk radius={} h={} refinements={}",
            self.domain_radius, self.target_h, self.refinements
        )
    }
}

/// Neumann data and admissible conductivity for each experiment.
pub fn experiment_flux(kind: &ModelKind) -> BoundaryFlux {
    match kind {
        ModelKind::Conductivity { .. } | ModelKind::Radius { .. } => BoundaryFlux::cos(4),
        ModelKind::Anomaly { .. } => BoundaryFlux::Quartic,
    }
}

pub fn conductivity_field(kind: &ModelKind, theta: &[f64]) -> ConductivityField {
    match *kind {
        ModelKind::Conductivity { inclusion_radius } => {
            ConductivityField::with_inclusion(1.0, [0.0, 0.0], inclusion_radius, theta[0])
        }
        ModelKind::Radius { contrast } => {
            ConductivityField::with_inclusion(1.0, [0.0, 0.0], theta[0], contrast)
        }
        ModelKind::Anomaly { contrast, anomaly_radius } => {
            ConductivityField::with_inclusion(1.0, [theta[0], theta[1]], anomaly_radius, contrast)
        }
    }
}

/// Finite element forward map `θ ↦ u_θ` followed by point observation.
///
/// Centered inclusions get a ring of mesh vertices on the interface: one
/// shared mesh when the radius is known, a fresh mesh per solve when the
/// radius is the unknown. The anomaly uses one shared unfitted mesh.
pub struct FemForward {
    model: ModelStructure,
    mesh_spec: MeshSpec,
    flux: BoundaryFlux,
    points: Vec<Point>,
    shared: Option<(NeumannSolver, PointEvaluator)>,
}

impl FemForward {
    pub fn new(model: ModelStructure, mesh_spec: MeshSpec, points: Vec<Point>) -> Result<Self> {
        let flux = experiment_flux(&model.kind);
        let shared_rings = match model.kind {
            ModelKind::Conductivity { inclusion_radius } => Some(vec![inclusion_radius]),
            ModelKind::Radius { .. } => None,
            ModelKind::Anomaly { .. } => Some(vec![]),
        };
        let shared = match shared_rings {
            Some(rings) => {
                let mesh = Arc::new(mesh_spec.build(&rings)?);
                let evaluator = PointEvaluator::new(&mesh, &points)?;
                Some((NeumannSolver::new(mesh, &flux)?, evaluator))
            }
            None => None,
        };
        Ok(FemForward { model, mesh_spec, flux, points, shared })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn model(&self) -> &ModelStructure {
        &self.model
    }

    /// The mesh every solution lives on, when there is a single one.
    pub fn shared_mesh(&self) -> Option<&Arc<Mesh>> {
        self.shared.as_ref().map(|(s, _)| s.mesh())
    }

    pub fn solve(&self, theta: &[f64]) -> Result<FieldSolution> {
        if !self.model.domain.contains(theta) {
            return Err(Error::ParameterOutsideDomain(theta.to_vec()));
        }
        let field = conductivity_field(&self.model.kind, theta);
        match &self.shared {
            Some((solver, _)) => solver.solve(&field),
            None => {
                let mesh = Arc::new(self.mesh_spec.build(&[theta[0]])?);
                NeumannSolver::new(mesh, &self.flux)?.solve(&field)
            }
        }
    }

    pub fn observe(&self, sol: &FieldSolution) -> Result<Vec<f64>> {
        match &self.shared {
            Some((solver, evaluator)) if Arc::ptr_eq(solver.mesh(), &sol.mesh) => {
                Ok(evaluator.apply(&sol.nodal_values))
            }
            _ => Ok(PointEvaluator::new(&sol.mesh, &self.points)?.apply(&sol.nodal_values)),
        }
    }

    pub fn forward(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.observe(&self.solve(theta)?)
    }
}

/// Closed-form boundary values for the centered-inclusion experiments.
pub struct OracleForward {
    model: ModelStructure,
    angles: Vec<f64>,
}

impl OracleForward {
    pub fn new(model: ModelStructure, points: &[Point]) -> Result<Self> {
        if matches!(model.kind, ModelKind::Anomaly { .. }) {
            return Err(Error::Config("no closed-form solution for the anomaly experiment".into()));
        }
        Ok(OracleForward { model, angles: points.iter().map(|p| p[1].atan2(p[0])).collect() })
    }

    pub fn forward(&self, theta: &[f64]) -> Result<Vec<f64>> {
        if !self.model.domain.contains(theta) {
            return Err(Error::ParameterOutsideDomain(theta.to_vec()));
        }
        let (rho, r) = match self.model.kind {
            ModelKind::Conductivity { inclusion_radius } => (theta[0], inclusion_radius),
            ModelKind::Radius { contrast } => (contrast, theta[0]),
            ModelKind::Anomaly { .. } => unreachable!("rejected in new"),
        };
        Ok(self.angles.iter().map(|&t| exact_boundary_cos4(rho, r, t)).collect())
    }
}

/// `m` equispaced observation points on the outer boundary.
pub fn observation_points(domain_radius: f64, m: usize) -> Vec<Point> {
    boundary_points(domain_radius, m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(radius: f64, h: f64) -> MeshSpec {
        MeshSpec { domain_radius: radius, target_h: h, refinements: 0 }
    }

    #[test]
    fn fem_tracks_oracle_for_both_centered_models() {
        let pts = observation_points(1.0, 10);
        for (model, theta) in [
            (ModelStructure::conductivity(0.85, 0.0, 10.0), 3.2),
            (ModelStructure::radius(6.0, 0.0, 1.0), 0.725),
        ] {
            let fem = FemForward::new(model, spec(1.0, 0.04), pts.clone()).unwrap();
            let oracle = OracleForward::new(model, &pts).unwrap();
            let a = fem.forward(&[theta]).unwrap();
            let b = oracle.forward(&[theta]).unwrap();
            let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 0.02 * scale, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn radius_endpoints_are_solvable() {
        let pts = observation_points(1.0, 10);
        let model = ModelStructure::radius(6.0, 0.0, 1.0);
        let fem = FemForward::new(model, spec(1.0, 0.1), pts.clone()).unwrap();
        let oracle = OracleForward::new(model, &pts).unwrap();
        for r in [0.0, 1.0] {
            let a = fem.forward(&[r]).unwrap();
            let b = oracle.forward(&[r]).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 0.01, "R={r}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn anomaly_forward_is_quartic_response() {
        let pts = observation_points(5.0, 20);
        let model = ModelStructure::anomaly(6.0, 0.25, 5.0);
        let fem = FemForward::new(model, spec(5.0, 0.25), pts).unwrap();
        assert!(OracleForward::new(model, fem.points()).is_err());
        let base = fem.forward(&[0.0, 0.0]).unwrap();
        // homogeneous-like response u ≈ 1.25 r⁴ cos 4θ on the boundary
        assert!((base[0] - 781.25).abs() < 0.05 * 781.25, "{}", base[0]);
        let shifted = fem.forward(&[2.5, -3.1]).unwrap();
        assert!(base.iter().zip(&shifted).any(|(a, b)| (a - b).abs() > 1e-3));
        assert!(matches!(fem.forward(&[4.9, 0.0]), Err(Error::ParameterOutsideDomain(_))));
    }
}

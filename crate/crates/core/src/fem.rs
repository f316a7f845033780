//! P1 finite elements for the pure-Neumann conductivity equation
//! `div(λ ∇u) = 0` in a disk with flux `λ ∂u/∂n = f` on the boundary.
//!
//! The additive constant is fixed by requiring the discrete boundary
//! integral of `u` to vanish. The singular stiffness system is bordered by
//! that single constraint; see [`solve_neumann`].

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{dist, Mesh, Point};
use crate::sparse::{dot, norm2, solve_rank_one_augmented, CsrMatrix};

const GAUSS_OFFSET: f64 = 0.288_675_134_594_812_9; // 1 / (2√3)

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inclusion {
    pub center: Point,
    pub radius: f64,
    /// Conductivity jump ρ; the inclusion has conductivity `background + ρ`.
    pub contrast: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConductivityField {
    pub background: f64,
    pub inclusions: Vec<Inclusion>,
}

impl ConductivityField {
    pub fn uniform(value: f64) -> Self {
        ConductivityField { background: value, inclusions: Vec::new() }
    }

    pub fn with_inclusion(background: f64, center: Point, radius: f64, contrast: f64) -> Self {
        ConductivityField {
            background,
            inclusions: vec![Inclusion { center, radius, contrast }],
        }
    }

    pub fn value_at(&self, p: Point) -> f64 {
        self.inclusions
            .iter()
            .filter(|inc| dist(p, inc.center) < inc.radius)
            .fold(self.background, |acc, inc| acc + inc.contrast)
    }

    /// Uniform ellipticity lower bound, assuming inclusions do not overlap.
    pub fn lower_bound(&self) -> f64 {
        self.inclusions
            .iter()
            .map(|inc| self.background + inc.contrast.min(0.0))
            .fold(self.background, f64::min)
    }

    /// Checks ellipticity and that inclusions fit in a disk of `domain_radius`.
    pub fn validate(&self, domain_radius: f64) -> Result<()> {
        if !(self.background > 0.0 && self.background.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "background conductivity must be positive, got {}",
                self.background
            )));
        }
        for inc in &self.inclusions {
            if !(inc.contrast > -self.background && inc.contrast.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "inclusion contrast {} violates ellipticity",
                    inc.contrast
                )));
            }
            let reach = inc.center[0].hypot(inc.center[1]) + inc.radius;
            if !(inc.radius >= 0.0) || reach > domain_radius * (1.0 + 1e-12) {
                return Err(Error::InvalidArgument(format!(
                    "inclusion at {:?} with radius {} leaves the domain",
                    inc.center, inc.radius
                )));
            }
        }
        Ok(())
    }

    /// Conductivity sampled at each triangle centroid.
    pub fn per_triangle(&self, mesh: &Mesh) -> Vec<f64> {
        (0..mesh.num_triangles()).map(|t| self.value_at(mesh.centroid(t))).collect()
    }
}

/// Neumann data on the circle, evaluated at points of the exact boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryFlux {
    /// `Σ a_n cos(n θ)` over `(n, a_n)` pairs.
    Cosine { terms: Vec<(u32, f64)> },
    /// `x₁⁴ − 6x₁²x₂² + x₂⁴`.
    Quartic,
}

impl BoundaryFlux {
    pub fn cos(n: u32) -> Self {
        BoundaryFlux::Cosine { terms: vec![(n, 1.0)] }
    }

    pub fn eval(&self, p: Point) -> f64 {
        match self {
            BoundaryFlux::Cosine { terms } => {
                let theta = p[1].atan2(p[0]);
                terms.iter().map(|&(n, a)| a * (n as f64 * theta).cos()).sum()
            }
            BoundaryFlux::Quartic => {
                let (x2, y2) = (p[0] * p[0], p[1] * p[1]);
                x2 * x2 - 6.0 * x2 * y2 + y2 * y2
            }
        }
    }
}

/// Element stiffness `λ ∫_T ∇φ_i · ∇φ_j` for a counter-clockwise triangle.
pub fn local_stiffness(p: [Point; 3], lambda: f64) -> [[f64; 3]; 3] {
    let grads = barycentric_gradients(p);
    let area = 0.5 * signed_area2(p);
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = lambda * area * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
        }
    }
    k
}

fn signed_area2(p: [Point; 3]) -> f64 {
    (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1])
}

fn barycentric_gradients(p: [Point; 3]) -> [[f64; 2]; 3] {
    let a2 = signed_area2(p);
    let mut g = [[0.0; 2]; 3];
    for i in 0..3 {
        let j = (i + 1) % 3;
        let k = (i + 2) % 3;
        g[i] = [(p[j][1] - p[k][1]) / a2, (p[k][0] - p[j][0]) / a2];
    }
    g
}

fn triangle_points(mesh: &Mesh, t: usize) -> [Point; 3] {
    mesh.triangles[t].map(|v| mesh.vertices[v])
}

pub fn assemble_stiffness(mesh: &Mesh, field: &ConductivityField) -> Result<CsrMatrix> {
    field.validate(mesh.radius)?;
    Ok(assemble_stiffness_per_triangle(mesh, &field.per_triangle(mesh)))
}

/// Assembles the stiffness matrix from one conductivity value per triangle.
pub fn assemble_stiffness_per_triangle(mesh: &Mesh, lambda: &[f64]) -> CsrMatrix {
    assert_eq!(lambda.len(), mesh.num_triangles());
    let mut triplets = Vec::with_capacity(9 * mesh.num_triangles());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let k = local_stiffness(triangle_points(mesh, t), lambda[t]);
        for i in 0..3 {
            for j in 0..3 {
                triplets.push((tri[i], tri[j], k[i][j]));
            }
        }
    }
    CsrMatrix::from_triplets(mesh.num_vertices(), triplets)
}

/// Discrete boundary measure of each vertex: `∫_{∂B_h} φ_i ds`.
pub fn boundary_weights(mesh: &Mesh) -> Vec<f64> {
    let mut w = vec![0.0; mesh.num_vertices()];
    for &[a, b] in &mesh.boundary_edges {
        let half = 0.5 * dist(mesh.vertices[a], mesh.vertices[b]);
        w[a] += half;
        w[b] += half;
    }
    w
}

/// Load vector `∫_{∂B} f φ_i ds` using two-point Gauss quadrature per
/// boundary edge. Quadrature points are projected radially onto the circle
/// before `f` is evaluated.
pub fn assemble_neumann_load(mesh: &Mesh, flux: impl Fn(Point) -> f64) -> Result<Vec<f64>> {
    let mut load = vec![0.0; mesh.num_vertices()];
    let mut abs_integral = 0.0;
    for &[a, b] in &mesh.boundary_edges {
        let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
        let half = 0.5 * dist(pa, pb);
        for t in [0.5 - GAUSS_OFFSET, 0.5 + GAUSS_OFFSET] {
            let x = [(1.0 - t) * pa[0] + t * pb[0], (1.0 - t) * pa[1] + t * pb[1]];
            let scale = mesh.radius / x[0].hypot(x[1]);
            let fx = flux([x[0] * scale, x[1] * scale]);
            load[a] += half * fx * (1.0 - t);
            load[b] += half * fx * t;
            abs_integral += half * fx.abs();
        }
    }
    let integral: f64 = load.iter().sum();
    let tolerance = 1e-8 * abs_integral;
    if integral.abs() > tolerance {
        return Err(Error::IncompatibleFlux { integral, tolerance });
    }
    Ok(load)
}

#[derive(Debug, Clone)]
pub struct FieldSolution {
    pub mesh: Arc<Mesh>,
    pub nodal_values: Vec<f64>,
    /// ‖∇u‖ in L²(B).
    pub grad_l2: f64,
    /// ‖∇u‖ in L⁴(B).
    pub grad_l4: f64,
}

impl FieldSolution {
    /// Discrete boundary integral of `u`.
    pub fn boundary_integral(&self) -> f64 {
        dot(&boundary_weights(&self.mesh), &self.nodal_values)
    }

    pub fn max_abs(&self) -> f64 {
        self.nodal_values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Per-triangle gradient of a P1 function.
pub fn triangle_gradients(mesh: &Mesh, values: &[f64]) -> Vec<[f64; 2]> {
    (0..mesh.num_triangles())
        .map(|t| {
            let g = barycentric_gradients(triangle_points(mesh, t));
            let tri = mesh.triangles[t];
            let mut out = [0.0; 2];
            for i in 0..3 {
                out[0] += values[tri[i]] * g[i][0];
                out[1] += values[tri[i]] * g[i][1];
            }
            out
        })
        .collect()
}

/// Exact `(‖∇u‖_{L²}, ‖∇u‖_{L⁴})` of a P1 function.
pub fn gradient_norms(mesh: &Mesh, values: &[f64]) -> (f64, f64) {
    let (mut s2, mut s4) = (0.0, 0.0);
    for (t, g) in triangle_gradients(mesh, values).into_iter().enumerate() {
        let area = mesh.area(t);
        let sq = g[0] * g[0] + g[1] * g[1];
        s2 += area * sq;
        s4 += area * sq * sq;
    }
    (s2.sqrt(), s4.sqrt().sqrt())
}

/// Solves `K u = b` subject to `∫_{∂B_h} u ds = 0`.
///
/// The bordered system `[K w; wᵀ 0] [u; μ] = [b; 0]`, with `w` the discrete
/// boundary measure, is solved through its equivalent SPD form
/// `(K + w wᵀ) u = b`, which has the same solution whenever `b ⟂ 1`.
pub fn solve_neumann(k: &CsrMatrix, b: &[f64], mesh: Arc<Mesh>) -> Result<FieldSolution> {
    let n = mesh.num_vertices();
    if k.nrows != n || b.len() != n {
        return Err(Error::InvalidArgument("system size does not match mesh".into()));
    }
    let abs_sum: f64 = b.iter().map(|v| v.abs()).sum();
    let sum: f64 = b.iter().sum();
    if sum.abs() > 1e-8 * abs_sum {
        return Err(Error::IncompatibleFlux { integral: sum, tolerance: 1e-8 * abs_sum });
    }
    let w = boundary_weights(&mesh);
    let bnorm = norm2(b);
    let mut u = if bnorm == 0.0 {
        vec![0.0; n]
    } else {
        let (u, outcome) = solve_rank_one_augmented(k, &w, b, 1e-13, 4 * n + 1000);
        let residual: Vec<f64> = k.mul_vec(&u).iter().zip(b).map(|(x, y)| x - y).collect();
        let rel = norm2(&residual) / bnorm;
        if !outcome.converged || rel > 1e-10 {
            return Err(Error::SolverFailure {
                residual: rel.max(outcome.relative_residual),
                iterations: outcome.iterations,
            });
        }
        u
    };
    let shift = dot(&w, &u) / w.iter().sum::<f64>();
    u.iter_mut().for_each(|v| *v -= shift);
    let (grad_l2, grad_l4) = gradient_norms(&mesh, &u);
    Ok(FieldSolution { mesh, nodal_values: u, grad_l2, grad_l4 })
}

/// Assembles and solves the Neumann problem on `mesh` for one conductivity.
#[derive(Debug, Clone)]
pub struct NeumannSolver {
    mesh: Arc<Mesh>,
    load: Vec<f64>,
}

impl NeumannSolver {
    pub fn new(mesh: Arc<Mesh>, flux: &BoundaryFlux) -> Result<Self> {
        let load = assemble_neumann_load(&mesh, |p| flux.eval(p))?;
        Ok(NeumannSolver { mesh, load })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn load(&self) -> &[f64] {
        &self.load
    }

    pub fn solve(&self, field: &ConductivityField) -> Result<FieldSolution> {
        let k = assemble_stiffness(&self.mesh, field)?;
        solve_neumann(&k, &self.load, Arc::clone(&self.mesh))
    }
}

/// Linear point-evaluation functionals `u ↦ (u(x_1), …, u(x_m))` on a fixed mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct PointEvaluator {
    stencils: Vec<([usize; 3], [f64; 3])>,
}

impl PointEvaluator {
    /// Locates each point in the mesh. Points inside the closed disk but
    /// outside the polygonal mesh (between a boundary chord and the circle)
    /// are projected onto the nearest boundary edge.
    pub fn new(mesh: &Mesh, points: &[Point]) -> Result<Self> {
        let stencils = points
            .iter()
            .map(|&p| locate(mesh, p))
            .collect::<Result<Vec<_>>>()?;
        Ok(PointEvaluator { stencils })
    }

    pub fn len(&self) -> usize {
        self.stencils.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stencils.is_empty()
    }

    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        self.stencils
            .iter()
            .map(|(idx, w)| (0..3).map(|i| w[i] * values[idx[i]]).sum())
            .collect()
    }
}

fn locate(mesh: &Mesh, p: Point) -> Result<([usize; 3], [f64; 3])> {
    let r = p[0].hypot(p[1]);
    if !(r <= mesh.radius * (1.0 + 1e-9)) {
        return Err(Error::PointOutsideDomain(p[0], p[1]));
    }
    let tol = -1e-12;
    for t in 0..mesh.num_triangles() {
        let pts = triangle_points(mesh, t);
        let xmin = pts[0][0].min(pts[1][0]).min(pts[2][0]);
        let xmax = pts[0][0].max(pts[1][0]).max(pts[2][0]);
        let ymin = pts[0][1].min(pts[1][1]).min(pts[2][1]);
        let ymax = pts[0][1].max(pts[1][1]).max(pts[2][1]);
        let slack = 1e-12 * mesh.radius;
        if p[0] < xmin - slack || p[0] > xmax + slack || p[1] < ymin - slack || p[1] > ymax + slack {
            continue;
        }
        let a2 = signed_area2(pts);
        let l0 = signed_area2([p, pts[1], pts[2]]) / a2;
        let l1 = signed_area2([pts[0], p, pts[2]]) / a2;
        let l2 = 1.0 - l0 - l1;
        if l0.min(l1).min(l2) >= tol {
            return Ok((mesh.triangles[t], [l0, l1, l2]));
        }
    }

    // between a boundary chord and the circle
    let mut nearest: Option<(f64, [usize; 3], [f64; 3])> = None;
    for &[a, b] in &mesh.boundary_edges {
        let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
        let d = [pb[0] - pa[0], pb[1] - pa[1]];
        let len2 = d[0] * d[0] + d[1] * d[1];
        let s = (((p[0] - pa[0]) * d[0] + (p[1] - pa[1]) * d[1]) / len2).clamp(0.0, 1.0);
        let q = [pa[0] + s * d[0], pa[1] + s * d[1]];
        let gap = dist(p, q);
        if nearest.as_ref().map_or(true, |n| gap < n.0) {
            nearest = Some((gap, [a, b, b], [1.0 - s, s, 0.0]));
        }
    }
    nearest
        .map(|(_, idx, w)| (idx, w))
        .ok_or(Error::PointOutsideDomain(p[0], p[1]))
}

/// Evaluates a solution at arbitrary points of the closed domain.
pub fn evaluate_at_points(sol: &FieldSolution, points: &[Point]) -> Result<Vec<f64>> {
    Ok(PointEvaluator::new(&sol.mesh, points)?.apply(&sol.nodal_values))
}

/// `m` equispaced points on the circle of radius `radius`, starting at angle 0.
pub fn boundary_points(radius: f64, m: usize) -> Vec<Point> {
    (0..m)
        .map(|i| {
            let t = 2.0 * std::f64::consts::PI * i as f64 / m as f64;
            [radius * t.cos(), radius * t.sin()]
        })
        .collect()
}

//! Conforming triangulations of a disk.
//!
//! Meshes are built from concentric rings: ring `i` carries `6 i` equally
//! spaced vertices, and consecutive rings are zipped together by angle. The
//! layout is deterministic in `(radius, target_h)` and optionally places
//! extra rings exactly on prescribed radii so circular material interfaces
//! centered at the origin are resolved by mesh edges.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::Write;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    /// Vertex-index triples, counter-clockwise.
    pub triangles: Vec<[usize; 3]>,
    /// Boundary edges tracing the circle counter-clockwise, each `[from, to]`.
    pub boundary_edges: Vec<[usize; 2]>,
    pub radius: f64,
    /// Radii of origin-centered circles resolved by mesh edges. Refinement
    /// projects midpoints of edges on these circles back onto them.
    pub interfaces: Vec<f64>,
}

/// Minimum gap, in units of the ring spacing, kept between a relocated
/// interface ring and its neighbours.
const MIN_RING_GAP: f64 = 0.3;

pub fn generate_disk_mesh(radius: f64, target_h: f64) -> Result<Mesh> {
    generate_disk_mesh_with_rings(radius, target_h, &[])
}

/// Same as [`generate_disk_mesh`], but the ring closest to each radius in
/// `interface_radii` is moved onto it, provided it stays at least
/// `0.3 h` away from its neighbours. Radii that cannot be honored that way
/// are ignored; the mesh stays valid either way.
pub fn generate_disk_mesh_with_rings(
    radius: f64,
    target_h: f64,
    interface_radii: &[f64],
) -> Result<Mesh> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
    }
    if !(target_h > 0.0 && target_h < radius) {
        return Err(Error::InvalidArgument(format!(
            "target_h must lie in (0, radius), got {target_h}"
        )));
    }

    let rings = (radius / target_h).ceil() as usize;
    let spacing = radius / rings as f64;
    let mut ring_radii: Vec<f64> = (0..=rings).map(|i| i as f64 * spacing).collect();
    let mut moved = vec![false; rings + 1];
    for &r in interface_radii {
        if !(r > 0.0 && r < radius) || rings < 2 {
            continue;
        }
        let i = ((r / spacing).round() as usize).clamp(1, rings - 1);
        if moved[i] {
            continue;
        }
        let gap = MIN_RING_GAP * spacing;
        if r - ring_radii[i - 1] >= gap && ring_radii[i + 1] - r >= gap {
            ring_radii[i] = r;
            moved[i] = true;
        }
    }
    ring_radii[rings] = radius;
    let interfaces: Vec<f64> =
        (1..rings).filter(|&i| moved[i]).map(|i| ring_radii[i]).collect();

    let nverts = 1 + 3 * rings * (rings + 1);
    let mut vertices = Vec::with_capacity(nverts);
    vertices.push([0.0, 0.0]);
    for (i, &r) in ring_radii.iter().enumerate().skip(1) {
        let count = 6 * i;
        for j in 0..count {
            let t = 2.0 * PI * j as f64 / count as f64;
            vertices.push([r * t.cos(), r * t.sin()]);
        }
    }

    let ring_start = |i: usize| if i == 0 { 0 } else { 1 + 3 * i * (i - 1) };
    let mut triangles = Vec::with_capacity(6 * rings * rings);
    for j in 0..6 {
        triangles.push([0, 1 + j, 1 + (j + 1) % 6]);
    }
    for i in 2..=rings {
        let (inner0, inner_n) = (ring_start(i - 1), 6 * (i - 1));
        let (outer0, outer_n) = (ring_start(i), 6 * i);
        let inner = |p: usize| inner0 + p % inner_n;
        let outer = |q: usize| outer0 + q % outer_n;
        let (mut p, mut q) = (0usize, 0usize);
        while p < inner_n || q < outer_n {
            let next_in = (p + 1) as f64 / inner_n as f64;
            let next_out = (q + 1) as f64 / outer_n as f64;
            let advance_outer = p == inner_n || (q < outer_n && next_out < next_in);
            if advance_outer {
                triangles.push([inner(p), outer(q), outer(q + 1)]);
                q += 1;
            } else {
                triangles.push([inner(p), outer(q), inner(p + 1)]);
                p += 1;
            }
        }
    }

    let b0 = ring_start(rings);
    let bn = 6 * rings;
    let boundary_edges = (0..bn).map(|j| [b0 + j, b0 + (j + 1) % bn]).collect();

    Ok(Mesh { vertices, triangles, boundary_edges, radius, interfaces })
}

/// Splits every triangle into four; new boundary midpoints are projected
/// back onto the circle.
pub fn refine_uniform(mesh: &Mesh) -> Result<Mesh> {
    let mut vertices = mesh.vertices.clone();
    let mut midpoints: HashMap<(usize, usize), usize> =
        HashMap::with_capacity(mesh.triangles.len() * 3 / 2 + mesh.boundary_edges.len());

    let mut boundary_edges = Vec::with_capacity(mesh.boundary_edges.len() * 2);
    for &[a, b] in &mesh.boundary_edges {
        let [xa, ya] = mesh.vertices[a];
        let [xb, yb] = mesh.vertices[b];
        let (mx, my) = (0.5 * (xa + xb), 0.5 * (ya + yb));
        let scale = mesh.radius / mx.hypot(my);
        let m = vertices.len();
        vertices.push([mx * scale, my * scale]);
        midpoints.insert(edge_key(a, b), m);
        boundary_edges.push([a, m]);
        boundary_edges.push([m, b]);
    }

    let interfaces = &mesh.interfaces;
    let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Point>| -> usize {
        *midpoints.entry(edge_key(a, b)).or_insert_with(|| {
            let [xa, ya] = vertices[a];
            let [xb, yb] = vertices[b];
            let (mut mx, mut my) = (0.5 * (xa + xb), 0.5 * (ya + yb));
            let (ra, rb) = (xa.hypot(ya), xb.hypot(yb));
            if let Some(&r) = interfaces
                .iter()
                .find(|&&r| (ra - r).abs() <= 1e-9 * r && (rb - r).abs() <= 1e-9 * r)
            {
                let scale = r / mx.hypot(my);
                mx *= scale;
                my *= scale;
            }
            vertices.push([mx, my]);
            vertices.len() - 1
        })
    };

    let mut triangles = Vec::with_capacity(mesh.triangles.len() * 4);
    for &[a, b, c] in &mesh.triangles {
        let ab = midpoint(a, b, &mut vertices);
        let bc = midpoint(b, c, &mut vertices);
        let ca = midpoint(c, a, &mut vertices);
        triangles.push([a, ab, ca]);
        triangles.push([ab, b, bc]);
        triangles.push([ca, bc, c]);
        triangles.push([ab, bc, ca]);
    }

    let refined = Mesh {
        vertices,
        triangles,
        boundary_edges,
        radius: mesh.radius,
        interfaces: mesh.interfaces.clone(),
    };
    Ok(refined)
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Mesh {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Twice the signed area of triangle `t`.
    pub fn signed_area2(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let [xa, ya] = self.vertices[a];
        let [xb, yb] = self.vertices[b];
        let [xc, yc] = self.vertices[c];
        (xb - xa) * (yc - ya) - (xc - xa) * (yb - ya)
    }

    pub fn area(&self, t: usize) -> f64 {
        0.5 * self.signed_area2(t)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.area(t)).sum()
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [a, b, c] = self.triangles[t];
        let [xa, ya] = self.vertices[a];
        let [xb, yb] = self.vertices[b];
        let [xc, yc] = self.vertices[c];
        [(xa + xb + xc) / 3.0, (ya + yb + yc) / 3.0]
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<(usize, usize)> = self
            .triangles
            .iter()
            .flat_map(|&[a, b, c]| [edge_key(a, b), edge_key(b, c), edge_key(c, a)])
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges
    }

    pub fn max_edge_length(&self) -> f64 {
        self.edges()
            .into_iter()
            .map(|(a, b)| dist(self.vertices[a], self.vertices[b]))
            .fold(0.0, f64::max)
    }

    pub fn boundary_length(&self) -> f64 {
        self.boundary_edges
            .iter()
            .map(|&[a, b]| dist(self.vertices[a], self.vertices[b]))
            .sum()
    }

    /// Checks every structural invariant of a disk triangulation.
    pub fn validate(&self) -> Result<()> {
        let nv = self.vertices.len();
        if self.triangles.is_empty() {
            return Err(Error::InvalidMesh("no triangles".into()));
        }
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= nv) {
                return Err(Error::InvalidMesh(format!("triangle {t} references a missing vertex")));
            }
            if self.signed_area2(t) <= 0.0 {
                return Err(Error::InvalidMesh(format!("triangle {t} is not counter-clockwise")));
            }
        }

        let mut counts: HashMap<(usize, usize), u32> = HashMap::new();
        for &[a, b, c] in &self.triangles {
            for key in [edge_key(a, b), edge_key(b, c), edge_key(c, a)] {
                *counts.entry(key).or_insert(0) += 1;
            }
        }
        let mut boundary_from_triangles: Vec<(usize, usize)> = counts
            .iter()
            .filter_map(|(&k, &n)| match n {
                1 => Some(Ok(k)),
                2 => None,
                _ => Some(Err(k)),
            })
            .collect::<std::result::Result<_, _>>()
            .map_err(|(a, b)| Error::InvalidMesh(format!("edge ({a}, {b}) shared by >2 triangles")))?;
        boundary_from_triangles.sort_unstable();
        let mut declared: Vec<(usize, usize)> =
            self.boundary_edges.iter().map(|&[a, b]| edge_key(a, b)).collect();
        declared.sort_unstable();
        if declared != boundary_from_triangles {
            return Err(Error::InvalidMesh("boundary edges do not match triangle topology".into()));
        }

        // single closed cycle, counter-clockwise
        let nb = self.boundary_edges.len();
        for i in 0..nb {
            if self.boundary_edges[i][1] != self.boundary_edges[(i + 1) % nb][0] {
                return Err(Error::InvalidMesh(format!("boundary edge {i} does not chain")));
            }
        }
        let mut on_boundary = vec![false; nv];
        let mut swept = 0.0;
        for &[a, b] in &self.boundary_edges {
            if on_boundary[a] {
                return Err(Error::InvalidMesh("boundary cycle revisits a vertex".into()));
            }
            on_boundary[a] = true;
            let [xa, ya] = self.vertices[a];
            let [xb, yb] = self.vertices[b];
            swept += (xa * yb - ya * xb).atan2(xa * xb + ya * yb);
        }
        if (swept - 2.0 * PI).abs() > 1e-6 {
            return Err(Error::InvalidMesh("boundary is not traced counter-clockwise".into()));
        }

        let tol = 1e-9 * self.radius;
        for (v, &[x, y]) in self.vertices.iter().enumerate() {
            let off = (x.hypot(y) - self.radius).abs();
            if on_boundary[v] && off > tol {
                return Err(Error::InvalidMesh(format!("boundary vertex {v} is off the circle")));
            }
            if !on_boundary[v] && off <= tol {
                return Err(Error::InvalidMesh(format!("vertex {v} on the circle is not on the boundary")));
            }
        }
        Ok(())
    }

    /// Plain-text dump: a `vertices N triangles T boundary B` header, then
    /// one line per vertex (`x y`), triangle (`a b c`) and boundary edge (`a b`).
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut buf = String::new();
        let _ = writeln!(
            buf,
            "vertices {} triangles {} boundary {}",
            self.vertices.len(),
            self.triangles.len(),
            self.boundary_edges.len()
        );
        for [x, y] in &self.vertices {
            let _ = writeln!(buf, "{x:.17e} {y:.17e}");
        }
        for [a, b, c] in &self.triangles {
            let _ = writeln!(buf, "{a} {b} {c}");
        }
        for [a, b] in &self.boundary_edges {
            let _ = writeln!(buf, "{a} {b}");
        }
        out.write_all(buf.as_bytes())
    }
}

pub(crate) fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn euler(mesh: &Mesh) -> i64 {
        mesh.num_vertices() as i64 - mesh.edges().len() as i64 + mesh.num_triangles() as i64
    }

    #[test]
    fn coarsest_mesh_is_valid() {
        let mesh = generate_disk_mesh(1.0, 0.5).unwrap();
        assert!(mesh.num_triangles() >= 4);
        mesh.validate().unwrap();
        assert_eq!(euler(&mesh), 1);
    }

    #[test]
    fn fine_mesh_vertex_count_is_pinned() {
        let mesh = generate_disk_mesh(1.0, 0.02).unwrap();
        // 50 rings of 6i vertices plus the center
        assert_eq!(mesh.num_vertices(), 7651);
        assert_eq!(mesh.num_triangles(), 15000);
        assert!((5000..=40000).contains(&mesh.num_vertices()));
        mesh.validate().unwrap();
        assert!(mesh.max_edge_length() <= 1.5 * 0.02);
    }

    #[test]
    fn scaled_mesh_reaches_radius() {
        let mesh = generate_disk_mesh(5.0, 0.1).unwrap();
        let rmax = mesh.vertices.iter().map(|p| p[0].hypot(p[1])).fold(0.0, f64::max);
        assert!((rmax - 5.0).abs() < 1e-9);
        mesh.validate().unwrap();
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(generate_disk_mesh(0.0, 0.1).is_err());
        assert!(generate_disk_mesh(1.0, 0.0).is_err());
        assert!(generate_disk_mesh(1.0, 1.5).is_err());
        assert!(generate_disk_mesh(-1.0, 0.1).is_err());
    }

    #[test]
    fn refinement_quadruples_triangles() {
        let mesh = generate_disk_mesh(1.0, 0.5).unwrap();
        let once = refine_uniform(&mesh).unwrap();
        let twice = refine_uniform(&once).unwrap();
        assert_eq!(once.num_triangles(), 4 * mesh.num_triangles());
        assert_eq!(twice.num_triangles(), 16 * mesh.num_triangles());
        for m in [&once, &twice] {
            m.validate().unwrap();
            assert_eq!(euler(m), 1);
            for &[a, _] in &m.boundary_edges {
                let [x, y] = m.vertices[a];
                assert!((x.hypot(y) - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn area_converges_to_disk_area() {
        for &(radius, h) in &[(1.0, 0.5), (1.0, 0.1), (1.0, 0.03), (5.0, 0.25)] {
            let mesh = generate_disk_mesh(radius, h).unwrap();
            let exact = PI * radius * radius;
            let gap = (mesh.total_area() - exact).abs() / exact;
            assert!(gap < 3.0 * h / radius, "gap {gap} at h={h}");
            let refined = refine_uniform(&mesh).unwrap();
            let gap_r = (refined.total_area() - exact).abs() / exact;
            assert!(gap_r < gap);
        }
    }

    #[test]
    fn interface_ring_lands_on_radius() {
        let mesh = generate_disk_mesh_with_rings(1.0, 0.03, &[0.85]).unwrap();
        mesh.validate().unwrap();
        let hits = mesh
            .vertices
            .iter()
            .filter(|p| (p[0].hypot(p[1]) - 0.85).abs() < 1e-12)
            .count();
        assert!(hits > 0);
        assert_eq!(mesh.interfaces, vec![0.85]);
        // every triangle lies entirely on one side of the interface
        for t in 0..mesh.num_triangles() {
            let radii = mesh.triangles[t].map(|v| mesh.vertices[v][0].hypot(mesh.vertices[v][1]));
            let inside = radii.iter().all(|&r| r <= 0.85 + 1e-12);
            let outside = radii.iter().all(|&r| r >= 0.85 - 1e-12);
            assert!(inside || outside);
            let [cx, cy] = mesh.centroid(t);
            assert_eq!(cx.hypot(cy) < 0.85, inside && !outside);
        }
    }

    #[test]
    fn refinement_keeps_interface_on_circle() {
        let mesh = generate_disk_mesh_with_rings(1.0, 0.1, &[0.55]).unwrap();
        let fine = refine_uniform(&mesh).unwrap();
        fine.validate().unwrap();
        let before = mesh.vertices.iter().filter(|p| (p[0].hypot(p[1]) - 0.55).abs() < 1e-12).count();
        let after = fine.vertices.iter().filter(|p| (p[0].hypot(p[1]) - 0.55).abs() < 1e-12).count();
        assert_eq!(after, 2 * before);
    }

    #[test]
    fn deterministic_generation() {
        let a = generate_disk_mesh(1.0, 0.07).unwrap();
        let b = generate_disk_mesh(1.0, 0.07).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn text_dump_has_header() {
        let mesh = generate_disk_mesh(1.0, 0.5).unwrap();
        let mut buf = Vec::new();
        mesh.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let first = text.lines().next().unwrap();
        assert_eq!(
            first,
            format!(
                "vertices {} triangles {} boundary {}",
                mesh.num_vertices(),
                mesh.num_triangles(),
                mesh.boundary_edges.len()
            )
        );
        assert_eq!(
            text.lines().count(),
            1 + mesh.num_vertices() + mesh.num_triangles() + mesh.boundary_edges.len()
        );
    }
}

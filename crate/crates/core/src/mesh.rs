//! Criss-cross triangulation of the unit square.
//!
//! Each of the `N x N` subsquares is split by both diagonals into four
//! congruent right isosceles triangles meeting at an added center vertex.
//! Triangles are numbered row-major over subsquares, then south, east,
//! north, west inside each subsquare.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{DwdgError, Result};

pub type Point = [f64; 2];

/// Geometric tolerance for coordinates and normals on the criss-cross mesh.
pub const GEOM_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    Interior,
    Boundary,
}

#[derive(Debug, Clone)]
pub struct Edge {
    pub vertices: [usize; 2],
    pub length: f64,
    pub kind: EdgeKind,
    /// Adjacent triangle with the larger global index (the only one on the boundary).
    pub tplus: usize,
    /// Adjacent triangle with the smaller global index; `None` on the boundary.
    pub tminus: Option<usize>,
    /// Outward normal of `tminus` on interior edges, outward normal of the
    /// domain on boundary edges.
    pub normal: [f64; 2],
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.kind == EdgeKind::Boundary
    }

    /// Outward normal of the adjacent triangle `t` on this edge.
    pub fn outward_normal_of(&self, t: usize) -> [f64; 2] {
        match self.tminus {
            Some(tm) if tm == t => self.normal,
            _ => {
                debug_assert_eq!(t, self.tplus);
                if self.is_boundary() {
                    self.normal
                } else {
                    [-self.normal[0], -self.normal[1]]
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Triangle {
    /// Counter-clockwise vertex indices.
    pub vertices: [usize; 3],
    /// `edges[k]` is the edge opposite local vertex `k`.
    pub edges: [usize; 3],
    pub area: f64,
    /// Constant gradients of the three barycentric coordinates.
    pub grad_lambda: [[f64; 2]; 3],
}

#[derive(Debug, Clone)]
pub struct Mesh {
    level: usize,
    vertices: Vec<Point>,
    triangles: Vec<Triangle>,
    edges: Vec<Edge>,
}

/// Builds the criss-cross mesh with `n` subsquares per side.
pub fn build_crisscross(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(DwdgError::InvalidLevel);
    }
    let side = 1.0 / n as f64;
    let grid = |i: usize, j: usize| j * (n + 1) + i;
    let center = |i: usize, j: usize| (n + 1) * (n + 1) + j * n + i;

    let mut vertices = Vec::with_capacity((n + 1) * (n + 1) + n * n);
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([i as f64 * side, j as f64 * side]);
        }
    }
    for j in 0..n {
        for i in 0..n {
            vertices.push([(i as f64 + 0.5) * side, (j as f64 + 0.5) * side]);
        }
    }

    let mut tri_vertices = Vec::with_capacity(4 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (v00, v10, v11, v01) = (grid(i, j), grid(i + 1, j), grid(i + 1, j + 1), grid(i, j + 1));
            let c = center(i, j);
            tri_vertices.push([v00, v10, c]); // south
            tri_vertices.push([v10, v11, c]); // east
            tri_vertices.push([v11, v01, c]); // north
            tri_vertices.push([v01, v00, c]); // west
        }
    }

    Ok(Mesh::from_triangles(n, vertices, tri_vertices))
}

impl Mesh {
    fn from_triangles(level: usize, vertices: Vec<Point>, tri_vertices: Vec<[usize; 3]>) -> Self {
        let mut triangles = Vec::with_capacity(tri_vertices.len());
        for mut tv in tri_vertices {
            if signed_area(&vertices, tv) < 0.0 {
                tv.swap(1, 2);
            }
            let area = signed_area(&vertices, tv);
            let grad_lambda = barycentric_gradients(&vertices, tv, area);
            triangles.push(Triangle { vertices: tv, edges: [usize::MAX; 3], area, grad_lambda });
        }

        // sorted vertex pair -> edge index
        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        let mut incident: Vec<Vec<usize>> = Vec::new();
        let mut endpoints: Vec<[usize; 2]> = Vec::new();
        for (t, tri) in triangles.iter_mut().enumerate() {
            for k in 0..3 {
                let a = tri.vertices[(k + 1) % 3];
                let b = tri.vertices[(k + 2) % 3];
                let key = (a.min(b), a.max(b));
                let e = *lookup.entry(key).or_insert_with(|| {
                    endpoints.push([key.0, key.1]);
                    incident.push(Vec::with_capacity(2));
                    endpoints.len() - 1
                });
                incident[e].push(t);
                tri.edges[k] = e;
            }
        }

        let edges = endpoints
            .into_iter()
            .zip(incident)
            .map(|(ends, tris)| {
                let (pa, pb) = (vertices[ends[0]], vertices[ends[1]]);
                let length = ((pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2)).sqrt();
                let (kind, tplus, tminus) = match tris.as_slice() {
                    [t] => (EdgeKind::Boundary, *t, None),
                    [s, t] => (EdgeKind::Interior, *s.max(t), Some(*s.min(t))),
                    _ => unreachable!("edge shared by {} triangles", tris.len()),
                };
                let owner = tminus.unwrap_or(tplus);
                let normal = outward_normal(&vertices, &triangles[owner], ends);
                Edge { vertices: ends, length, kind, tplus, tminus, normal }
            })
            .collect();

        Mesh { level, vertices, triangles, edges }
    }

    /// Number of subsquares per side.
    pub fn level(&self) -> usize {
        self.level
    }

    /// Mesh size label `1/(2N)` used in the convergence tables.
    pub fn h(&self) -> f64 {
        1.0 / (2 * self.level) as f64
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle(&self, t: usize) -> Result<&Triangle> {
        self.triangles
            .get(t)
            .ok_or(DwdgError::TriangleOutOfRange { index: t, count: self.triangles.len() })
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        self.triangles[t].vertices.map(|v| self.vertices[v])
    }

    pub fn centroid(&self, t: usize) -> Point {
        let p = self.triangle_points(t);
        [(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0]
    }

    pub fn edge_points(&self, e: usize) -> [Point; 2] {
        self.edges[e].vertices.map(|v| self.vertices[v])
    }

    /// Barycentric coordinates of `x` with respect to triangle `t`.
    pub fn barycentric(&self, t: usize, x: Point) -> [f64; 3] {
        let tri = &self.triangles[t];
        let c = self.centroid(t);
        let d = [x[0] - c[0], x[1] - c[1]];
        tri.grad_lambda.map(|g| 1.0 / 3.0 + g[0] * d[0] + g[1] * d[1])
    }

    /// Local vertex slot of global vertex `v` in triangle `t`.
    pub fn local_vertex(&self, t: usize, v: usize) -> Option<usize> {
        self.triangles[t].vertices.iter().position(|&w| w == v)
    }

    /// Partition of the edges into (interior, boundary) index lists.
    pub fn classify_edges(&self) -> (Vec<usize>, Vec<usize>) {
        (0..self.edges.len()).partition(|&e| !self.edges[e].is_boundary())
    }

    /// Plain-text dump (`vertices:` then `triangles:` sections) for debugging.
    pub fn dump(&self) -> String {
        let mut out = String::from("vertices:\n");
        for p in &self.vertices {
            let _ = writeln!(out, "{} {}", p[0], p[1]);
        }
        out.push_str("triangles:\n");
        for t in &self.triangles {
            let _ = writeln!(out, "{} {} {}", t.vertices[0], t.vertices[1], t.vertices[2]);
        }
        out
    }
}

fn signed_area(vertices: &[Point], tv: [usize; 3]) -> f64 {
    let [a, b, c] = tv.map(|v| vertices[v]);
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn barycentric_gradients(vertices: &[Point], tv: [usize; 3], area: f64) -> [[f64; 2]; 3] {
    let p = tv.map(|v| vertices[v]);
    let mut grads = [[0.0; 2]; 3];
    for (k, g) in grads.iter_mut().enumerate() {
        let a = p[(k + 1) % 3];
        let b = p[(k + 2) % 3];
        // opposite edge rotated by +90 degrees points toward vertex k for CCW triangles
        *g = [(a[1] - b[1]) / (2.0 * area), (b[0] - a[0]) / (2.0 * area)];
    }
    grads
}

fn outward_normal(vertices: &[Point], tri: &Triangle, ends: [usize; 2]) -> [f64; 2] {
    let (a, b) = (vertices[ends[0]], vertices[ends[1]]);
    let third = tri.vertices.iter().copied().find(|v| !ends.contains(v)).expect("edge not in triangle");
    let c = vertices[third];
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len = (dx * dx + dy * dy).sqrt();
    let mut n = [dy / len, -dx / len];
    if n[0] * (c[0] - a[0]) + n[1] * (c[1] - a[1]) > 0.0 {
        n = [-n[0], -n[1]];
    }
    // snap signed zeros so axis tests see exact 0
    n.map(|x| if x.abs() < GEOM_TOL { 0.0 } else { x })
}

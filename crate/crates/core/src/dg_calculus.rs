//! Trace, jump and average operators and the one-sided discrete partial
//! derivatives realized as sparse lifting operators on the P1-DG space.
//!
//! For a direction `x_i` the forward trace `Q_i^+` takes the value from the
//! neighbor lying further along `x_i` and the backward trace `Q_i^-` the one
//! lying behind; when the edge normal is orthogonal to `x_i` both return the
//! average. The discrete derivative `d^{+-}_{h,i} v in V_h` is defined by
//!
//! ```text
//! (d v, phi)_T = sum_T <Q(v) n_T^(i), phi|_T>_{dT} - (v, d_i phi)_T   for all phi in V_h
//! ```
//!
//! where `n_T` is the outward normal of each element. On an interior edge
//! with `n_e` pointing from `T-` into `T+` the edge term is
//! `<Q(v) n_e^(i), phi^- - phi^+>`. With `bc_zero` the trace on boundary
//! edges is replaced by zero, which weakly imposes homogeneous Dirichlet data.

use crate::dg_space::{element_mass_inverse, DgFunction, DofMap, SpaceKind};
use crate::error::{DwdgError, Result};
use crate::mesh::{Mesh, Point, GEOM_TOL};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    X1,
    X2,
}

impl Direction {
    pub const ALL: [Direction; 2] = [Direction::X1, Direction::X2];

    pub fn index(self) -> usize {
        match self {
            Direction::X1 => 0,
            Direction::X2 => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const ALL: [Sign; 2] = [Sign::Plus, Sign::Minus];

    fn index(self) -> usize {
        match self {
            Sign::Plus => 0,
            Sign::Minus => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TraceSide {
    pub direction: Direction,
    pub sign: Sign,
}

/// Which element value a trace selects on an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceSource {
    Plus,
    Minus,
    Average,
    /// Boundary edge: the interior value (or zero in the boundary-zero variant).
    Boundary,
}

/// Trace selection on edge `e` for the given side.
pub fn trace_source(mesh: &Mesh, e: usize, side: TraceSide) -> TraceSource {
    let edge = &mesh.edges()[e];
    if edge.is_boundary() {
        return TraceSource::Boundary;
    }
    let n = edge.normal[side.direction.index()];
    if n.abs() < GEOM_TOL {
        return TraceSource::Average;
    }
    // n_e points from T- into T+, so T+ lies ahead along x_i when n > 0
    match (n > 0.0, side.sign) {
        (true, Sign::Plus) | (false, Sign::Minus) => TraceSource::Plus,
        (true, Sign::Minus) | (false, Sign::Plus) => TraceSource::Minus,
    }
}

fn check_on_edge(mesh: &Mesh, e: usize, x: Point) -> Result<()> {
    let [a, b] = mesh.edge_points(e);
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let s = ((x[0] - a[0]) * dx + (x[1] - a[1]) * dy) / len2;
    let cross = ((x[0] - a[0]) * dy - (x[1] - a[1]) * dx).abs() / len2.sqrt();
    let tol = 1e-12;
    if cross > tol || s < -tol || s > 1.0 + tol {
        return Err(DwdgError::PointNotOnEdge { edge: e, x: x[0], y: x[1] });
    }
    Ok(())
}

/// `(v^+, v^-)` at a point of edge `e`; `v^-` is `None` on the boundary.
fn side_values(mesh: &Mesh, e: usize, v: &DgFunction, x: Point) -> Result<(f64, Option<f64>)> {
    check_on_edge(mesh, e, x)?;
    let edge = &mesh.edges()[e];
    let plus = v.evaluate(mesh, edge.tplus, x)?;
    let minus = edge.tminus.map(|t| v.evaluate(mesh, t, x)).transpose()?;
    Ok((plus, minus))
}

/// `Q_i^{+-}(v)` at a point on edge `e`.
pub fn trace_value(mesh: &Mesh, e: usize, side: TraceSide, v: &DgFunction, x: Point, bc_zero: bool) -> Result<f64> {
    let (plus, minus) = side_values(mesh, e, v, x)?;
    Ok(match (trace_source(mesh, e, side), minus) {
        (TraceSource::Boundary, _) if bc_zero => 0.0,
        (TraceSource::Boundary, _) | (TraceSource::Plus, _) => plus,
        (TraceSource::Minus, Some(m)) => m,
        (TraceSource::Average, Some(m)) => 0.5 * (plus + m),
        (_, None) => unreachable!("interior edge without T-"),
    })
}

/// `[[v]] = v^+ - v^-` on interior edges, `v^+` on boundary edges.
pub fn jump(mesh: &Mesh, e: usize, v: &DgFunction, x: Point) -> Result<f64> {
    let (plus, minus) = side_values(mesh, e, v, x)?;
    Ok(plus - minus.unwrap_or(0.0))
}

/// `{v} = (v^+ + v^-)/2` on interior edges, `v^+` on boundary edges.
pub fn average(mesh: &Mesh, e: usize, v: &DgFunction, x: Point) -> Result<f64> {
    let (plus, minus) = side_values(mesh, e, v, x)?;
    Ok(minus.map_or(plus, |m| 0.5 * (plus + m)))
}

/// The four lifting operators `G[i][+-] = M^{-1} B[i][+-]` on the P1-DG space.
#[derive(Debug, Clone)]
pub struct LiftingSet {
    ops: [[CsrMatrix; 2]; 2],
    bc_zero: bool,
    dofmap: DofMap,
}

/// Assembles all four one-sided discrete derivative operators.
pub fn build_lifting(mesh: &Mesh, bc_zero: bool) -> LiftingSet {
    let dofmap = DofMap::new(mesh, SpaceKind::P1Dg);
    let ops = Direction::ALL.map(|dir| {
        Sign::ALL.map(|sign| {
            let b = assemble_rhs_operator(mesh, TraceSide { direction: dir, sign }, bc_zero);
            apply_inverse_mass(mesh, &b)
        })
    });
    LiftingSet { ops, bc_zero, dofmap }
}

// Right-hand side operator: B[phi, v] = flux terms - (v, d_i phi).
fn assemble_rhs_operator(mesh: &Mesh, side: TraceSide, bc_zero: bool) -> CsrMatrix {
    let i = side.direction.index();
    let n = 3 * mesh.num_triangles();
    let mut triplets = Vec::with_capacity(9 * mesh.num_triangles() + 8 * mesh.edges().len());

    for (t, tri) in mesh.triangles().iter().enumerate() {
        let third = tri.area / 3.0;
        for k in 0..3 {
            for j in 0..3 {
                triplets.push((3 * t + k, 3 * t + j, -third * tri.grad_lambda[k][i]));
            }
        }
    }

    for (e, edge) in mesh.edges().iter().enumerate() {
        let src = match trace_source(mesh, e, side) {
            TraceSource::Average => continue, // n_e^(i) = 0, the flux vanishes
            TraceSource::Boundary if bc_zero => continue,
            TraceSource::Boundary | TraceSource::Plus => edge.tplus,
            TraceSource::Minus => edge.tminus.expect("interior edge"),
        };
        let sides = std::iter::once(edge.tplus).chain(edge.tminus);
        for s in sides {
            let ns = edge.outward_normal_of(s)[i];
            for &a in &edge.vertices {
                let ka = mesh.local_vertex(s, a).expect("edge vertex in triangle");
                for &b in &edge.vertices {
                    let jb = mesh.local_vertex(src, b).expect("edge vertex in triangle");
                    let m = if a == b { edge.length / 3.0 } else { edge.length / 6.0 };
                    triplets.push((3 * s + ka, 3 * src + jb, ns * m));
                }
            }
        }
    }
    CsrMatrix::from_triplets(n, n, triplets)
}

fn apply_inverse_mass(mesh: &Mesh, b: &CsrMatrix) -> CsrMatrix {
    let mut triplets = Vec::with_capacity(3 * b.nnz());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let minv = element_mass_inverse(tri.area);
        for k in 0..3 {
            let (cols, vals) = b.row(3 * t + k);
            for (&j, &v) in cols.iter().zip(vals) {
                for r in 0..3 {
                    triplets.push((3 * t + r, j, minv[r][k] * v));
                }
            }
        }
    }
    CsrMatrix::from_triplets(b.nrows(), b.ncols(), triplets)
}

impl LiftingSet {
    pub fn bc_zero(&self) -> bool {
        self.bc_zero
    }

    pub fn dofmap(&self) -> DofMap {
        self.dofmap
    }

    pub fn operator(&self, direction: Direction, sign: Sign) -> &CsrMatrix {
        &self.ops[direction.index()][sign.index()]
    }

    pub fn apply(&self, direction: Direction, sign: Sign, v: &DgFunction) -> Result<DgFunction> {
        if v.dofmap() != self.dofmap {
            return Err(DwdgError::DimensionMismatch { expected: self.dofmap.len(), actual: v.dofmap().len() });
        }
        DgFunction::from_coeffs(self.dofmap, self.operator(direction, sign).mul_vec(v.coeffs())?)
    }

    /// `grad^{+-}_h v` as its two components.
    pub fn gradient(&self, sign: Sign, v: &DgFunction) -> Result<[DgFunction; 2]> {
        Ok([self.apply(Direction::X1, sign, v)?, self.apply(Direction::X2, sign, v)?])
    }
}

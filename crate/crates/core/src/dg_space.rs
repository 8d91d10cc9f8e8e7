//! Broken polynomial spaces on the mesh: piecewise linears in the
//! per-triangle nodal basis and piecewise constants.

use crate::error::{DwdgError, Result};
use crate::field::ScalarField;
use crate::mesh::{Mesh, Point};
use crate::quadrature::{triangle_rule, ASSEMBLY_DEGREE};
use crate::sparse::SparseSymMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    /// Discontinuous piecewise linears, three nodal values per triangle.
    P1Dg,
    /// Piecewise constants, one value per triangle.
    P0,
}

impl SpaceKind {
    pub fn dofs_per_cell(self) -> usize {
        match self {
            SpaceKind::P1Dg => 3,
            SpaceKind::P0 => 1,
        }
    }
}

/// Cell-contiguous numbering: the dofs of triangle `t` are
/// `t * k .. (t + 1) * k` with `k` dofs per cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DofMap {
    kind: SpaceKind,
    num_cells: usize,
}

impl DofMap {
    pub fn new(mesh: &Mesh, kind: SpaceKind) -> Self {
        DofMap { kind, num_cells: mesh.num_triangles() }
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn num_cells(&self) -> usize {
        self.num_cells
    }

    pub fn len(&self) -> usize {
        self.num_cells * self.kind.dofs_per_cell()
    }

    pub fn is_empty(&self) -> bool {
        self.num_cells == 0
    }

    pub fn offset(&self, t: usize) -> usize {
        t * self.kind.dofs_per_cell()
    }

    pub fn cell_dofs(&self, t: usize) -> std::ops::Range<usize> {
        let k = self.kind.dofs_per_cell();
        t * k..(t + 1) * k
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DgFunction {
    dofmap: DofMap,
    coeffs: Vec<f64>,
}

impl DgFunction {
    pub fn zeros(dofmap: DofMap) -> Self {
        DgFunction { dofmap, coeffs: vec![0.0; dofmap.len()] }
    }

    pub fn from_coeffs(dofmap: DofMap, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != dofmap.len() {
            return Err(DwdgError::DimensionMismatch { expected: dofmap.len(), actual: coeffs.len() });
        }
        Ok(DgFunction { dofmap, coeffs })
    }

    pub fn dofmap(&self) -> DofMap {
        self.dofmap
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn cell(&self, t: usize) -> &[f64] {
        &self.coeffs[self.dofmap.cell_dofs(t)]
    }

    /// Value on triangle `t` at the point with barycentric coordinates `l`.
    pub fn eval_bary(&self, t: usize, l: [f64; 3]) -> f64 {
        match self.dofmap.kind {
            SpaceKind::P0 => self.coeffs[t],
            SpaceKind::P1Dg => {
                let c = self.cell(t);
                c[0] * l[0] + c[1] * l[1] + c[2] * l[2]
            }
        }
    }

    /// Value of the restriction to triangle `t` at `x` (extended linearly
    /// outside the triangle).
    pub fn evaluate(&self, mesh: &Mesh, t: usize, x: Point) -> Result<f64> {
        if t >= self.dofmap.num_cells {
            return Err(DwdgError::TriangleOutOfRange { index: t, count: self.dofmap.num_cells });
        }
        Ok(self.eval_bary(t, mesh.barycentric(t, x)))
    }

    /// Exact cell average.
    pub fn cell_average(&self, t: usize) -> f64 {
        let c = self.cell(t);
        c.iter().sum::<f64>() / c.len() as f64
    }

    /// `(self, other)` over the mesh; both must be P0 or P1-DG on the same mesh.
    pub fn l2_inner(&self, mesh: &Mesh, other: &DgFunction) -> f64 {
        (0..mesh.num_triangles())
            .map(|t| {
                let area = mesh.triangles()[t].area;
                match (self.dofmap.kind, other.dofmap.kind) {
                    (SpaceKind::P0, SpaceKind::P0) => area * self.coeffs[t] * other.coeffs[t],
                    (SpaceKind::P0, SpaceKind::P1Dg) => area * self.coeffs[t] * other.cell_average(t),
                    (SpaceKind::P1Dg, SpaceKind::P0) => area * self.cell_average(t) * other.coeffs[t],
                    (SpaceKind::P1Dg, SpaceKind::P1Dg) => {
                        let m = element_mass(area);
                        quad_form(&m, self.cell(t), other.cell(t))
                    }
                }
            })
            .sum()
    }

    pub fn l2_norm(&self, mesh: &Mesh) -> f64 {
        self.l2_inner(mesh, self).max(0.0).sqrt()
    }

    /// Nodal P1-DG representation (P0 values are copied to all three nodes).
    pub fn to_p1(&self) -> DgFunction {
        match self.dofmap.kind {
            SpaceKind::P1Dg => self.clone(),
            SpaceKind::P0 => DgFunction {
                dofmap: DofMap { kind: SpaceKind::P1Dg, num_cells: self.dofmap.num_cells },
                coeffs: self.coeffs.iter().flat_map(|&c| [c; 3]).collect(),
            },
        }
    }
}

/// 3x3 mass matrix of the barycentric basis on a triangle of the given area.
pub fn element_mass(area: f64) -> [[f64; 3]; 3] {
    let d = area / 6.0;
    let o = area / 12.0;
    [[d, o, o], [o, d, o], [o, o, d]]
}

/// Inverse of [`element_mass`].
pub fn element_mass_inverse(area: f64) -> [[f64; 3]; 3] {
    let s = 3.0 / area;
    [[3.0 * s, -s, -s], [-s, 3.0 * s, -s], [-s, -s, 3.0 * s]]
}

pub(crate) fn quad_form(m: &[[f64; 3]; 3], x: &[f64], y: &[f64]) -> f64 {
    (0..3).map(|i| x[i] * (0..3).map(|j| m[i][j] * y[j]).sum::<f64>()).sum()
}

pub(crate) fn mat_vec3(m: &[[f64; 3]; 3], x: &[f64]) -> [f64; 3] {
    [0, 1, 2].map(|i| m[i][0] * x[0] + m[i][1] * x[1] + m[i][2] * x[2])
}

/// Cell averages of `g` by degree-4 quadrature.
pub fn project_cellavg(mesh: &Mesh, g: &dyn ScalarField) -> DgFunction {
    let rule = triangle_rule(ASSEMBLY_DEGREE).expect("built-in rule");
    let coeffs = (0..mesh.num_triangles())
        .map(|t| rule.integrate(mesh, t, |x| g.value(x)) / mesh.triangles()[t].area)
        .collect();
    DgFunction { dofmap: DofMap::new(mesh, SpaceKind::P0), coeffs }
}

/// Per-triangle nodal interpolant.
pub fn interpolate_nodal(mesh: &Mesh, g: &dyn ScalarField) -> DgFunction {
    let coeffs = mesh
        .triangles()
        .iter()
        .flat_map(|tri| tri.vertices.map(|v| g.value(mesh.vertices()[v])))
        .collect();
    DgFunction { dofmap: DofMap::new(mesh, SpaceKind::P1Dg), coeffs }
}

/// Block-diagonal L2 mass matrix of the space.
pub fn mass_matrix(mesh: &Mesh, dofmap: DofMap) -> SparseSymMatrix {
    let mut triplets = Vec::with_capacity(dofmap.len() * dofmap.kind.dofs_per_cell());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        match dofmap.kind {
            SpaceKind::P0 => triplets.push((t, t, tri.area)),
            SpaceKind::P1Dg => {
                let m = element_mass(tri.area);
                let o = dofmap.offset(t);
                for i in 0..3 {
                    for j in 0..3 {
                        triplets.push((o + i, o + j, m[i][j]));
                    }
                }
            }
        }
    }
    SparseSymMatrix::from_triplets(dofmap.len(), triplets).expect("mass matrix is symmetric")
}

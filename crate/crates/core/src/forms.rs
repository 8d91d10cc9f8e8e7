//! The DWDG bilinear form, load vectors, and energy / L2 error functionals.
//!
//! ```text
//! a_h(v, w) = 1/2 [ (grad+_{h,0} v, grad+_{h,0} w) + (grad-_{h,0} v, grad-_{h,0} w) ]
//!           + sum_e (gamma / h_e) <[[v]], [[w]]>_e
//! |||v|||^2 = a_h(v, v)
//! ```

use crate::dg_calculus::{Direction, LiftingSet, Sign};
use crate::dg_space::{element_mass, mat_vec3, quad_form, DgFunction, DofMap, SpaceKind};
use crate::error::{DwdgError, Result};
use crate::field::{ScalarField, SmoothField};
use crate::mesh::Mesh;
use crate::quadrature::{triangle_rule, ERROR_DEGREE};
use crate::sparse::SparseSymMatrix;

/// Uniform jump penalty `gamma_e = gamma` on every edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyConfig {
    pub gamma: f64,
}

impl PenaltyConfig {
    pub fn new(gamma: f64) -> Self {
        PenaltyConfig { gamma }
    }
}

/// Assembles `a_h` on the P1-DG space.
pub fn assemble_ah(mesh: &Mesh, lifting: &LiftingSet, penalty: PenaltyConfig) -> Result<SparseSymMatrix> {
    if !lifting.bc_zero() {
        return Err(DwdgError::LiftingNotBoundaryZero);
    }
    let gradient = assemble_gradient_part(mesh, lifting);
    let penalty = assemble_penalty(mesh, penalty);
    gradient.add_scaled(&penalty, 1.0)
}

/// `1/2 sum_{i, +-} G^T M G`, assembled triangle by triangle from the row
/// blocks of the lifting operators.
pub fn assemble_gradient_part(mesh: &Mesh, lifting: &LiftingSet) -> SparseSymMatrix {
    let n = lifting.dofmap().len();
    let mut triplets = Vec::new();
    let mut cols: Vec<usize> = Vec::with_capacity(12);
    let mut block: Vec<[f64; 3]> = Vec::with_capacity(12);
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let m = element_mass(tri.area);
        for dir in Direction::ALL {
            for sign in Sign::ALL {
                let g = lifting.operator(dir, sign);
                // dense 3 x k row block of G over the union of its columns
                cols.clear();
                block.clear();
                for r in 0..3 {
                    let (rc, rv) = g.row(3 * t + r);
                    for (&j, &v) in rc.iter().zip(rv) {
                        let slot = match cols.iter().position(|&c| c == j) {
                            Some(s) => s,
                            None => {
                                cols.push(j);
                                block.push([0.0; 3]);
                                cols.len() - 1
                            }
                        };
                        block[slot][r] = v;
                    }
                }
                for (a, &ca) in cols.iter().enumerate() {
                    let mga = mat_vec3(&m, &block[a]);
                    for (b, &cb) in cols.iter().enumerate() {
                        let v: f64 = (0..3).map(|r| mga[r] * block[b][r]).sum();
                        triplets.push((ca, cb, 0.5 * v));
                    }
                }
            }
        }
    }
    symmetrize(n, triplets)
}

/// `sum_e (gamma / h_e) <[[v]], [[w]]>_e` over interior and boundary edges.
pub fn assemble_penalty(mesh: &Mesh, penalty: PenaltyConfig) -> SparseSymMatrix {
    let n = 3 * mesh.num_triangles();
    let mut triplets = Vec::with_capacity(16 * mesh.edges().len());
    for edge in mesh.edges() {
        let scale = penalty.gamma / edge.length;
        // (dof, sign, vertex) entries of the jump
        let mut entries = Vec::with_capacity(4);
        for &v in &edge.vertices {
            entries.push((3 * edge.tplus + mesh.local_vertex(edge.tplus, v).unwrap(), 1.0, v));
            if let Some(tm) = edge.tminus {
                entries.push((3 * tm + mesh.local_vertex(tm, v).unwrap(), -1.0, v));
            }
        }
        for &(da, sa, va) in &entries {
            for &(db, sb, vb) in &entries {
                let m = if va == vb { edge.length / 3.0 } else { edge.length / 6.0 };
                triplets.push((da, db, scale * sa * sb * m));
            }
        }
    }
    symmetrize(n, triplets)
}

// Average with the transpose so round-off never trips the symmetry check.
fn symmetrize(n: usize, triplets: Vec<(usize, usize, f64)>) -> SparseSymMatrix {
    let both = triplets.iter().flat_map(|&(i, j, v)| [(i, j, 0.5 * v), (j, i, 0.5 * v)]).collect();
    SparseSymMatrix::from_triplets(n, both).expect("symmetrized by construction")
}

/// `(g, phi_j)` for every P1-DG basis function, by quadrature of the given degree.
pub fn load_vector(mesh: &Mesh, g: &dyn ScalarField, degree: usize) -> Result<Vec<f64>> {
    let rule = triangle_rule(degree)?;
    let mut out = vec![0.0; 3 * mesh.num_triangles()];
    for t in 0..mesh.num_triangles() {
        for (x, l, w) in rule.mapped(mesh, t) {
            let gx = w * g.value(x);
            for k in 0..3 {
                out[3 * t + k] += gx * l[k];
            }
        }
    }
    Ok(out)
}

/// `(u, phi_j)` for a P0 or P1-DG control `u`, computed exactly.
pub fn control_load(mesh: &Mesh, u: &DgFunction) -> Vec<f64> {
    let mut out = vec![0.0; 3 * mesh.num_triangles()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let local = match u.dofmap().kind() {
            SpaceKind::P0 => [u.coeffs()[t] * tri.area / 3.0; 3],
            SpaceKind::P1Dg => mat_vec3(&element_mass(tri.area), u.cell(t)),
        };
        out[3 * t..3 * t + 3].copy_from_slice(&local);
    }
    out
}

/// `(v, phi_j)` for a P1-DG function `v`.
pub fn mass_apply(mesh: &Mesh, v: &DgFunction) -> Vec<f64> {
    control_load(mesh, v)
}

/// `sum_e h_e^{-1} ||[[v]]||^2_e`.
pub fn jump_seminorm_sq(mesh: &Mesh, v: &DgFunction) -> f64 {
    mesh.edges()
        .iter()
        .map(|edge| {
            let mut diff = [0.0; 2];
            for (k, &vert) in edge.vertices.iter().enumerate() {
                diff[k] = v.cell(edge.tplus)[mesh.local_vertex(edge.tplus, vert).unwrap()];
                if let Some(tm) = edge.tminus {
                    diff[k] -= v.cell(tm)[mesh.local_vertex(tm, vert).unwrap()];
                }
            }
            // exact integral of the squared linear jump, times h_e / h_e
            (diff[0] * diff[0] + diff[0] * diff[1] + diff[1] * diff[1]) / 3.0
        })
        .sum()
}

/// `||v||_{1,h}^2 = 1/2 (||grad+_{h,0} v||^2 + ||grad-_{h,0} v||^2)`.
pub fn discrete_h1_seminorm_sq(mesh: &Mesh, v: &DgFunction, lifting: &LiftingSet) -> Result<f64> {
    let mut total = 0.0;
    for sign in Sign::ALL {
        for g in lifting.gradient(sign, v)? {
            total += 0.5 * g.l2_inner(mesh, &g);
        }
    }
    Ok(total)
}

/// `||grad v||^2` with the elementwise (broken) gradient.
pub fn broken_gradient_sq(mesh: &Mesh, v: &DgFunction) -> f64 {
    mesh.triangles()
        .iter()
        .enumerate()
        .map(|(t, tri)| {
            let c = v.cell(t);
            let g = (0..2).map(|i| (0..3).map(|k| c[k] * tri.grad_lambda[k][i]).sum::<f64>());
            tri.area * g.map(|x| x * x).sum::<f64>()
        })
        .sum()
}

/// `|||v|||` from its definition (discrete gradients plus weighted jumps).
pub fn energy_norm(mesh: &Mesh, v: &DgFunction, lifting: &LiftingSet, penalty: PenaltyConfig) -> Result<f64> {
    if !lifting.bc_zero() {
        return Err(DwdgError::LiftingNotBoundaryZero);
    }
    let sq = discrete_h1_seminorm_sq(mesh, v, lifting)? + penalty.gamma * jump_seminorm_sq(mesh, v);
    nonnegative_sqrt(sq, penalty)
}

fn nonnegative_sqrt(sq: f64, penalty: PenaltyConfig) -> Result<f64> {
    if sq < 0.0 {
        return Err(DwdgError::InvalidPenalty { gamma: penalty.gamma, value: sq });
    }
    Ok(sq.sqrt())
}

/// `|||exact - v_h|||` for an exact solution that is continuous and vanishes
/// on the boundary. Its discrete derivatives reduce to the elementwise L2
/// projection of the analytic gradient, and its jumps vanish.
pub fn error_energy(
    mesh: &Mesh,
    exact: &dyn SmoothField,
    v_h: &DgFunction,
    lifting: &LiftingSet,
    penalty: PenaltyConfig,
) -> Result<f64> {
    if !lifting.bc_zero() {
        return Err(DwdgError::LiftingNotBoundaryZero);
    }
    let projected = project_gradient(mesh, exact)?;
    let mut sq = 0.0;
    for sign in Sign::ALL {
        let grad = lifting.gradient(sign, v_h)?;
        for dir in Direction::ALL {
            let gh = &grad[dir.index()];
            for (t, tri) in mesh.triangles().iter().enumerate() {
                let p = &projected[dir.index()][3 * t..3 * t + 3];
                let d: Vec<f64> = p.iter().zip(gh.cell(t)).map(|(a, b)| a - b).collect();
                sq += 0.5 * quad_form(&element_mass(tri.area), &d, &d);
            }
        }
    }
    sq += penalty.gamma * jump_seminorm_sq(mesh, v_h);
    nonnegative_sqrt(sq, penalty)
}

/// Elementwise L2 projection of the analytic gradient onto P1-DG, per component.
pub fn project_gradient(mesh: &Mesh, exact: &dyn SmoothField) -> Result<[Vec<f64>; 2]> {
    let rule = triangle_rule(ERROR_DEGREE)?;
    let mut out = [vec![0.0; 3 * mesh.num_triangles()], vec![0.0; 3 * mesh.num_triangles()]];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let mut rhs = [[0.0; 3]; 2];
        for (x, l, w) in rule.mapped(mesh, t) {
            let g = exact.gradient(x);
            for i in 0..2 {
                for k in 0..3 {
                    rhs[i][k] += w * g[i] * l[k];
                }
            }
        }
        let minv = crate::dg_space::element_mass_inverse(tri.area);
        for i in 0..2 {
            out[i][3 * t..3 * t + 3].copy_from_slice(&mat_vec3(&minv, &rhs[i]));
        }
    }
    Ok(out)
}

/// `||exact - v_h||_{L2}` by degree-7 quadrature.
pub fn error_l2(mesh: &Mesh, exact: &dyn ScalarField, v_h: &DgFunction) -> Result<f64> {
    let rule = triangle_rule(ERROR_DEGREE)?;
    let sq: f64 = (0..mesh.num_triangles())
        .map(|t| rule.mapped(mesh, t).map(|(x, l, w)| w * (exact.value(x) - v_h.eval_bary(t, l)).powi(2)).sum::<f64>())
        .sum();
    Ok(sq.sqrt())
}

/// `||g||_{L2}` by degree-7 quadrature.
pub fn field_l2(mesh: &Mesh, g: &dyn ScalarField) -> Result<f64> {
    let rule = triangle_rule(ERROR_DEGREE)?;
    let sq: f64 = (0..mesh.num_triangles()).map(|t| rule.integrate(mesh, t, |x| g.value(x).powi(2))).sum();
    Ok(sq.sqrt())
}

pub fn p1_dofmap(mesh: &Mesh) -> DofMap {
    DofMap::new(mesh, SpaceKind::P1Dg)
}

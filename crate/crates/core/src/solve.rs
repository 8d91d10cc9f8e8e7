//! Sparse symmetric factorization and the DWDG Poisson solver.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::{LltError, LuError};
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};

use crate::dg_calculus::{build_lifting, LiftingSet};
use crate::dg_space::{DgFunction, DofMap};
use crate::error::{DwdgError, Result};
use crate::field::ScalarField;
use crate::forms::{assemble_ah, load_vector, p1_dofmap, PenaltyConfig};
use crate::mesh::Mesh;
use crate::quadrature::ERROR_DEGREE;
use crate::sparse::{norm2, SparseSymMatrix};

/// Relative residual bound every solve is verified against.
pub const RESIDUAL_TOL: f64 = 1e-10;

enum Backend {
    Cholesky(faer::sparse::linalg::solvers::Llt<usize, f64>),
    Lu(faer::sparse::linalg::solvers::Lu<usize, f64>),
}

/// Reusable factorization of a symmetric sparse matrix.
pub struct Factorization {
    matrix: SparseSymMatrix,
    backend: Backend,
}

impl std::fmt::Debug for Factorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Factorization")
            .field("dim", &self.matrix.dim())
            .field("cholesky", &self.is_cholesky())
            .finish()
    }
}

/// Sparse Cholesky; falls back to pivoted LU when a non-positive pivot shows
/// the matrix is indefinite.
pub fn factor(matrix: &SparseSymMatrix) -> Result<Factorization> {
    let n = matrix.dim();
    let triplets: Vec<_> = matrix.csr().iter().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
    let csc = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| DwdgError::Backend(format!("{e:?}")))?;
    let backend = match csc.sp_cholesky(Side::Lower) {
        Ok(llt) => Backend::Cholesky(llt),
        Err(LltError::Numeric(_)) => match csc.sp_lu() {
            Ok(lu) => Backend::Lu(lu),
            Err(LuError::SymbolicSingular { index }) => return Err(DwdgError::FactorizationBreakdown { pivot: index }),
            Err(LuError::Generic(e)) => return Err(DwdgError::Backend(format!("{e:?}"))),
        },
        Err(LltError::Generic(e)) => return Err(DwdgError::Backend(format!("{e:?}"))),
    };
    Ok(Factorization { matrix: matrix.clone(), backend })
}

impl Factorization {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &SparseSymMatrix {
        &self.matrix
    }

    pub fn is_cholesky(&self) -> bool {
        matches!(self.backend, Backend::Cholesky(_))
    }

    /// Solves `A x = b` and verifies `||A x - b|| <= 1e-10 ||b||`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        if b.len() != n {
            return Err(DwdgError::DimensionMismatch { expected: n, actual: b.len() });
        }
        let mut rhs = Mat::<f64>::from_fn(n, 1, |i, _| b[i]);
        match &self.backend {
            Backend::Cholesky(llt) => llt.solve_in_place(rhs.as_mut()),
            Backend::Lu(lu) => lu.solve_in_place(rhs.as_mut()),
        }
        let x: Vec<f64> = (0..n).map(|i| rhs[(i, 0)]).collect();
        let ax = self.matrix.mul_vec(&x)?;
        let residual = norm2(&ax.iter().zip(b).map(|(a, b)| a - b).collect::<Vec<_>>());
        let bound = RESIDUAL_TOL * norm2(b);
        if !(residual <= bound) && residual > f64::MIN_POSITIVE {
            return Err(DwdgError::ResidualTooLarge { residual, bound });
        }
        Ok(x)
    }
}

/// Assembled and factored DWDG operator for one mesh and penalty; realizes
/// the discrete solution operator (and its adjoint, the same matrix).
pub struct DiscretePoisson<'m> {
    mesh: &'m Mesh,
    lifting: LiftingSet,
    penalty: PenaltyConfig,
    factorization: Factorization,
}

impl<'m> DiscretePoisson<'m> {
    pub fn new(mesh: &'m Mesh, penalty: PenaltyConfig) -> Result<Self> {
        let lifting = build_lifting(mesh, true);
        let matrix = assemble_ah(mesh, &lifting, penalty)?;
        let factorization = factor(&matrix)?;
        Ok(DiscretePoisson { mesh, lifting, penalty, factorization })
    }

    pub fn mesh(&self) -> &'m Mesh {
        self.mesh
    }

    pub fn lifting(&self) -> &LiftingSet {
        &self.lifting
    }

    pub fn penalty(&self) -> PenaltyConfig {
        self.penalty
    }

    pub fn matrix(&self) -> &SparseSymMatrix {
        self.factorization.matrix()
    }

    pub fn factorization(&self) -> &Factorization {
        &self.factorization
    }

    pub fn dofmap(&self) -> DofMap {
        p1_dofmap(self.mesh)
    }

    /// Solves `a_h(y, v) = <rhs, v>` for a right-hand side given on the P1-DG basis.
    pub fn solve_rhs(&self, rhs: &[f64]) -> Result<DgFunction> {
        DgFunction::from_coeffs(self.dofmap(), self.factorization.solve(rhs)?)
    }

    /// Solves `a_h(y, v) = (f, v)` with `f` integrated by degree-7 quadrature.
    pub fn solve_field(&self, f: &dyn ScalarField) -> Result<DgFunction> {
        self.solve_rhs(&load_vector(self.mesh, f, ERROR_DEGREE)?)
    }
}

/// One-shot DWDG Poisson solve with homogeneous Dirichlet data.
pub fn poisson_solve(mesh: &Mesh, f: &dyn ScalarField, gamma: f64) -> Result<DgFunction> {
    DiscretePoisson::new(mesh, PenaltyConfig::new(gamma))?.solve_field(f)
}

//! Discrete optimality system and its primal-dual active set solution.
//!
//! The discrete KKT system couples
//!
//! ```text
//! a_h(y, v) = (u + f, v)            state
//! a_h(p, v) = (y - y_d, v)          adjoint
//! (p + beta u, w - u) >= 0          for all admissible w in U_ad,h^k
//! ```
//!
//! For piecewise constant controls the variational inequality decouples into
//! a clamp of the cell average of `-p / beta`; for piecewise linear controls
//! it decouples into one 3-variable box-constrained QP per triangle, which is
//! solved exactly by active-pattern enumeration. The outer loop alternates
//! state solve, adjoint solve and control update until the active sets
//! settle.

use crate::dg_space::{element_mass, mat_vec3, DgFunction, DofMap, SpaceKind};
use crate::error::{DwdgError, Result};
use crate::field::ScalarField;
use crate::forms::{control_load, load_vector, mass_apply};
use crate::mesh::Mesh;
use crate::quadrature::{triangle_rule, ERROR_DEGREE};
use crate::solve::DiscretePoisson;
use crate::sparse::norm2;

/// Box `[lower, upper]` with `None` marking an infinite bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    lower: Option<f64>,
    upper: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ActiveStatus {
    Lower,
    Free,
    Upper,
}

impl Bounds {
    pub fn new(lower: Option<f64>, upper: Option<f64>) -> Result<Self> {
        if let (Some(a), Some(b)) = (lower, upper) {
            if !(a < b) {
                return Err(DwdgError::InvalidConfig(format!("lower bound {a} must be below upper bound {b}")));
            }
        }
        if lower.is_some_and(f64::is_nan) || upper.is_some_and(f64::is_nan) {
            return Err(DwdgError::InvalidConfig("NaN bound".into()));
        }
        Ok(Bounds { lower, upper })
    }

    pub fn unbounded() -> Self {
        Bounds { lower: None, upper: None }
    }

    pub fn lower(&self) -> Option<f64> {
        self.lower
    }

    pub fn upper(&self) -> Option<f64> {
        self.upper
    }

    pub fn clamp(&self, x: f64) -> f64 {
        match (self.lower, self.upper) {
            (Some(a), _) if x <= a => a,
            (_, Some(b)) if x >= b => b,
            _ => x,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower.is_none_or(|a| x >= a) && self.upper.is_none_or(|b| x <= b)
    }

    pub fn status(&self, x: f64) -> ActiveStatus {
        match (self.lower, self.upper) {
            (Some(a), _) if x <= a => ActiveStatus::Lower,
            (_, Some(b)) if x >= b => ActiveStatus::Upper,
            _ => ActiveStatus::Free,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ControlDegree {
    P0,
    P1,
}

impl ControlDegree {
    pub fn from_k(k: usize) -> Result<Self> {
        match k {
            0 => Ok(ControlDegree::P0),
            1 => Ok(ControlDegree::P1),
            _ => Err(DwdgError::InvalidConfig(format!("control degree must be 0 or 1, got {k}"))),
        }
    }

    pub fn k(self) -> usize {
        match self {
            ControlDegree::P0 => 0,
            ControlDegree::P1 => 1,
        }
    }

    pub fn space(self) -> SpaceKind {
        match self {
            ControlDegree::P0 => SpaceKind::P0,
            ControlDegree::P1 => SpaceKind::P1Dg,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OcpConfig {
    pub beta: f64,
    pub bounds: Bounds,
    pub degree: ControlDegree,
    pub gamma: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for OcpConfig {
    fn default() -> Self {
        OcpConfig {
            beta: 1.0,
            bounds: Bounds::unbounded(),
            degree: ControlDegree::P0,
            gamma: 0.0,
            tol: 1e-10,
            max_iter: 100,
        }
    }
}

impl OcpConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(DwdgError::InvalidConfig(format!("beta must be positive, got {}", self.beta)));
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(DwdgError::InvalidConfig("tol must be positive and max_iter nonzero".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct OcpSolution {
    pub y: DgFunction,
    pub u: DgFunction,
    pub p: DgFunction,
    pub iterations: usize,
    pub kkt_residual: f64,
    pub converged: bool,
}

impl OcpSolution {
    /// Turns a non-converged run into [`DwdgError::NotConverged`].
    pub fn into_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(DwdgError::NotConverged { iterations: self.iterations, residual: self.kkt_residual })
        }
    }
}

/// Relative residuals of the three optimality conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktResidual {
    pub state: f64,
    pub adjoint: f64,
    pub control: f64,
}

impl KktResidual {
    pub fn max(&self) -> f64 {
        self.state.max(self.adjoint).max(self.control)
    }
}

/// Piecewise constant control: `u|_T = clamp(-avg_T(p) / beta)`.
pub fn control_update_p0(mesh: &Mesh, p: &DgFunction, beta: f64, bounds: Bounds) -> DgFunction {
    let coeffs = (0..mesh.num_triangles()).map(|t| bounds.clamp(-p.cell_average(t) / beta)).collect();
    DgFunction::from_coeffs(DofMap::new(mesh, SpaceKind::P0), coeffs).expect("one value per cell")
}

/// Piecewise linear control: per triangle, the minimizer of
/// `beta/2 u^T M_T u + u^T M_T p_T` over the nodal box.
pub fn control_update_p1(mesh: &Mesh, p: &DgFunction, beta: f64, bounds: Bounds) -> Result<DgFunction> {
    // M_T is a multiple of I + J; the common area factor drops out
    let shape = [[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]];
    let hessian = shape.map(|row| row.map(|v| beta * v));
    let mut coeffs = Vec::with_capacity(3 * mesh.num_triangles());
    for t in 0..mesh.num_triangles() {
        let linear = mat_vec3(&shape, p.cell(t));
        let u = solve_box_qp3(&hessian, &linear, bounds).ok_or(DwdgError::NoKktPattern { triangle: t })?;
        coeffs.extend_from_slice(&u);
    }
    DgFunction::from_coeffs(DofMap::new(mesh, SpaceKind::P1Dg), coeffs)
}

/// Exact minimizer of `1/2 u^T H u + c^T u` over a box in R^3 (H SPD) by
/// enumerating the 27 lower/free/upper patterns and keeping the one that
/// satisfies the KKT conditions.
pub fn solve_box_qp3(h: &[[f64; 3]; 3], c: &[f64; 3], bounds: Bounds) -> Option<[f64; 3]> {
    let scale = h.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()))
        * (1.0 + bounds.lower.unwrap_or(0.0).abs().max(bounds.upper.unwrap_or(0.0).abs()))
        + c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-11 * scale.max(1.0);
    let statuses = [ActiveStatus::Lower, ActiveStatus::Free, ActiveStatus::Upper];
    let mut best: Option<([f64; 3], f64)> = None;

    for code in 0..27 {
        let pattern = [code % 3, (code / 3) % 3, code / 9].map(|s| statuses[s]);
        let mut u = [0.0; 3];
        let mut feasible_pattern = true;
        for j in 0..3 {
            match pattern[j] {
                ActiveStatus::Lower => match bounds.lower {
                    Some(a) => u[j] = a,
                    None => feasible_pattern = false,
                },
                ActiveStatus::Upper => match bounds.upper {
                    Some(b) => u[j] = b,
                    None => feasible_pattern = false,
                },
                ActiveStatus::Free => {}
            }
        }
        if !feasible_pattern {
            continue;
        }
        let free: Vec<usize> = (0..3).filter(|&j| pattern[j] == ActiveStatus::Free).collect();
        if !free.is_empty() {
            // H_FF u_F = -c_F - H_FA u_A
            let mut a: Vec<Vec<f64>> = free.iter().map(|&r| free.iter().map(|&s| h[r][s]).collect()).collect();
            let mut rhs: Vec<f64> = free
                .iter()
                .map(|&r| -c[r] - (0..3).filter(|j| !free.contains(j)).map(|j| h[r][j] * u[j]).sum::<f64>())
                .collect();
            let x = solve_small(&mut a, &mut rhs)?;
            for (&j, v) in free.iter().zip(x) {
                u[j] = v;
            }
        }
        let grad = [0, 1, 2].map(|r| (0..3).map(|s| h[r][s] * u[s]).sum::<f64>() + c[r]);
        let mut violation = 0.0f64;
        for j in 0..3 {
            violation = violation.max(match pattern[j] {
                ActiveStatus::Free => {
                    let below = bounds.lower.map_or(0.0, |a| a - u[j]);
                    let above = bounds.upper.map_or(0.0, |b| u[j] - b);
                    below.max(above).max(0.0)
                }
                // multiplier signs: gradient >= 0 at a lower bound, <= 0 at an upper bound
                ActiveStatus::Lower => (-grad[j]).max(0.0),
                ActiveStatus::Upper => grad[j].max(0.0),
            });
        }
        if best.is_none_or(|(_, v)| violation < v) {
            best = Some((u, violation));
        }
    }

    let (u, violation) = best?;
    (violation <= tol).then(|| u.map(|x| bounds.clamp(x)))
}

fn solve_small(a: &mut [Vec<f64>], b: &mut [f64]) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// The discrete optimal control problem on one mesh and penalty.
pub struct OcpProblem<'a, 'm> {
    poisson: &'a DiscretePoisson<'m>,
    config: OcpConfig,
    desired_load: Vec<f64>,
    source_load: Vec<f64>,
    desired: &'a dyn ScalarField,
}

impl<'a, 'm> OcpProblem<'a, 'm> {
    pub fn new(poisson: &'a DiscretePoisson<'m>, config: OcpConfig, desired: &'a dyn ScalarField) -> Result<Self> {
        config.validate()?;
        if config.gamma != poisson.penalty().gamma {
            return Err(DwdgError::InvalidConfig(format!(
                "config gamma {} differs from the assembled penalty {}",
                config.gamma,
                poisson.penalty().gamma
            )));
        }
        let mesh = poisson.mesh();
        Ok(OcpProblem {
            poisson,
            config,
            desired_load: load_vector(mesh, desired, ERROR_DEGREE)?,
            source_load: vec![0.0; poisson.dofmap().len()],
            desired,
        })
    }

    /// Adds a fixed source `f` to the state equation: `-Lap y = u + f`.
    pub fn with_state_source(mut self, source: &dyn ScalarField) -> Result<Self> {
        self.source_load = load_vector(self.poisson.mesh(), source, ERROR_DEGREE)?;
        Ok(self)
    }

    pub fn config(&self) -> &OcpConfig {
        &self.config
    }

    pub fn mesh(&self) -> &'m Mesh {
        self.poisson.mesh()
    }

    pub fn poisson(&self) -> &DiscretePoisson<'m> {
        self.poisson
    }

    pub fn control_dofmap(&self) -> DofMap {
        DofMap::new(self.mesh(), self.config.degree.space())
    }

    fn state_rhs(&self, u: &DgFunction) -> Vec<f64> {
        control_load(self.mesh(), u).iter().zip(&self.source_load).map(|(a, b)| a + b).collect()
    }

    fn adjoint_rhs(&self, y: &DgFunction) -> Vec<f64> {
        mass_apply(self.mesh(), y).iter().zip(&self.desired_load).map(|(a, b)| a - b).collect()
    }

    pub fn solve_state(&self, u: &DgFunction) -> Result<DgFunction> {
        self.poisson.solve_rhs(&self.state_rhs(u))
    }

    pub fn solve_adjoint(&self, y: &DgFunction) -> Result<DgFunction> {
        self.poisson.solve_rhs(&self.adjoint_rhs(y))
    }

    /// Projection step of the variational inequality for the configured degree.
    pub fn control_update(&self, p: &DgFunction) -> Result<DgFunction> {
        let c = &self.config;
        match c.degree {
            ControlDegree::P0 => Ok(control_update_p0(self.mesh(), p, c.beta, c.bounds)),
            ControlDegree::P1 => control_update_p1(self.mesh(), p, c.beta, c.bounds),
        }
    }

    /// `J_h(y, u) = 1/2 ||y - y_d||^2 + beta/2 ||u||^2`.
    pub fn objective(&self, y: &DgFunction, u: &DgFunction) -> Result<f64> {
        let mesh = self.mesh();
        let rule = triangle_rule(ERROR_DEGREE)?;
        let misfit: f64 = (0..mesh.num_triangles())
            .map(|t| rule.mapped(mesh, t).map(|(x, l, w)| w * (y.eval_bary(t, l) - self.desired.value(x)).powi(2)).sum::<f64>())
            .sum();
        Ok(0.5 * misfit + 0.5 * self.config.beta * u.l2_inner(mesh, u))
    }

    pub fn kkt_residual(&self, y: &DgFunction, u: &DgFunction, p: &DgFunction) -> Result<KktResidual> {
        let a = self.poisson.matrix();
        let relative = |lhs: Vec<f64>, rhs: Vec<f64>| {
            let r: Vec<f64> = lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect();
            norm2(&r) / norm2(&rhs).max(1.0)
        };
        let state = relative(a.mul_vec(y.coeffs())?, self.state_rhs(u));
        let adjoint = relative(a.mul_vec(p.coeffs())?, self.adjoint_rhs(y));
        let update = self.control_update(p)?;
        let control = l2_distance(self.mesh(), u, &update) / u.l2_norm(self.mesh()).max(1.0);
        Ok(KktResidual { state, adjoint, control })
    }

    /// Primal-dual active set iteration started from `u = clamp(0)`.
    pub fn solve(&self) -> Result<OcpSolution> {
        let c = self.config;
        let mesh = self.mesh();
        let dofs = self.control_dofmap();
        let mut u = DgFunction::from_coeffs(dofs, vec![c.bounds.clamp(0.0); dofs.len()])?;
        let mut theta = 1.0;
        let mut prev_status: Option<Vec<ActiveStatus>> = None;
        let mut prev_step = f64::INFINITY;
        let mut stall = 0;
        let mut iterations = 0;
        let mut converged = false;

        while iterations < c.max_iter {
            iterations += 1;
            let y = self.solve_state(&u)?;
            let p = self.solve_adjoint(&y)?;
            let u_new = self.control_update(&p)?;
            let status: Vec<ActiveStatus> = u_new.coeffs().iter().map(|&x| c.bounds.status(x)).collect();
            let step = l2_distance(mesh, &u_new, &u);
            let settled = prev_status.as_ref() == Some(&status);
            if settled && step <= c.tol * u_new.l2_norm(mesh).max(1.0) {
                u = u_new;
                converged = true;
                break;
            }
            // halve the step when the active sets keep changing without progress
            if !settled && step >= prev_step {
                stall += 1;
                if stall > 5 {
                    theta *= 0.5;
                    stall = 0;
                }
            } else {
                stall = 0;
            }
            prev_step = step;
            prev_status = Some(status);
            let blended: Vec<f64> =
                u.coeffs().iter().zip(u_new.coeffs()).map(|(old, new)| old + theta * (new - old)).collect();
            u = DgFunction::from_coeffs(dofs, blended)?;
        }

        let y = self.solve_state(&u)?;
        let p = self.solve_adjoint(&y)?;
        let kkt_residual = self.kkt_residual(&y, &u, &p)?.max();
        Ok(OcpSolution { y, u, p, iterations, kkt_residual, converged })
    }
}

pub(crate) fn l2_distance(mesh: &Mesh, a: &DgFunction, b: &DgFunction) -> f64 {
    let d: Vec<f64> = a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| x - y).collect();
    DgFunction::from_coeffs(a.dofmap(), d).expect("same dofmap").l2_norm(mesh)
}

/// Discrete variational inequality residual: the most negative value of
/// `(p + beta u, w - u)` over unit feasible directions, per cell or node.
pub fn vi_residual(mesh: &Mesh, p: &DgFunction, u: &DgFunction, beta: f64, bounds: Bounds) -> f64 {
    let mut worst = 0.0f64;
    for (t, tri) in mesh.triangles().iter().enumerate() {
        // gradient of the reduced cost restricted to the cell's control dofs
        let grad: Vec<f64> = match u.dofmap().kind() {
            SpaceKind::P0 => vec![tri.area * (p.cell_average(t) + beta * u.coeffs()[t])],
            SpaceKind::P1Dg => {
                let m = element_mass(tri.area);
                let s: Vec<f64> = p.cell(t).iter().zip(u.cell(t)).map(|(pp, uu)| pp + beta * uu).collect();
                mat_vec3(&m, &s).to_vec()
            }
        };
        for (g, &x) in grad.iter().zip(u.cell(t)) {
            let can_increase = bounds.upper.is_none_or(|b| x < b);
            let can_decrease = bounds.lower.is_none_or(|a| x > a);
            if can_increase {
                worst = worst.max(-g);
            }
            if can_decrease {
                worst = worst.max(*g);
            }
        }
    }
    worst
}

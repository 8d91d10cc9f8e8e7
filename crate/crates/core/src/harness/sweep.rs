use rayon::prelude::*;

use super::examples::ExampleSpec;
use crate::error::{DwdgError, Result};
use crate::forms::{error_energy, error_l2, PenaltyConfig};
use crate::mesh::{build_crisscross, Mesh};
use crate::ocp::{ControlDegree, OcpConfig, OcpProblem, OcpSolution};
use crate::solve::DiscretePoisson;

/// Subdivisions giving `h = 1/2, ..., 1/128`.
pub const DEFAULT_LEVELS: [usize; 7] = [1, 2, 4, 8, 16, 32, 64];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub gammas: Vec<f64>,
    pub levels: Vec<usize>,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { gammas: vec![-1.0, 0.0, 5.0], levels: DEFAULT_LEVELS.to_vec(), tol: 1e-10, max_iter: 100 }
    }
}

impl SweepOptions {
    fn validate(&self) -> Result<()> {
        if self.gammas.is_empty() || self.levels.is_empty() {
            return Err(DwdgError::InvalidConfig("empty gamma or level list".into()));
        }
        if self.gammas.iter().any(|g| !g.is_finite()) {
            return Err(DwdgError::InvalidConfig("gamma must be finite".into()));
        }
        for w in self.levels.windows(2) {
            let ratio = w[1] / w[0].max(1);
            if w[1] <= w[0] || w[1] % w[0] != 0 || !ratio.is_power_of_two() {
                return Err(DwdgError::InvalidConfig(format!(
                    "levels must grow by powers of two, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if self.levels[0] == 0 {
            return Err(DwdgError::InvalidLevel);
        }
        Ok(())
    }
}

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord {
    pub example: u8,
    pub k: usize,
    pub gamma: f64,
    pub n: usize,
    pub h: f64,
    pub dof_state: usize,
    pub dof_control: usize,
    pub err_y_energy: f64,
    pub rate_y: Option<f64>,
    pub err_p_energy: f64,
    pub rate_p: Option<f64>,
    pub err_u_l2: f64,
    pub rate_u: Option<f64>,
    pub pdas_iters: usize,
    /// Not part of the emitted tables.
    pub converged: bool,
}

/// Errors of one discrete solve together with the solution itself.
#[derive(Debug, Clone)]
pub struct LevelResult {
    pub record: ConvergenceRecord,
    pub solution: OcpSolution,
}

fn solve_on(
    mesh: &Mesh,
    poisson: &DiscretePoisson<'_>,
    example: &ExampleSpec,
    degree: ControlDegree,
    opts: &SweepOptions,
) -> Result<LevelResult> {
    let gamma = poisson.penalty().gamma;
    let config = OcpConfig {
        beta: example.beta,
        bounds: example.bounds,
        degree,
        gamma,
        tol: opts.tol,
        max_iter: opts.max_iter,
    };
    let desired = example.desired();
    let mut problem = OcpProblem::new(poisson, config, &desired)?;
    if let Some(f) = example.state_source() {
        problem = problem.with_state_source(&f)?;
    }
    let solution = problem.solve()?;
    let penalty = PenaltyConfig::new(gamma);
    let record = ConvergenceRecord {
        example: example.id.number(),
        k: degree.k(),
        gamma,
        n: mesh.level(),
        h: mesh.h(),
        dof_state: solution.y.coeffs().len(),
        dof_control: solution.u.coeffs().len(),
        err_y_energy: error_energy(mesh, &example.state(), &solution.y, poisson.lifting(), penalty)?,
        rate_y: None,
        err_p_energy: error_energy(mesh, &example.adjoint(), &solution.p, poisson.lifting(), penalty)?,
        rate_p: None,
        err_u_l2: error_l2(mesh, &example.control(), &solution.u)?,
        rate_u: None,
        pdas_iters: solution.iterations,
        converged: solution.converged,
    };
    Ok(LevelResult { record, solution })
}

/// Single discrete solve with its errors against the exact solution.
pub fn solve_level(
    example: &ExampleSpec,
    degree: ControlDegree,
    gamma: f64,
    n: usize,
    opts: &SweepOptions,
) -> Result<LevelResult> {
    let wrap = |source| DwdgError::Level { gamma, level: n, source: Box::new(source) };
    let mesh = build_crisscross(n).map_err(wrap)?;
    let poisson = DiscretePoisson::new(&mesh, PenaltyConfig::new(gamma)).map_err(wrap)?;
    solve_on(&mesh, &poisson, example, degree, opts).map_err(wrap)
}

/// Refinement sweep for several `(example, degree)` cases. Each `(gamma, N)`
/// operator is assembled and factored once and shared by all cases; the
/// levels run in parallel. Records come back grouped by case, then gamma
/// (in the given order), then `N`, with rates filled in.
pub fn run_cases(cases: &[(ExampleSpec, ControlDegree)], opts: &SweepOptions) -> Result<Vec<ConvergenceRecord>> {
    opts.validate()?;
    let jobs: Vec<(usize, f64, usize)> = opts
        .gammas
        .iter()
        .enumerate()
        .flat_map(|(gi, &g)| opts.levels.iter().map(move |&n| (gi, g, n)))
        .collect();
    let per_job: Vec<Vec<ConvergenceRecord>> = jobs
        .par_iter()
        .map(|&(_, gamma, n)| {
            let wrap = |source| DwdgError::Level { gamma, level: n, source: Box::new(source) };
            let mesh = build_crisscross(n).map_err(wrap)?;
            let poisson = DiscretePoisson::new(&mesh, PenaltyConfig::new(gamma)).map_err(wrap)?;
            cases
                .iter()
                .map(|(ex, deg)| solve_on(&mesh, &poisson, ex, *deg, opts).map(|r| r.record).map_err(wrap))
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut records = Vec::with_capacity(jobs.len() * cases.len());
    for c in 0..cases.len() {
        for gi in 0..opts.gammas.len() {
            let mut group: Vec<ConvergenceRecord> = jobs
                .iter()
                .zip(&per_job)
                .filter(|((g, _, _), _)| *g == gi)
                .map(|(_, recs)| recs[c].clone())
                .collect();
            fill_rates(&mut group);
            records.extend(group);
        }
    }
    Ok(records)
}

/// Refinement sweep for one example and control degree.
pub fn run_sweep(example: &ExampleSpec, degree: ControlDegree, opts: &SweepOptions) -> Result<Vec<ConvergenceRecord>> {
    run_cases(&[(*example, degree)], opts)
}

fn fill_rates(group: &mut [ConvergenceRecord]) {
    for i in 1..group.len() {
        let (prev, cur) = (&group[i - 1], &group[i]);
        let scale = (prev.h / cur.h).ln();
        let rate = |a: f64, b: f64| (a / b).ln() / scale;
        let (ry, rp, ru) = (
            rate(prev.err_y_energy, cur.err_y_energy),
            rate(prev.err_p_energy, cur.err_p_energy),
            rate(prev.err_u_l2, cur.err_u_l2),
        );
        let cur = &mut group[i];
        cur.rate_y = Some(ry);
        cur.rate_p = Some(rp);
        cur.rate_u = Some(ru);
    }
}

//! Independent oracles and property checks shared by the integration tests
//! and the acceptance target.
#![allow(dead_code)]

use std::collections::HashMap;
use std::f64::consts::PI;

use dwdg_core::dg_calculus::{build_lifting, Direction, LiftingSet, Sign};
use dwdg_core::dg_space::{interpolate_nodal, DgFunction, DofMap, SpaceKind};
use dwdg_core::field::FnField;
use dwdg_core::forms::{
    assemble_ah, broken_gradient_sq, control_load, energy_norm, error_energy, error_l2, jump_seminorm_sq, PenaltyConfig,
};
use dwdg_core::harness::SinSin;
use dwdg_core::ocp::{solve_box_qp3, Bounds};
use dwdg_core::solve::{poisson_solve, DiscretePoisson};
use dwdg_core::sparse::dot;
use dwdg_core::{build_crisscross, Mesh, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_p1(mesh: &Mesh, rng: &mut ChaCha8Rng) -> DgFunction {
    let dofs = DofMap::new(mesh, SpaceKind::P1Dg);
    DgFunction::from_coeffs(dofs, (0..dofs.len()).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

pub fn rates(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Least-squares slope of `log2 e` against `-log2 h` for levels that double.
pub fn fitted_rate(errors: &[f64]) -> f64 {
    let xs: Vec<f64> = (0..errors.len()).map(|i| i as f64).collect();
    let ys: Vec<f64> = errors.iter().map(|e| -e.log2()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn tri_points(mesh: &Mesh, t: usize) -> [Point; 3] {
    mesh.triangles()[t].vertices.map(|v| mesh.vertices()[v])
}

/// Barycentric coordinates by a direct 2x2 solve.
fn bary(p: [Point; 3], x: Point) -> [f64; 3] {
    let (a, b, c) = (p[0], p[1], p[2]);
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    let l1 = ((x[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (x[1] - a[1])) / det;
    let l2 = ((b[0] - a[0]) * (x[1] - a[1]) - (x[0] - a[0]) * (b[1] - a[1])) / det;
    [1.0 - l1 - l2, l1, l2]
}

fn eval(mesh: &Mesh, v: &DgFunction, t: usize, x: Point) -> f64 {
    let l = bary(tri_points(mesh, t), x);
    v.coeffs()[3 * t..3 * t + 3].iter().zip(l).map(|(c, l)| c * l).sum()
}

/// Right-hand side of the lifting's defining identity, tested against the
/// P1-DG basis function `(t, k)`:
/// `-(v, d_i phi)_T + sum_{e in dT} <Q(v) n_T^(i), phi>_e`, by direct quadrature
/// with traces chosen from the geometry.
fn lifting_rhs(
    mesh: &Mesh,
    neighbors: &HashMap<(usize, usize), Vec<usize>>,
    v: &DgFunction,
    dir: usize,
    forward: bool,
    bc_zero: bool,
    t: usize,
    k: usize,
) -> f64 {
    let p = tri_points(mesh, t);
    let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]));
    // gradient of the k-th barycentric coordinate
    let (a, b) = (p[(k + 1) % 3], p[(k + 2) % 3]);
    let dphi = [(a[1] - b[1]) / (2.0 * area), (b[0] - a[0]) / (2.0 * area)];
    let phi = |x: Point| bary(p, x)[k];

    // element term with the edge-midpoint rule (exact for quadratics)
    let mut rhs = 0.0;
    for j in 0..3 {
        let m = [(p[j][0] + p[(j + 1) % 3][0]) / 2.0, (p[j][1] + p[(j + 1) % 3][1]) / 2.0];
        rhs -= area / 3.0 * eval(mesh, v, t, m) * dphi[dir];
    }

    // edge terms with 3-point Gauss
    let gauss = [(0.5 - 0.15f64.sqrt(), 5.0 / 18.0), (0.5, 8.0 / 18.0), (0.5 + 0.15f64.sqrt(), 5.0 / 18.0)];
    let verts = mesh.triangles()[t].vertices;
    for j in 0..3 {
        let (va, vb) = (verts[j], verts[(j + 1) % 3]);
        let (xa, xb) = (mesh.vertices()[va], mesh.vertices()[vb]);
        let len = ((xb[0] - xa[0]).powi(2) + (xb[1] - xa[1]).powi(2)).sqrt();
        // counter-clockwise vertices: the outward normal is the tangent turned clockwise
        let n = [(xb[1] - xa[1]) / len, -(xb[0] - xa[0]) / len];
        let key = (va.min(vb), va.max(vb));
        let other = neighbors[&key].iter().copied().find(|&s| s != t);
        for (s, w) in gauss {
            let x = [xa[0] + s * (xb[0] - xa[0]), xa[1] + s * (xb[1] - xa[1])];
            let own = eval(mesh, v, t, x);
            let q = match other {
                None if bc_zero => 0.0,
                None => own,
                Some(o) => {
                    let theirs = eval(mesh, v, o, x);
                    // the neighbor lies along +x_i when n_T^(i) > 0
                    let ni = n[dir];
                    if ni.abs() < 1e-12 {
                        0.5 * (own + theirs)
                    } else if (ni > 0.0) == forward {
                        theirs
                    } else {
                        own
                    }
                }
            };
            rhs += w * len * q * phi(x) * n[dir];
        }
    }
    rhs
}

/// Largest relative discrepancy between `(G v, phi)` from the sparse lifting
/// and the directly integrated defining identity, over random `v`, both
/// directions, both signs and every basis function.
pub fn lifting_identity_error(n: usize, samples: usize, bc_zero: bool, seed: u64) -> f64 {
    let mesh = build_crisscross(n).unwrap();
    let lifting = build_lifting(&mesh, bc_zero);
    let mut neighbors: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (t, tri) in mesh.triangles().iter().enumerate() {
        for j in 0..3 {
            let (a, b) = (tri.vertices[j], tri.vertices[(j + 1) % 3]);
            neighbors.entry((a.min(b), a.max(b))).or_default().push(t);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let v = random_p1(&mesh, &mut rng);
        for (dir, d) in Direction::ALL.iter().enumerate() {
            for sign in Sign::ALL {
                let g = lifting.apply(*d, sign, &v).unwrap();
                let lhs = control_load(&mesh, &g);
                let scale = lhs.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
                for t in 0..mesh.num_triangles() {
                    for k in 0..3 {
                        let rhs = lifting_rhs(&mesh, &neighbors, &v, dir, sign == Sign::Plus, bc_zero, t, k);
                        worst = worst.max((lhs[3 * t + k] - rhs).abs() / scale);
                    }
                }
            }
        }
    }
    worst
}

/// Max deviation of both one-sided gradients from the exact gradient, for
/// continuous piecewise linear functions: an affine function without the
/// boundary condition and a random hat combination vanishing on the boundary
/// with it.
pub fn gradient_reproduction_error(n: usize, seed: u64) -> f64 {
    let mesh = build_crisscross(n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b, c) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
    let affine = move |x: Point| a + b * x[0] + c * x[1];
    let mut worst = 0.0f64;
    let free = build_lifting(&mesh, false);
    let v = interpolate_nodal(&mesh, &affine);
    for sign in Sign::ALL {
        let g = free.gradient(sign, &v).unwrap();
        for (comp, exact) in g.iter().zip([b, c]) {
            for x in comp.coeffs() {
                worst = worst.max((x - exact).abs());
            }
        }
    }

    // continuous P1 function vanishing on the boundary: random vertex values
    let on_boundary = |x: Point| x[0].min(x[1]).min(1.0 - x[0]).min(1.0 - x[1]) < 1e-12;
    let values: Vec<f64> = mesh
        .vertices()
        .iter()
        .map(|&x| if on_boundary(x) { 0.0 } else { rng.random_range(-1.0..1.0) })
        .collect();
    let coeffs: Vec<f64> = mesh.triangles().iter().flat_map(|tri| tri.vertices.map(|v| values[v])).collect();
    let v = DgFunction::from_coeffs(DofMap::new(&mesh, SpaceKind::P1Dg), coeffs).unwrap();
    let zero_bc = build_lifting(&mesh, true);
    for sign in Sign::ALL {
        let g = zero_bc.gradient(sign, &v).unwrap();
        for (t, tri) in mesh.triangles().iter().enumerate() {
            for dir in 0..2 {
                let exact: f64 = (0..3).map(|k| values[tri.vertices[k]] * tri.grad_lambda[k][dir]).sum();
                for x in g[dir].cell(t) {
                    worst = worst.max((x - exact).abs());
                }
            }
        }
    }
    worst
}

/// `max |a_h(v,v) - |||v|||^2| / |||v|||^2` over random `v`.
pub fn norm_identity_error(n: usize, gamma: f64, samples: usize, seed: u64) -> f64 {
    let mesh = build_crisscross(n).unwrap();
    let lifting = build_lifting(&mesh, true);
    let penalty = PenaltyConfig::new(gamma);
    let a = assemble_ah(&mesh, &lifting, penalty).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let v = random_p1(&mesh, &mut rng);
            let quad = a.bilinear(v.coeffs(), v.coeffs()).unwrap();
            let norm = energy_norm(&mesh, &v, &lifting, penalty).unwrap().powi(2);
            (quad - norm).abs() / norm
        })
        .fold(0.0, f64::max)
}

/// Relative asymmetry of the assembled `a_h`.
pub fn ah_asymmetry(n: usize, gamma: f64) -> f64 {
    let mesh = build_crisscross(n).unwrap();
    let a = assemble_ah(&mesh, &build_lifting(&mesh, true), PenaltyConfig::new(gamma)).unwrap();
    a.csr().max_asymmetry() / a.csr().max_abs()
}

/// Largest `numerator(v) / |||v|||^2` over random `v` at `gamma`.
fn max_ratio(n: usize, gamma: f64, samples: usize, seed: u64, numerator: impl Fn(&Mesh, &DgFunction) -> f64) -> f64 {
    let mesh = build_crisscross(n).unwrap();
    let lifting = build_lifting(&mesh, true);
    let penalty = PenaltyConfig::new(gamma);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let v = random_p1(&mesh, &mut rng);
            numerator(&mesh, &v) / energy_norm(&mesh, &v, &lifting, penalty).unwrap().powi(2)
        })
        .fold(0.0, f64::max)
}

/// `max ||v||^2 / |||v|||^2` over random `v` (discrete Poincare).
pub fn poincare_ratio(n: usize, gamma: f64, samples: usize, seed: u64) -> f64 {
    max_ratio(n, gamma, samples, seed, |m, v| v.l2_norm(m).powi(2))
}

/// `max ||grad_h v||^2 / |||v|||^2` over random `v` (broken gradient control).
pub fn broken_gradient_ratio(n: usize, gamma: f64, samples: usize, seed: u64) -> f64 {
    max_ratio(n, gamma, samples, seed, broken_gradient_sq)
}

/// `max gamma sum h_e^-1 ||[v]||^2 / |||v|||^2`; at most 1 when the jump bound holds.
pub fn jump_ratio(n: usize, gamma: f64, samples: usize, seed: u64) -> f64 {
    max_ratio(n, gamma, samples, seed, |m, v| gamma * jump_seminorm_sq(m, v))
}

/// Projected gradient descent on `1/2 u^T H u + c^T u` over a box.
pub fn projected_gradient(h: &[[f64; 3]; 3], c: &[f64; 3], bounds: Bounds, step: f64, iters: usize) -> [f64; 3] {
    let mut u = [0.0f64; 3].map(|x| bounds.clamp(x));
    for _ in 0..iters {
        let g: Vec<f64> = (0..3).map(|r| (0..3).map(|s| h[r][s] * u[s]).sum::<f64>() + c[r]).collect();
        let next = [0, 1, 2].map(|j| bounds.clamp(u[j] - step * g[j]));
        if next == u {
            break;
        }
        u = next;
    }
    u
}

/// Max deviation between the pattern-enumeration QP and projected gradient
/// on random element problems with the P1 control structure.
pub fn qp_oracle_error(instances: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for i in 0..instances {
        let beta = rng.random_range(0.1..10.0);
        let bounds = match i % 4 {
            0 => Bounds::new(Some(3.0), Some(15.0)).unwrap(),
            1 => Bounds::new(Some(-1.0), None).unwrap(),
            2 => Bounds::new(None, Some(0.5)).unwrap(),
            _ => {
                let lo = rng.random_range(-5.0..5.0);
                Bounds::new(Some(lo), Some(lo + rng.random_range(0.1..5.0))).unwrap()
            }
        };
        let p = [0; 3].map(|_| rng.random_range(-20.0 * beta..5.0 * beta));
        let shape = [[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]];
        let h = shape.map(|row| row.map(|v| beta * v));
        let c = [0, 1, 2].map(|r| (0..3).map(|s| shape[r][s] * p[s]).sum::<f64>());
        let exact = solve_box_qp3(&h, &c, bounds).unwrap();
        // eigenvalues of beta (I + J) are beta, beta, 4 beta
        let oracle = projected_gradient(&h, &c, bounds, 1.0 / (4.0 * beta), 100_000);
        for j in 0..3 {
            worst = worst.max((exact[j] - oracle[j]).abs() / (1.0 + oracle[j].abs()));
        }
    }
    worst
}

/// L2 and energy errors of the Poisson solve with exact solution `sin sin`.
pub fn poisson_errors(levels: &[usize], gamma: f64) -> (Vec<f64>, Vec<f64>) {
    let exact = SinSin { scale: 1.0 };
    let f = move |x: Point| 2.0 * PI * PI * (PI * x[0]).sin() * (PI * x[1]).sin();
    let mut l2 = Vec::new();
    let mut energy = Vec::new();
    for &n in levels {
        let mesh = build_crisscross(n).unwrap();
        let y = poisson_solve(&mesh, &f, gamma).unwrap();
        let lifting = build_lifting(&mesh, true);
        l2.push(error_l2(&mesh, &exact, &y).unwrap());
        energy.push(error_energy(&mesh, &exact, &y, &lifting, PenaltyConfig::new(gamma)).unwrap());
    }
    (l2, energy)
}

/// `max |(A f, g) - (f, A g)| / max(|.|)` for the discrete solution operator.
pub fn self_adjoint_error(n: usize, gamma: f64, samples: usize, seed: u64) -> f64 {
    let mesh = build_crisscross(n).unwrap();
    let op = DiscretePoisson::new(&mesh, PenaltyConfig::new(gamma)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let f = random_p1(&mesh, &mut rng);
            let g = random_p1(&mesh, &mut rng);
            let af = op.solve_rhs(&control_load(&mesh, &f)).unwrap();
            let ag = op.solve_rhs(&control_load(&mesh, &g)).unwrap();
            let lhs = dot(&control_load(&mesh, &af), g.coeffs());
            let rhs = dot(f.coeffs(), &control_load(&mesh, &ag));
            (lhs - rhs).abs() / lhs.abs().max(rhs.abs())
        })
        .fold(0.0, f64::max)
}

/// Convenience smooth field from closures.
pub fn field<V, G>(value: V, gradient: G) -> FnField<V, G>
where
    V: Fn(Point) -> f64 + Sync,
    G: Fn(Point) -> [f64; 2] + Sync,
{
    FnField { value, gradient }
}

pub fn lifting_of(mesh: &Mesh) -> LiftingSet {
    build_lifting(mesh, true)
}

mod common;

use std::f64::consts::PI;

use common::*;
use dwdg_core::dg_calculus::build_lifting;
use dwdg_core::dg_space::{interpolate_nodal, project_cellavg};
use dwdg_core::forms::{assemble_ah, error_energy, error_l2, load_vector, PenaltyConfig};
use dwdg_core::harness::{ExampleId, ExampleSpec, SinSin};
use dwdg_core::quadrature::ERROR_DEGREE;
use dwdg_core::solve::poisson_solve;
use dwdg_core::{build_crisscross, Point};

const LEVELS: [usize; 4] = [4, 8, 16, 32];

#[test]
fn cell_average_projection_is_first_order() {
    let u = ExampleSpec::new(ExampleId::One).control();
    let errors: Vec<f64> = LEVELS
        .iter()
        .map(|&n| {
            let mesh = build_crisscross(n).unwrap();
            error_l2(&mesh, &u, &project_cellavg(&mesh, &u)).unwrap()
        })
        .collect();
    assert!((fitted_rate(&errors) - 1.0).abs() <= 0.05, "{errors:?}");
    for r in rates(&errors) {
        assert!((r - 1.0).abs() <= 0.05, "{errors:?}");
    }
}

#[test]
fn nodal_interpolation_is_second_order_in_l2_and_first_in_energy() {
    let y = SinSin { scale: 1.0 };
    let mut l2 = Vec::new();
    let mut energy = Vec::new();
    for n in LEVELS {
        let mesh = build_crisscross(n).unwrap();
        let iy = interpolate_nodal(&mesh, &y);
        l2.push(error_l2(&mesh, &y, &iy).unwrap());
        energy.push(error_energy(&mesh, &y, &iy, &build_lifting(&mesh, true), PenaltyConfig::new(0.0)).unwrap());
    }
    assert!((fitted_rate(&l2) - 2.0).abs() <= 0.1, "{l2:?}");
    assert!((fitted_rate(&energy) - 1.0).abs() <= 0.1, "{energy:?}");
}

#[test]
fn poisson_rates() {
    for gamma in [-1.0, 0.0, 5.0] {
        let (l2, energy) = poisson_errors(&LEVELS, gamma);
        assert!((fitted_rate(&l2) - 2.0).abs() <= 0.1, "gamma {gamma}: {l2:?}");
        assert!((fitted_rate(&energy) - 1.0).abs() <= 0.1, "gamma {gamma}: {energy:?}");
    }
}

#[test]
fn solution_operator_is_uniformly_bounded() {
    let f = |x: Point| (3.0 * x[0]).cos() + x[1];
    let ratio = |n: usize| {
        let mesh = build_crisscross(n).unwrap();
        let y = poisson_solve(&mesh, &f, 0.0).unwrap();
        y.l2_norm(&mesh) / dwdg_core::forms::field_l2(&mesh, &f).unwrap()
    };
    let base = ratio(2);
    for n in [4, 8, 16, 32] {
        assert!(ratio(n) <= 2.0 * base);
    }
}

#[test]
fn lifting_matches_direct_quadrature_of_its_definition() {
    assert!(lifting_identity_error(2, 20, true, 11) <= 1e-10);
    assert!(lifting_identity_error(2, 5, false, 12) <= 1e-10);
    assert!(lifting_identity_error(3, 3, true, 13) <= 1e-10);
}

#[test]
fn continuous_linears_are_differentiated_exactly() {
    for n in [1, 2, 5] {
        assert!(gradient_reproduction_error(n, n as u64) <= 1e-12);
    }
}

#[test]
fn discrete_poincare_and_broken_gradient_ratios_stay_bounded() {
    let coarse = poincare_ratio(2, 0.0, 50, 1);
    let fine = poincare_ratio(16, 0.0, 50, 2);
    assert!(fine <= 2.0 * coarse, "{coarse} {fine}");
    let coarse = broken_gradient_ratio(2, 5.0, 50, 3);
    let fine = broken_gradient_ratio(16, 5.0, 50, 4);
    assert!(fine <= 2.0 * coarse, "{coarse} {fine}");
}

#[test]
fn jump_seminorm_is_controlled_by_the_energy_norm() {
    for n in [1, 2, 4, 8] {
        assert!(jump_ratio(n, 5.0, 50, n as u64) <= 1.0);
    }
}

#[test]
fn ah_is_positive_definite_without_penalty_on_the_coarsest_mesh() {
    let mesh = build_crisscross(1).unwrap();
    let a = assemble_ah(&mesh, &build_lifting(&mesh, true), PenaltyConfig::new(0.0)).unwrap();
    let dense = a.csr().to_dense();
    let m = nalgebra::DMatrix::from_fn(12, 12, |i, j| dense[i][j]);
    let eig = nalgebra::SymmetricEigen::new(m);
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(min > 1e-8, "smallest eigenvalue {min}");
}

#[test]
fn negative_penalty_keeps_the_energy_positive() {
    for n in [1, 2, 4, 8] {
        let mesh = build_crisscross(n).unwrap();
        let a = assemble_ah(&mesh, &build_lifting(&mesh, true), PenaltyConfig::new(-1.0)).unwrap();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(n as u64);
        for _ in 0..50 {
            let v = random_p1(&mesh, &mut rng);
            assert!(a.bilinear(v.coeffs(), v.coeffs()).unwrap() > 0.0);
        }
    }
}

/// Degree-9 oracle: Duffy map of the square onto the triangle with a 10x10
/// Gauss-Legendre tensor rule.
fn duffy_load(mesh: &dwdg_core::Mesh, g: impl Fn(Point) -> f64) -> Vec<f64> {
    let (nodes, weights) = gauss_legendre_10();
    let mut out = vec![0.0; 3 * mesh.num_triangles()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let p = tri.vertices.map(|v| mesh.vertices()[v]);
        for (a, wa) in nodes.iter().zip(&weights) {
            for (b, wb) in nodes.iter().zip(&weights) {
                // (a, b) in [0,1]^2 -> barycentric (1 - a, a (1 - b), a b), Jacobian a
                let l = [1.0 - a, a * (1.0 - b), a * b];
                let x = [0, 1].map(|d| l[0] * p[0][d] + l[1] * p[1][d] + l[2] * p[2][d]);
                let w = wa * wb * a * 2.0 * tri.area;
                for k in 0..3 {
                    out[3 * t + k] += w * g(x) * l[k];
                }
            }
        }
    }
    out
}

fn gauss_legendre_10() -> (Vec<f64>, Vec<f64>) {
    let x = [
        0.148_874_338_981_631_2,
        0.433_395_394_129_247_2,
        0.679_409_568_299_024_4,
        0.865_063_366_688_984_5,
        0.973_906_528_517_171_7,
    ];
    let w = [
        0.295_524_224_714_752_9,
        0.269_266_719_309_996_4,
        0.219_086_362_515_982,
        0.149_451_349_150_580_6,
        0.066_671_344_308_688_1,
    ];
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for (xi, wi) in x.iter().zip(w) {
        for s in [-1.0, 1.0] {
            nodes.push(0.5 * (1.0 + s * xi));
            weights.push(0.5 * wi);
        }
    }
    (nodes, weights)
}

#[test]
fn load_vector_matches_high_order_oracle() {
    let mesh = build_crisscross(2).unwrap();
    let yd = ExampleSpec::new(ExampleId::One).desired();
    let oracle = duffy_load(&mesh, |x| (1.0 + 4.0 * PI.powi(4)) * (PI * x[0]).sin() * (PI * x[1]).sin());
    let scale = oracle.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let max_diff = |degree| {
        let ours = load_vector(&mesh, &yd, degree).unwrap();
        ours.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale
    };
    // the default error-integral degree is limited by the rule's truncation error at h = 1/4
    assert!(max_diff(ERROR_DEGREE) <= 1e-7);
    assert!(max_diff(12) <= 1e-10);
}

#[test]
fn reflection_across_the_diagonal_is_a_symmetry() {
    let mesh = build_crisscross(4).unwrap();
    let f = |x: Point| x[0] * (1.0 - x[0]) * (1.0 + 3.0 * x[1]) + x[1].powi(2);
    let g = |x: Point| f([x[1], x[0]]);
    let yf = poisson_solve(&mesh, &f, 0.0).unwrap();
    let yg = poisson_solve(&mesh, &g, 0.0).unwrap();
    let mut worst = 0.0f64;
    for t in 0..mesh.num_triangles() {
        let c = mesh.centroid(t);
        let s = (0..mesh.num_triangles())
            .find(|&s| {
                let d = mesh.centroid(s);
                (d[0] - c[1]).abs() < 1e-12 && (d[1] - c[0]).abs() < 1e-12
            })
            .unwrap();
        for x in mesh.triangle_points(t) {
            let a = yf.evaluate(&mesh, t, x).unwrap();
            let b = yg.evaluate(&mesh, s, [x[1], x[0]]).unwrap();
            worst = worst.max((a - b).abs());
        }
    }
    assert!(worst <= 1e-12, "{worst}");
}

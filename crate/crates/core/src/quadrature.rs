//! Symmetric positive-weight quadrature on the reference triangle and the
//! reference edge.
//!
//! Triangle rules are stored in barycentric coordinates with weights summing
//! to the reference area 1/2; edge rules use the parameter `t in [0, 1]` with
//! weights summing to 1. A request for a degree without a dedicated rule
//! returns the next more accurate one.

use crate::error::{DwdgError, Result};
use crate::mesh::{Mesh, Point};

/// Degree used for mass and load assembly with polynomial integrands.
pub const ASSEMBLY_DEGREE: usize = 4;
/// Degree used for error integrals against transcendental exact solutions.
pub const ERROR_DEGREE: usize = 7;
/// Highest degree any rule is generated for.
pub const MAX_DEGREE: usize = 40;

#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

#[derive(Debug, Clone)]
pub struct EdgeRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

// Orbit generators: (weight fraction of the unit total, barycentric generator).
enum Orbit {
    Centroid(f64),
    Symmetric(f64, f64),
    Asymmetric(f64, f64, f64),
}

fn expand(orbits: &[Orbit], degree: usize) -> TriangleRule {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for orbit in orbits {
        match *orbit {
            Orbit::Centroid(w) => {
                points.push([1.0 / 3.0; 3]);
                weights.push(w);
            }
            Orbit::Symmetric(w, a) => {
                let b = 1.0 - 2.0 * a;
                for p in [[a, a, b], [a, b, a], [b, a, a]] {
                    points.push(p);
                    weights.push(w);
                }
            }
            Orbit::Asymmetric(w, a, b) => {
                let c = 1.0 - a - b;
                for p in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
                    points.push(p);
                    weights.push(w);
                }
            }
        }
    }
    let weights = weights.into_iter().map(|w| 0.5 * w).collect();
    TriangleRule { points, weights, degree }
}

/// `n`-point Gauss-Legendre nodes and weights on `[-1, 1]` by Newton's
/// method on the Legendre recurrence.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            // p1 = P_n(x), p0 = P_{n-1}(x)
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Collapsed (Duffy) tensor Gauss rule: exact to `2n - 2` on the triangle.
fn collapsed_rule(degree: usize) -> TriangleRule {
    // the Jacobian of the collapse raises the degree in the radial variable by one
    let n = (degree + 3) / 2;
    let (x, w) = gauss_legendre(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (xa, wa) in x.iter().zip(&w) {
        let a = 0.5 * (xa + 1.0);
        for (xb, wb) in x.iter().zip(&w) {
            let b = 0.5 * (xb + 1.0);
            points.push([1.0 - a, a * (1.0 - b), a * b]);
            weights.push(0.25 * wa * wb * a);
        }
    }
    TriangleRule { points, weights, degree: 2 * n - 2 }
}

/// Triangle rule exact to at least `degree` (1 through [`MAX_DEGREE`]).
/// Degrees up to 8 use symmetric rules; higher ones a collapsed Gauss rule.
pub fn triangle_rule(degree: usize) -> Result<TriangleRule> {
    use Orbit::*;
    let rule = match degree {
        1 => expand(&[Centroid(1.0)], 1),
        2 => expand(&[Symmetric(1.0 / 3.0, 1.0 / 6.0)], 2),
        // Dunavant's 6-point rule
        3 | 4 => expand(
            &[
                Symmetric(0.223_381_589_678_011, 0.445_948_490_915_965),
                Symmetric(0.109_951_743_655_322, 0.091_576_213_509_771),
            ],
            4,
        ),
        5 => expand(
            &[
                Centroid(0.225),
                Symmetric(0.132_394_152_788_506, 0.470_142_064_105_115),
                Symmetric(0.125_939_180_544_827, 0.101_286_507_323_456),
            ],
            5,
        ),
        6 => expand(
            &[
                Symmetric(0.116_786_275_726_379, 0.249_286_745_170_910),
                Symmetric(0.050_844_906_370_207, 0.063_089_014_491_502),
                Asymmetric(0.082_851_075_618_374, 0.053_145_049_844_817, 0.310_352_451_033_784),
            ],
            6,
        ),
        // the 13-point degree-7 rule has a negative weight; use the 16-point degree-8 rule
        7 | 8 => expand(
            &[
                Centroid(0.144_315_607_677_787),
                Symmetric(0.095_091_634_267_285, 0.459_292_588_292_723),
                Symmetric(0.103_217_370_534_718, 0.170_569_307_751_760),
                Symmetric(0.032_458_497_623_198, 0.050_547_228_317_031),
                Asymmetric(0.027_230_314_174_435, 0.008_394_777_409_958, 0.263_112_829_634_638),
            ],
            8,
        ),
        9..=MAX_DEGREE => collapsed_rule(degree),
        _ => return Err(DwdgError::UnsupportedQuadrature { kind: "triangle", degree }),
    };
    Ok(rule)
}

/// Gauss-Legendre rule on `[0, 1]` exact to at least `degree` (1 through [`MAX_DEGREE`]).
pub fn edge_rule(degree: usize) -> Result<EdgeRule> {
    let generated;
    let (nodes, weights): (&[f64], &[f64]) = match degree {
        0 | 1 => (&[0.0], &[2.0]),
        2 | 3 => (&[-0.577_350_269_189_625_8, 0.577_350_269_189_625_8], &[1.0, 1.0]),
        4 | 5 => (
            &[-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4],
            &[5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0],
        ),
        6 | 7 => (
            &[-0.861_136_311_594_052_6, -0.339_981_043_584_856_3, 0.339_981_043_584_856_3, 0.861_136_311_594_052_6],
            &[0.347_854_845_137_453_8, 0.652_145_154_862_546_1, 0.652_145_154_862_546_1, 0.347_854_845_137_453_8],
        ),
        8 | 9 => (
            &[-0.906_179_845_938_664, -0.538_469_310_105_683_1, 0.0, 0.538_469_310_105_683_1, 0.906_179_845_938_664],
            &[
                0.236_926_885_056_189_1,
                0.478_628_670_499_366_5,
                0.568_888_888_888_888_9,
                0.478_628_670_499_366_5,
                0.236_926_885_056_189_1,
            ],
        ),
        10..=MAX_DEGREE => {
            generated = gauss_legendre(degree / 2 + 1);
            (&generated.0, &generated.1)
        }
        _ => return Err(DwdgError::UnsupportedQuadrature { kind: "edge", degree }),
    };
    Ok(EdgeRule {
        points: nodes.iter().map(|x| 0.5 * (x + 1.0)).collect(),
        weights: weights.iter().map(|w| 0.5 * w).collect(),
        degree: 2 * nodes.len() - 1,
    })
}

impl TriangleRule {
    /// Physical quadrature points and weights on triangle `t`.
    pub fn mapped<'a>(&'a self, mesh: &'a Mesh, t: usize) -> impl Iterator<Item = (Point, [f64; 3], f64)> + 'a {
        let p = mesh.triangle_points(t);
        let scale = 2.0 * mesh.triangles()[t].area;
        self.points.iter().zip(&self.weights).map(move |(l, w)| {
            let x = [
                l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0],
                l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1],
            ];
            (x, *l, w * scale)
        })
    }

    pub fn integrate(&self, mesh: &Mesh, t: usize, f: impl Fn(Point) -> f64) -> f64 {
        self.mapped(mesh, t).map(|(x, _, w)| w * f(x)).sum()
    }
}

impl EdgeRule {
    /// Physical points and weights on edge `e`, parametrized from its first vertex.
    pub fn mapped<'a>(&'a self, mesh: &'a Mesh, e: usize) -> impl Iterator<Item = (Point, f64)> + 'a {
        let [a, b] = mesh.edge_points(e);
        let len = mesh.edges()[e].length;
        self.points
            .iter()
            .zip(&self.weights)
            .map(move |(t, w)| ([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])], w * len))
    }

    pub fn integrate(&self, mesh: &Mesh, e: usize, f: impl Fn(Point) -> f64) -> f64 {
        self.mapped(mesh, e).map(|(x, w)| w * f(x)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_crisscross;
    use std::f64::consts::PI;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    // integral of x^a y^b over the reference triangle (0,0),(1,0),(0,1)
    fn reference_monomial(a: u32, b: u32) -> f64 {
        factorial(a) * factorial(b) / factorial(a + b + 2)
    }

    #[test]
    fn triangle_rules_are_exact_up_to_their_degree() {
        for requested in 1..=16 {
            let rule = triangle_rule(requested).unwrap();
            assert!(rule.degree >= requested);
            assert!((rule.weights.iter().sum::<f64>() - 0.5).abs() < 1e-14);
            assert!(rule.weights.iter().all(|&w| w > 0.0));
            for a in 0..=rule.degree as u32 {
                for b in 0..=(rule.degree as u32 - a) {
                    // reference triangle: x = lambda_1, y = lambda_2
                    let q: f64 = rule
                        .points
                        .iter()
                        .zip(&rule.weights)
                        .map(|(l, w)| w * l[1].powi(a as i32) * l[2].powi(b as i32))
                        .sum();
                    let exact = reference_monomial(a, b);
                    assert!((q - exact).abs() <= 1e-12 * exact, "degree {} x^{a} y^{b}", rule.degree);
                }
            }
        }
        assert!(triangle_rule(MAX_DEGREE + 1).is_err());
        assert!(triangle_rule(0).is_err());
    }

    #[test]
    fn edge_rules_are_exact_up_to_their_degree() {
        for requested in 1..=20 {
            let rule = edge_rule(requested).unwrap();
            assert!(rule.degree >= requested);
            assert!((rule.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            for k in 0..=rule.degree as i32 {
                let q: f64 = rule.points.iter().zip(&rule.weights).map(|(t, w)| w * t.powi(k)).sum();
                assert!((q - 1.0 / (k as f64 + 1.0)).abs() < 1e-12);
            }
        }
        assert!(edge_rule(MAX_DEGREE + 1).is_err());
    }

    #[test]
    fn degree_two_integrates_xy() {
        let rule = triangle_rule(2).unwrap();
        let q: f64 = rule.points.iter().zip(&rule.weights).map(|(l, w)| w * l[1] * l[2]).sum();
        assert!((q - 1.0 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn constant_on_physical_triangle_gives_area() {
        let mesh = build_crisscross(3).unwrap();
        let rule = triangle_rule(1).unwrap();
        for t in 0..mesh.num_triangles() {
            assert!((rule.integrate(&mesh, t, |_| 1.0) - mesh.triangles()[t].area).abs() < 1e-15);
        }
    }

    #[test]
    fn sine_product_over_the_square() {
        let f = |x: Point| (PI * x[0]).sin() * (PI * x[1]).sin();
        let exact = 4.0 / (PI * PI);
        for degree in [5, 7] {
            let rule = triangle_rule(degree).unwrap();
            for n in [4, 8] {
                let mesh = build_crisscross(n).unwrap();
                let q: f64 = (0..mesh.num_triangles()).map(|t| rule.integrate(&mesh, t, f)).sum();
                assert!((q - exact).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn edge_rule_examples() {
        let mesh = build_crisscross(2).unwrap();
        let rule = edge_rule(1).unwrap();
        for e in 0..mesh.edges().len() {
            assert!((rule.integrate(&mesh, e, |_| 1.0) - mesh.edges()[e].length).abs() < 1e-15);
        }
        let cubic = edge_rule(3).unwrap();
        let q: f64 = cubic.points.iter().zip(&cubic.weights).map(|(t, w)| w * t.powi(3)).sum();
        assert!((q - 0.25).abs() < 1e-15);
        // Gauss error constants: 4.4e-4 for three points, 3.5e-8 for five
        for (degree, tol) in [(5, 5e-4), (9, 4e-8)] {
            let rule = edge_rule(degree).unwrap();
            let q: f64 = rule.points.iter().zip(&rule.weights).map(|(t, w)| w * (PI * t).sin()).sum();
            assert!((q - 2.0 / PI).abs() < tol);
        }
    }
}

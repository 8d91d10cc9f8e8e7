use std::f64::consts::PI;

use crate::error::{DwdgError, Result};
use crate::field::{ScalarField, SmoothField};
use crate::mesh::Point;
use crate::ocp::Bounds;

/// `scale * sin(pi x1) sin(pi x2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinSin {
    pub scale: f64,
}

impl SinSin {
    pub fn laplacian(&self, x: Point) -> f64 {
        -2.0 * PI * PI * self.value(x)
    }
}

impl ScalarField for SinSin {
    fn value(&self, x: Point) -> f64 {
        self.scale * (PI * x[0]).sin() * (PI * x[1]).sin()
    }
}

impl SmoothField for SinSin {
    fn gradient(&self, x: Point) -> [f64; 2] {
        let (s0, c0) = (PI * x[0]).sin_cos();
        let (s1, c1) = (PI * x[1]).sin_cos();
        [self.scale * PI * c0 * s1, self.scale * PI * s0 * c1]
    }
}

/// A [`SinSin`] clamped into a box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClampedSinSin {
    pub inner: SinSin,
    pub bounds: Bounds,
}

impl ScalarField for ClampedSinSin {
    fn value(&self, x: Point) -> f64 {
        self.bounds.clamp(self.inner.value(x))
    }
}

/// `g - clamp(g)` for `g = scale sin sin`: the state source that keeps
/// `sin sin` the exact state once the control is clamped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceGap(pub ClampedSinSin);

impl ScalarField for SourceGap {
    fn value(&self, x: Point) -> f64 {
        let g = self.0.inner.value(x);
        g - self.0.bounds.clamp(g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExampleId {
    One,
    Two,
}

impl ExampleId {
    pub fn number(self) -> u8 {
        match self {
            ExampleId::One => 1,
            ExampleId::Two => 2,
        }
    }

    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(ExampleId::One),
            2 => Ok(ExampleId::Two),
            _ => Err(DwdgError::InvalidConfig(format!("unknown example {n}"))),
        }
    }
}

/// Exact solution data of a model problem on the unit square.
///
/// Both examples share `y = sin sin`, `p = -2 pi^2 sin sin` and
/// `y_d = (1 + 4 pi^4) sin sin`. Example 1 is unconstrained with
/// `u = 2 pi^2 sin sin`; Example 2 clamps that control into `[3, 15]` and
/// adds the clamped-off part as a state source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExampleSpec {
    pub id: ExampleId,
    pub beta: f64,
    pub bounds: Bounds,
}

impl ExampleSpec {
    pub fn new(id: ExampleId) -> Self {
        let bounds = match id {
            ExampleId::One => Bounds::unbounded(),
            ExampleId::Two => Bounds::new(Some(3.0), Some(15.0)).expect("valid box"),
        };
        ExampleSpec { id, beta: 1.0, bounds }
    }

    pub fn state(&self) -> SinSin {
        SinSin { scale: 1.0 }
    }

    pub fn adjoint(&self) -> SinSin {
        SinSin { scale: -2.0 * PI * PI }
    }

    pub fn desired(&self) -> SinSin {
        SinSin { scale: 1.0 + 4.0 * PI.powi(4) }
    }

    pub fn control(&self) -> ClampedSinSin {
        ClampedSinSin { inner: SinSin { scale: 2.0 * PI * PI }, bounds: self.bounds }
    }

    /// Extra right-hand side of the state equation; `None` for Example 1.
    pub fn state_source(&self) -> Option<SourceGap> {
        match self.id {
            ExampleId::One => None,
            ExampleId::Two => Some(SourceGap(self.control())),
        }
    }

    /// Checks the continuous optimality system on a point grid:
    /// `-Lap y = u + f`, `-Lap p = y - y_d` and `u = clamp(-p / beta)`.
    pub fn self_check(&self) -> Result<()> {
        let (y, p, yd, u) = (self.state(), self.adjoint(), self.desired(), self.control());
        let f = self.state_source();
        let mut worst = 0.0f64;
        for i in 0..=20 {
            for j in 0..=20 {
                let x = [i as f64 / 20.0, j as f64 / 20.0];
                let source = f.map_or(0.0, |f| f.value(x));
                let state = -y.laplacian(x) - u.value(x) - source;
                let adjoint = -p.laplacian(x) - (y.value(x) - yd.value(x));
                let vi = u.value(x) - self.bounds.clamp(-p.value(x) / self.beta);
                worst = worst.max(state.abs().max(adjoint.abs()).max(vi.abs()) / (1.0 + yd.value(x).abs()));
            }
        }
        if worst > 1e-10 {
            return Err(DwdgError::InvalidConfig(format!(
                "example {} fails its optimality self-check by {worst:e}",
                self.id.number()
            )));
        }
        Ok(())
    }
}

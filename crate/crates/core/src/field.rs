use crate::mesh::Point;

/// A real-valued function on the unit square.
pub trait ScalarField: Sync {
    fn value(&self, x: Point) -> f64;
}

/// A field with a known analytic gradient.
pub trait SmoothField: ScalarField {
    fn gradient(&self, x: Point) -> [f64; 2];
}

impl<F: Fn(Point) -> f64 + Sync> ScalarField for F {
    fn value(&self, x: Point) -> f64 {
        self(x)
    }
}

/// A value/gradient pair of closures.
pub struct FnField<V, G> {
    pub value: V,
    pub gradient: G,
}

impl<V, G> ScalarField for FnField<V, G>
where
    V: Fn(Point) -> f64 + Sync,
    G: Fn(Point) -> [f64; 2] + Sync,
{
    fn value(&self, x: Point) -> f64 {
        (self.value)(x)
    }
}

impl<V, G> SmoothField for FnField<V, G>
where
    V: Fn(Point) -> f64 + Sync,
    G: Fn(Point) -> [f64; 2] + Sync,
{
    fn gradient(&self, x: Point) -> [f64; 2] {
        (self.gradient)(x)
    }
}

/// The zero function.
pub struct Zero;

impl ScalarField for Zero {
    fn value(&self, _: Point) -> f64 {
        0.0
    }
}

impl SmoothField for Zero {
    fn gradient(&self, _: Point) -> [f64; 2] {
        [0.0; 2]
    }
}

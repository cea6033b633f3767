//! Small test fixtures: the quadratic fold `(x, y) ↦ (a x + y, x² + b)`, a
//! minimal non-invertible map with zero or two preimages on either side of the
//! line `y = b`, and linear maps `z ↦ A z`.

use super::{PlanarMap, PreimageSet, Preimages};
use crate::error::Result;
use crate::geometry::{Mat2, Point2, Rect};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticFold {
    pub a: f64,
    pub b: f64,
}

impl QuadraticFold {
    pub const fn new(a: f64, b: f64) -> Self {
        Self { a, b }
    }
}

impl Default for QuadraticFold {
    fn default() -> Self {
        Self::new(0.5, -2.0)
    }
}

impl PlanarMap for QuadraticFold {
    fn eval(&self, z: Point2) -> Point2 {
        Point2::new(self.a * z.x + z.y, z.x * z.x + self.b)
    }

    fn jacobian(&self, z: Point2) -> Mat2 {
        Mat2::new(self.a, 1.0, 2.0 * z.x, 0.0)
    }
}

impl Preimages for QuadraticFold {
    fn preimages(&self, target: Point2, _window: Rect) -> Result<PreimageSet> {
        let s = target.y - self.b;
        let points = if s > 0.0 {
            let r = s.sqrt();
            vec![Point2::new(-r, target.x + self.a * r), Point2::new(r, target.x - self.a * r)]
        } else if s == 0.0 {
            vec![Point2::new(0.0, target.x)]
        } else {
            vec![]
        };
        Ok(PreimageSet { points, complete: true })
    }
}

/// `z ↦ A z` with `A` invertible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearMap {
    pub a: Mat2,
}

impl LinearMap {
    pub const fn new(a: Mat2) -> Self {
        Self { a }
    }
}

impl PlanarMap for LinearMap {
    fn eval(&self, z: Point2) -> Point2 {
        self.a.apply(z)
    }

    fn jacobian(&self, _z: Point2) -> Mat2 {
        self.a
    }
}

impl Preimages for LinearMap {
    fn preimages(&self, target: Point2, _window: Rect) -> Result<PreimageSet> {
        let points = self.a.solve(target).into_iter().collect();
        Ok(PreimageSet { points, complete: true })
    }

    fn local_inverse(&self, target: Point2, _near: Point2) -> Option<Point2> {
        self.a.solve(target)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_on_each_side() {
        let t = QuadraticFold::default();
        let w = Rect::new(-10.0, 10.0, -10.0, 10.0);
        let above = t.preimages(Point2::new(0.3, -1.0), w).unwrap();
        assert_eq!(above.len(), 2);
        for z in &above.points {
            assert!((t.eval(*z) - Point2::new(0.3, -1.0)).norm() < 1e-14);
        }
        assert_eq!(t.preimages(Point2::new(0.3, -3.0), w).unwrap().len(), 0);
    }
}

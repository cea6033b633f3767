//! Planar points, 2×2 matrices and axis-aligned windows.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the planar cross product.
    #[inline]
    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    #[inline]
    pub fn dist(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn normalized(self) -> Point2 {
        let n = self.norm();
        Point2::new(self.x / n, self.y / n)
    }

    pub fn lerp(self, other: Point2, t: f64) -> Point2 {
        self + (other - self) * t
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Point2 {
    fn add_assign(&mut self, rhs: Point2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

/// Eigenvalues of a real 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Eigenvalues {
    /// Real pair, ordered by increasing modulus.
    Real(f64, f64),
    /// Complex-conjugate pair `re ± i·im` with `im > 0`.
    Complex { re: f64, im: f64 },
}

impl Eigenvalues {
    /// Spectral moduli, smaller first.
    pub fn moduli(&self) -> (f64, f64) {
        match *self {
            Eigenvalues::Real(a, b) => (a.abs(), b.abs()),
            Eigenvalues::Complex { re, im } => {
                let m = re.hypot(im);
                (m, m)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2::new(1.0, 0.0, 0.0, 1.0);

    #[inline]
    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Self { a11, a12, a21, a22 }
    }

    pub const fn diag(a: f64, b: f64) -> Self {
        Self::new(a, 0.0, 0.0, b)
    }

    /// Matrix with the given vectors as columns.
    pub fn from_columns(c1: Point2, c2: Point2) -> Self {
        Self::new(c1.x, c2.x, c1.y, c2.y)
    }

    #[inline]
    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    #[inline]
    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn is_finite(&self) -> bool {
        self.a11.is_finite() && self.a12.is_finite() && self.a21.is_finite() && self.a22.is_finite()
    }

    #[inline]
    pub fn apply(&self, v: Point2) -> Point2 {
        Point2::new(self.a11 * v.x + self.a12 * v.y, self.a21 * v.x + self.a22 * v.y)
    }

    #[inline]
    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        Mat2::new(
            self.a11 * rhs.a11 + self.a12 * rhs.a21,
            self.a11 * rhs.a12 + self.a12 * rhs.a22,
            self.a21 * rhs.a11 + self.a22 * rhs.a21,
            self.a21 * rhs.a12 + self.a22 * rhs.a22,
        )
    }

    pub fn sub_identity(&self) -> Mat2 {
        Mat2::new(self.a11 - 1.0, self.a12, self.a21, self.a22 - 1.0)
    }

    /// Solves `self · v = rhs`; `None` when the matrix is numerically singular.
    pub fn solve(&self, rhs: Point2) -> Option<Point2> {
        let det = self.det();
        let scale = self.max_abs().powi(2);
        if !det.is_finite() || det.abs() <= 1e-300 || det.abs() <= scale * 1e-15 {
            return None;
        }
        Some(Point2::new(
            (self.a22 * rhs.x - self.a12 * rhs.y) / det,
            (self.a11 * rhs.y - self.a21 * rhs.x) / det,
        ))
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let c1 = self.solve(Point2::new(1.0, 0.0))?;
        let c2 = self.solve(Point2::new(0.0, 1.0))?;
        Some(Mat2::from_columns(c1, c2))
    }

    pub fn max_abs(&self) -> f64 {
        self.a11.abs().max(self.a12.abs()).max(self.a21.abs()).max(self.a22.abs())
    }

    pub fn eigenvalues(&self) -> Eigenvalues {
        eigenvalues_from_trace_det(self.trace(), self.det())
    }

    /// Unit eigenvector for a real eigenvalue, sign-normalised so that the
    /// first nonzero component is positive.
    pub fn eigenvector(&self, ev: f64) -> Point2 {
        // Rows of (A - ev I) are orthogonal to the eigenvector; pick the larger row.
        let r1 = Point2::new(self.a11 - ev, self.a12);
        let r2 = Point2::new(self.a21, self.a22 - ev);
        let row = if r1.norm() >= r2.norm() { r1 } else { r2 };
        let v = if row.norm() == 0.0 {
            Point2::new(1.0, 0.0)
        } else {
            Point2::new(-row.y, row.x).normalized()
        };
        canonical_sign(v)
    }
}

/// Flips `v` so that its first component with magnitude above rounding is positive.
pub fn canonical_sign(v: Point2) -> Point2 {
    let first = if v.x.abs() > 1e-14 { v.x } else { v.y };
    if first < 0.0 {
        -v
    } else {
        v
    }
}

/// Roots of `z² − τ z + δ = 0`.
pub fn eigenvalues_from_trace_det(trace: f64, det: f64) -> Eigenvalues {
    let disc = trace * trace - 4.0 * det;
    if disc >= 0.0 {
        let sq = disc.sqrt();
        // Avoid cancellation: compute the larger-magnitude root first.
        let big = if trace >= 0.0 { 0.5 * (trace + sq) } else { 0.5 * (trace - sq) };
        let small = if big != 0.0 { det / big } else { 0.0 };
        if small.abs() <= big.abs() {
            Eigenvalues::Real(small, big)
        } else {
            Eigenvalues::Real(big, small)
        }
    } else {
        Eigenvalues::Complex {
            re: 0.5 * trace,
            im: 0.5 * (-disc).sqrt(),
        }
    }
}

/// Axis-aligned rectangle `[xmin, xmax] × [ymin, ymax]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Rect {
    pub const fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Self {
        Self { xmin, xmax, ymin, ymax }
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.xmin && p.x <= self.xmax && p.y >= self.ymin && p.y <= self.ymax
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Point2 {
        Point2::new(0.5 * (self.xmin + self.xmax), 0.5 * (self.ymin + self.ymax))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_of_diag() {
        let m = Mat2::diag(0.8, 1.25);
        match m.eigenvalues() {
            Eigenvalues::Real(a, b) => assert!((a - 0.8).abs() < 1e-15 && (b - 1.25).abs() < 1e-15),
            e => panic!("{e:?}"),
        }
        assert_eq!(m.eigenvector(0.8), Point2::new(1.0, 0.0));
        assert_eq!(m.eigenvector(1.25), Point2::new(0.0, 1.0));
    }

    #[test]
    fn eigenvector_residual() {
        let m = Mat2::new(0.0, 1.0, -0.8, 2.4);
        if let Eigenvalues::Real(a, b) = m.eigenvalues() {
            for ev in [a, b] {
                let v = m.eigenvector(ev);
                assert!((m.apply(v) - v * ev).norm() < 1e-14);
                assert!((v.norm() - 1.0).abs() < 1e-15);
            }
        } else {
            panic!("expected real spectrum");
        }
    }

    #[test]
    fn solve_and_inverse() {
        let m = Mat2::new(2.0, 1.0, 1.0, 3.0);
        let v = m.solve(Point2::new(3.0, 4.0)).unwrap();
        assert!((m.apply(v) - Point2::new(3.0, 4.0)).norm() < 1e-15);
        let inv = m.inverse().unwrap();
        let id = m.mul(&inv);
        assert!((id.a11 - 1.0).abs() < 1e-15 && id.a12.abs() < 1e-15);
        assert!(Mat2::new(1.0, 2.0, 2.0, 4.0).solve(Point2::new(1.0, 1.0)).is_none());
    }

    #[test]
    fn complex_pair() {
        match eigenvalues_from_trace_det(0.0, 1.0) {
            Eigenvalues::Complex { re, im } => {
                assert_eq!(re, 0.0);
                assert!((im - 1.0).abs() < 1e-15);
            }
            _ => panic!(),
        }
    }
}

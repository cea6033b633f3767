//! Generalised Hénon map `(x, y) ↦ (y, α − βx − y² + Rxy + Sy³)`.

use super::{PlanarMap, PreimageSet, Preimages};
use crate::error::{Error, Result};
use crate::geometry::{Mat2, Point2, Rect};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HenonMapParams {
    pub alpha: f64,
    pub beta: f64,
    pub r: f64,
    pub s: f64,
}

impl HenonMapParams {
    pub const fn new(alpha: f64, beta: f64, r: f64, s: f64) -> Self {
        Self { alpha, beta, r, s }
    }

    pub fn validate(&self) -> Result<()> {
        if [self.alpha, self.beta, self.r, self.s].iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidParams("Henon parameters must be finite".into()))
        }
    }

    /// Real fixed points; they lie on the diagonal with `y` a root of
    /// `S y³ + (R − 1) y² − (β + 1) y + α = 0`.
    pub fn fixed_points(&self) -> Vec<Point2> {
        let roots = real_roots_cubic(self.s, self.r - 1.0, -(self.beta + 1.0), self.alpha);
        roots.into_iter().map(|y| Point2::new(y, y)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// det Df = +1 at the neutral saddle.
    Preserving,
    /// det Df = −1 at the neutral saddle.
    Reversing,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Preserving => 1.0,
            Orientation::Reversing => -1.0,
        }
    }
}

/// The `α` for which a fixed point with `det Df = ±1` exists at `y = (β ∓ 1)/R`.
pub fn neutral_saddle_alpha(r: f64, s: f64, beta: f64, orientation: Orientation) -> f64 {
    match orientation {
        Orientation::Preserving => {
            let b = beta - 1.0;
            (-s * b.powi(3) + b * r * (b + 2.0 * r)) / r.powi(3)
        }
        Orientation::Reversing => {
            let b = beta + 1.0;
            (-s * b.powi(3) + r * b * b) / r.powi(3)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HenonMap {
    pub params: HenonMapParams,
}

impl HenonMap {
    pub fn new(params: HenonMapParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { params })
    }

    /// Unique preimage; fails on the line `x' = β/R` where the map folds.
    pub fn inverse(&self, z: Point2) -> Result<Point2> {
        let p = &self.params;
        let den = p.r * z.x - p.beta;
        if den.abs() <= 1e-14 * p.beta.abs().max(1.0) {
            return Err(Error::NonInvertiblePoint { x: z.x, y: z.y });
        }
        let x = (z.y - p.alpha + z.x * z.x - p.s * z.x.powi(3)) / den;
        Ok(Point2::new(x, z.x))
    }
}

impl PlanarMap for HenonMap {
    #[inline]
    fn eval(&self, z: Point2) -> Point2 {
        let p = &self.params;
        Point2::new(z.y, p.alpha - p.beta * z.x - z.y * z.y + p.r * z.x * z.y + p.s * z.y.powi(3))
    }

    #[inline]
    fn jacobian(&self, z: Point2) -> Mat2 {
        let p = &self.params;
        Mat2::new(0.0, 1.0, -p.beta + p.r * z.y, -2.0 * z.y + p.r * z.x + 3.0 * p.s * z.y * z.y)
    }
}

impl Preimages for HenonMap {
    fn preimages(&self, target: Point2, _window: Rect) -> Result<PreimageSet> {
        let z = self.inverse(target)?;
        Ok(PreimageSet { points: vec![z], complete: true })
    }

    fn local_inverse(&self, target: Point2, _near: Point2) -> Option<Point2> {
        self.inverse(target).ok()
    }
}

/// Real roots of `a t³ + b t² + c t + d`, ascending; degrades to lower degree
/// when leading coefficients vanish.
pub fn real_roots_cubic(a: f64, b: f64, c: f64, d: f64) -> Vec<f64> {
    let mut roots = if a == 0.0 {
        real_roots_quadratic(b, c, d)
    } else {
        let poly = |t: f64| ((a * t + b) * t + c) * t + d;
        let dpoly = |t: f64| (3.0 * a * t + 2.0 * b) * t + c;
        // Bracket using the critical points, then bisection-polished Newton.
        let mut crit = real_roots_quadratic(3.0 * a, 2.0 * b, c);
        crit.sort_by(f64::total_cmp);
        let bound = 1.0 + [b, c, d].iter().map(|v| (v / a).abs()).fold(0.0, f64::max);
        let mut knots = vec![-bound];
        knots.extend(crit.iter().copied().filter(|t| t.abs() < bound));
        knots.push(bound);
        let mut out = Vec::new();
        for w in knots.windows(2) {
            let (mut lo, mut hi) = (w[0], w[1]);
            let (flo, fhi) = (poly(lo), poly(hi));
            if flo == 0.0 {
                out.push(lo);
                continue;
            }
            if flo * fhi > 0.0 {
                continue;
            }
            let mut t = 0.5 * (lo + hi);
            for _ in 0..200 {
                let ft = poly(t);
                if ft == 0.0 {
                    break;
                }
                if (ft < 0.0) == (flo < 0.0) {
                    lo = t;
                } else {
                    hi = t;
                }
                let nt = t - ft / dpoly(t);
                t = if nt > lo && nt < hi { nt } else { 0.5 * (lo + hi) };
                if hi - lo <= 4.0 * f64::EPSILON * t.abs().max(1e-300) {
                    break;
                }
            }
            out.push(t);
        }
        if poly(bound) == 0.0 {
            out.push(bound);
        }
        out
    };
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * x.abs().max(1.0));
    roots
}

/// Real roots of `a t² + b t + c`, ascending.
pub fn real_roots_quadratic(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a == 0.0 {
        return if b == 0.0 { vec![] } else { vec![-c / b] };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return vec![];
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let mut r = if q == 0.0 { vec![0.0, 0.0] } else { vec![q / a, c / q] };
    r.sort_by(f64::total_cmp);
    if disc == 0.0 {
        r.truncate(1);
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn neutral_alpha_examples() {
        let a = neutral_saddle_alpha(0.1170465574, 0.3, 0.8055, Orientation::Preserving);
        assert!((a - 0.8145).abs() < 5e-4, "{a}");
        assert_eq!(neutral_saddle_alpha(1.0, 0.0, 1.0, Orientation::Preserving), 0.0);
        assert_eq!(neutral_saddle_alpha(1.0, 0.0, 0.0, Orientation::Preserving), -1.0);
    }

    #[test]
    fn neutral_alpha_gives_unit_determinant() {
        for (r, s, beta) in [(0.3, 0.2, 0.7), (-0.5, 0.1, 1.4), (0.117, 0.3, 0.8055)] {
            for o in [Orientation::Preserving, Orientation::Reversing] {
                let alpha = neutral_saddle_alpha(r, s, beta, o);
                let m = HenonMap::new(HenonMapParams::new(alpha, beta, r, s)).unwrap();
                let y = (beta - o.sign()) / r;
                let z = Point2::new(y, y);
                assert!((m.eval(z) - z).norm() < 1e-9 * y.abs().max(1.0).powi(3));
                assert!((m.jacobian(z).det() - o.sign()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fixed_points_solve_cubic() {
        let p = HenonMapParams::new(-0.4, 0.8, 0.06, -0.125);
        let m = HenonMap::new(p).unwrap();
        let fps = p.fixed_points();
        assert!(!fps.is_empty());
        for z in fps {
            assert!((m.eval(z) - z).norm() < 1e-10);
        }
    }

    #[test]
    fn non_invertible_line() {
        let m = HenonMap::new(HenonMapParams::new(0.4, 0.8, 0.08, -0.125)).unwrap();
        assert!(matches!(m.inverse(Point2::new(10.0, 1.0)), Err(Error::NonInvertiblePoint { .. })));
    }

    #[test]
    fn cubic_roots_known() {
        let r = real_roots_cubic(1.0, -6.0, 11.0, -6.0);
        assert_eq!(r.len(), 3);
        for (a, b) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(real_roots_cubic(1.0, 0.0, 1.0, 0.0), vec![0.0]);
    }

    proptest! {
        #[test]
        fn inverse_round_trip(x in -3.0f64..3.0, y in -3.0f64..3.0, alpha in -1.0f64..1.0, r in -0.5f64..0.5, s in -0.3f64..0.3) {
            let m = HenonMap::new(HenonMapParams::new(alpha, 0.8, r, s)).unwrap();
            let z = Point2::new(x, y);
            let w = m.eval(z);
            prop_assume!((r * w.x - 0.8).abs() > 1e-2);
            let back = m.inverse(w).unwrap();
            prop_assert!((back - z).norm() <= 1e-12 * (1.0 + w.norm().powi(3)) / (r * w.x - 0.8).abs());
        }

        #[test]
        fn determinant_closed_form(x in -3.0f64..3.0, y in -3.0f64..3.0, r in -0.5f64..0.5, s in -0.3f64..0.3) {
            let m = HenonMap::new(HenonMapParams::new(0.1, 0.8, r, s)).unwrap();
            let d = m.jacobian(Point2::new(x, y)).det();
            prop_assert!((d - (0.8 - r * y)).abs() < 1e-14);
        }
    }
}

//! Concrete planar map families and the traits the numerical routines consume.

pub mod fixture;
pub mod grht;
pub mod henon;

pub use fixture::{LinearMap, QuadraticFold};
pub use grht::{blend_weight, blend_weight_derivative, GrhtMap, GrhtMapParams, Region};
pub use henon::{neutral_saddle_alpha, HenonMap, HenonMapParams, Orientation};

use crate::error::Result;
use crate::geometry::{Mat2, Point2, Rect};

/// A smooth (or C¹ piecewise) map of the plane with an analytic Jacobian.
pub trait PlanarMap: Sync {
    fn eval(&self, z: Point2) -> Point2;
    fn jacobian(&self, z: Point2) -> Mat2;

    /// `n`-fold forward iterate.
    fn iterate(&self, z: Point2, n: usize) -> Point2 {
        (0..n).fold(z, |acc, _| self.eval(acc))
    }

    /// Points `z, f(z), …, f^{n-1}(z)`.
    fn orbit(&self, z: Point2, n: usize) -> Vec<Point2> {
        let mut out = Vec::with_capacity(n);
        let mut w = z;
        for _ in 0..n {
            out.push(w);
            w = self.eval(w);
        }
        out
    }
}

impl<M: PlanarMap + ?Sized> PlanarMap for &M {
    fn eval(&self, z: Point2) -> Point2 {
        (**self).eval(z)
    }
    fn jacobian(&self, z: Point2) -> Mat2 {
        (**self).jacobian(z)
    }
}

/// Result of a preimage search.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PreimageSet {
    pub points: Vec<Point2>,
    /// True only when the search is exhaustive within the query window.
    pub complete: bool,
}

impl PreimageSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Maps that can enumerate the preimages of a point.
pub trait Preimages: PlanarMap {
    fn preimages(&self, target: Point2, window: Rect) -> Result<PreimageSet>;

    /// The preimage of `target` on the local inverse branch through `near`.
    fn local_inverse(&self, target: Point2, near: Point2) -> Option<Point2> {
        newton_preimage(self, target, near, 40)
    }
}

/// Maximum forward residual accepted for a reported preimage.
pub const PREIMAGE_TOL: f64 = 1e-10;

/// Appends `p` unless a point within `tol` is already present.
pub(crate) fn push_unique(points: &mut Vec<Point2>, p: Point2, tol: f64) {
    if !points.iter().any(|q| q.dist(p) <= tol) {
        points.push(p);
    }
}

/// Undamped-to-damped Newton solve of `f(z) = target` from `seed`.
///
/// Returns the root when the forward residual drops below `PREIMAGE_TOL`.
pub(crate) fn newton_preimage<M: PlanarMap + ?Sized>(
    map: &M,
    target: Point2,
    seed: Point2,
    max_iter: usize,
) -> Option<Point2> {
    let mut z = seed;
    let mut res = (map.eval(z) - target).norm();
    for _ in 0..max_iter {
        if !res.is_finite() {
            return None;
        }
        if res <= 0.1 * PREIMAGE_TOL {
            break;
        }
        let step = map.jacobian(z).solve(target - map.eval(z))?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..12 {
            let cand = z + step * t;
            let r = (map.eval(cand) - target).norm();
            if r.is_finite() && r < res {
                z = cand;
                res = r;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (res <= PREIMAGE_TOL).then_some(z)
}

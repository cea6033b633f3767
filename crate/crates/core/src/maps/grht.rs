//! The piecewise C¹ map family built from a linear saddle map `U0`, a global
//! excursion map `U1` and a cubic smoothstep blend between them.

use super::{newton_preimage, push_unique, PlanarMap, PreimageSet, Preimages, PREIMAGE_TOL};
use crate::error::{Error, Result};
use crate::geometry::{Mat2, Point2, Rect};

/// Parameters of the piecewise family.
///
/// `b1` is the second-component resonance coefficient; the constructors keep
/// `b1 = -a1` but it may be set independently.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrhtMapParams {
    pub lambda: f64,
    pub sigma: f64,
    pub c2: f64,
    pub d1: f64,
    pub d5: f64,
    pub a1: f64,
    pub b1: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub mu4: f64,
}

impl GrhtMapParams {
    /// Family with the given eigenvalues and global coefficients, no resonance
    /// terms and zero unfolding.
    pub const fn new(lambda: f64, sigma: f64, c2: f64, d1: f64, d5: f64) -> Self {
        Self {
            lambda,
            sigma,
            c2,
            d1,
            d5,
            a1: 0.0,
            b1: 0.0,
            mu1: 0.0,
            mu2: 0.0,
            mu3: 0.0,
            mu4: 0.0,
        }
    }

    /// λ = 4/5, σ = 5/4, d1 = 1.
    pub const fn param1() -> Self {
        Self::new(0.8, 1.25, -0.5, 1.0, 1.0)
    }

    /// λ = −4/5, σ = −5/4, d1 = 1.
    pub const fn param2() -> Self {
        Self::new(-0.8, -1.25, -0.5, 1.0, 1.0)
    }

    /// λ = 4/5, σ = −5/4, d1 = 1 (orientation-reversing, λσ = −1).
    pub const fn param3() -> Self {
        Self::new(0.8, -1.25, -0.5, 1.0, 1.0)
    }

    /// λ = −4/5, σ = 5/4, d1 = −1.
    pub const fn param4() -> Self {
        Self::new(-0.8, 1.25, -0.5, -1.0, 1.0)
    }

    /// `param1` with resonance coefficient a1 = 0.2, b1 = −0.2.
    pub const fn toy_unfold() -> Self {
        Self::param1().with_a1(0.2)
    }

    /// The non-invertibility example: λ = 3/5, σ = 5/3, c2 = −0.8, d5 = 0.8.
    pub const fn critical_example() -> Self {
        Self::new(0.6, 5.0 / 3.0, -0.8, 1.0, 0.8)
    }

    /// Sets `a1` and the default `b1 = -a1`.
    pub const fn with_a1(mut self, a1: f64) -> Self {
        self.a1 = a1;
        self.b1 = -a1;
        self
    }

    pub const fn with_mu(mut self, mu: [f64; 4]) -> Self {
        self.mu1 = mu[0];
        self.mu2 = mu[1];
        self.mu3 = mu[2];
        self.mu4 = mu[3];
        self
    }

    pub fn mu(&self) -> [f64; 4] {
        [self.mu1, self.mu2, self.mu3, self.mu4]
    }

    /// Lower strip boundary, computed from the base λ.
    pub fn h0(&self) -> f64 {
        (2.0 * self.lambda.abs() + 1.0) / 3.0
    }

    /// Upper strip boundary, computed from the base λ.
    pub fn h1(&self) -> f64 {
        (self.lambda.abs() + 2.0) / 3.0
    }

    /// True when μ = 0 and a1 = b1 = 0.
    pub fn is_unperturbed(&self) -> bool {
        self.mu() == [0.0; 4] && self.a1 == 0.0 && self.b1 == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.lambda, self.sigma, self.c2, self.d1, self.d5, self.a1, self.b1, self.mu1, self.mu2,
            self.mu3, self.mu4,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("all parameters must be finite".into()));
        }
        if !(self.lambda != 0.0 && self.lambda.abs() < 1.0) {
            return Err(Error::InvalidParams(format!("need 0 < |lambda| < 1, got {}", self.lambda)));
        }
        if self.sigma.abs() <= 1.0 {
            return Err(Error::InvalidParams(format!("need |sigma| > 1, got {}", self.sigma)));
        }
        if self.d5 == 0.0 {
            return Err(Error::InvalidParams("d5 must be nonzero".into()));
        }
        Ok(())
    }

    /// The linear saddle map `U0`.
    #[inline]
    pub fn u0(&self, z: Point2) -> Point2 {
        let xy = z.x * z.y;
        Point2::new(
            (self.lambda + self.mu2) * z.x * (1.0 + (self.a1 + self.mu4) * xy),
            self.sigma * z.y * (1.0 + self.b1 * xy),
        )
    }

    /// The global map `U1`.
    #[inline]
    pub fn u1(&self, z: Point2) -> Point2 {
        let u = z.y - 1.0;
        Point2::new(1.0 + self.c2 * u, self.mu1 + self.d1 * (1.0 + self.mu3) * z.x + self.d5 * u * u)
    }

    #[inline]
    pub fn u0_jacobian(&self, z: Point2) -> Mat2 {
        let l = self.lambda + self.mu2;
        let a = self.a1 + self.mu4;
        let xy = z.x * z.y;
        Mat2::new(
            l * (1.0 + 2.0 * a * xy),
            l * a * z.x * z.x,
            self.sigma * self.b1 * z.y * z.y,
            self.sigma * (1.0 + 2.0 * self.b1 * xy),
        )
    }

    #[inline]
    pub fn u1_jacobian(&self, z: Point2) -> Mat2 {
        Mat2::new(0.0, self.c2, self.d1 * (1.0 + self.mu3), 2.0 * self.d5 * (z.y - 1.0))
    }

    /// Directional derivative of `U0` with respect to `μ` along `v`.
    #[inline]
    pub fn u0_mu_derivative(&self, z: Point2, v: [f64; 4]) -> Point2 {
        let xy = z.x * z.y;
        let l = self.lambda + self.mu2;
        let a = self.a1 + self.mu4;
        Point2::new(v[1] * z.x * (1.0 + a * xy) + v[3] * l * z.x * xy, 0.0)
    }

    /// Directional derivative of `U1` with respect to `μ` along `v`.
    #[inline]
    pub fn u1_mu_derivative(&self, z: Point2, v: [f64; 4]) -> Point2 {
        Point2::new(0.0, v[0] + v[2] * self.d1 * z.x)
    }

    pub fn region(&self, y: f64) -> Region {
        if y <= self.h0() {
            Region::Linear
        } else if y >= self.h1() {
            Region::Global
        } else {
            Region::Strip
        }
    }
}

/// Which piece of the map applies at a given ordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// `y ≤ h0`, the map is `U0`.
    Linear,
    /// `h0 < y < h1`, convex blend of `U0` and `U1`.
    Strip,
    /// `y ≥ h1`, the map is `U1`.
    Global,
}

#[inline]
fn smoothstep(z: f64) -> f64 {
    z * z * (3.0 - 2.0 * z)
}

/// Blend weight `r(y)`; 0 at `h0`, 1 at `h1`, with zero slope at both ends.
/// Values outside `[h0, h1]` are clamped.
pub fn blend_weight(y: f64, h0: f64, h1: f64) -> f64 {
    let z = ((y - h0) / (h1 - h0)).clamp(0.0, 1.0);
    smoothstep(z)
}

/// `r'(y)`, zero outside the strip.
pub fn blend_weight_derivative(y: f64, h0: f64, h1: f64) -> f64 {
    let w = h1 - h0;
    let z = (y - h0) / w;
    if z <= 0.0 || z >= 1.0 {
        0.0
    } else {
        6.0 * z * (1.0 - z) / w
    }
}

/// The piecewise map as a [`PlanarMap`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrhtMap {
    pub params: GrhtMapParams,
    h0: f64,
    h1: f64,
}

/// Seed grid side length for the strip preimage search; `complete` requires at least this.
pub const STRIP_SEED_GRID: usize = 64;

impl GrhtMap {
    pub fn new(params: GrhtMapParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { params, h0: params.h0(), h1: params.h1() })
    }

    pub fn h0(&self) -> f64 {
        self.h0
    }

    pub fn h1(&self) -> f64 {
        self.h1
    }

    /// Checked evaluation; rejects non-finite input.
    pub fn try_eval(&self, z: Point2) -> Result<Point2> {
        if !z.is_finite() {
            return Err(Error::Domain(format!("non-finite point ({}, {})", z.x, z.y)));
        }
        Ok(self.eval(z))
    }

    /// Directional derivative of the full map with respect to `μ` along `v`.
    /// The strip boundaries do not depend on `μ`.
    pub fn mu_derivative(&self, z: Point2, v: [f64; 4]) -> Point2 {
        let p = &self.params;
        if z.y <= self.h0 {
            p.u0_mu_derivative(z, v)
        } else if z.y >= self.h1 {
            p.u1_mu_derivative(z, v)
        } else {
            let r = blend_weight(z.y, self.h0, self.h1);
            p.u0_mu_derivative(z, v) * (1.0 - r) + p.u1_mu_derivative(z, v) * r
        }
    }

    /// Preimage search with an explicit strip seed-grid resolution.
    pub fn preimages_with_grid(&self, target: Point2, window: Rect, grid: usize) -> Result<PreimageSet> {
        let p = &self.params;
        if p.c2 == 0.0 || p.d1 * (1.0 + p.mu3) == 0.0 {
            return Err(Error::DegenerateInversion("U1 is not invertible when c2 = 0 or d1(1+mu3) = 0".into()));
        }
        if !target.is_finite() {
            return Err(Error::Domain("non-finite target".into()));
        }
        let mut pts = Vec::new();
        let dedup = 1e-8;

        // U0 piece.
        let lin = p.lambda + p.mu2;
        let seed = Point2::new(target.x / lin, target.y / p.sigma);
        let z0 = if p.a1 == 0.0 && p.b1 == 0.0 && p.mu4 == 0.0 {
            Some(seed)
        } else {
            newton_preimage(&UnblendedU0(p), target, seed, 50)
        };
        if let Some(z) = z0 {
            if z.y <= self.h0 && (self.eval(z) - target).norm() <= PREIMAGE_TOL {
                push_unique(&mut pts, z, dedup);
            }
        }

        // U1 piece, solved exactly.
        let y = 1.0 + (target.x - 1.0) / p.c2;
        let u = y - 1.0;
        let x = (target.y - p.mu1 - p.d5 * u * u) / (p.d1 * (1.0 + p.mu3));
        let z1 = Point2::new(x, y);
        if y >= self.h1 && (self.eval(z1) - target).norm() <= PREIMAGE_TOL {
            push_unique(&mut pts, z1, dedup);
        }

        // Strip: damped Newton from a seed grid over the window's x-range.
        let n = grid.max(2);
        let (ylo, yhi) = (self.h0, self.h1);
        for i in 0..n {
            let sx = window.xmin + window.width() * (i as f64 + 0.5) / n as f64;
            for j in 0..n {
                let sy = ylo + (yhi - ylo) * (j as f64 + 0.5) / n as f64;
                if let Some(z) = newton_preimage(self, target, Point2::new(sx, sy), 40) {
                    if z.y > ylo && z.y < yhi && window.contains(z) {
                        push_unique(&mut pts, z, dedup);
                    }
                }
            }
        }
        pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        Ok(PreimageSet { points: pts, complete: grid >= STRIP_SEED_GRID })
    }
}

/// `U0` without the region split, used to seed Newton in the linear piece.
struct UnblendedU0<'a>(&'a GrhtMapParams);

impl PlanarMap for UnblendedU0<'_> {
    fn eval(&self, z: Point2) -> Point2 {
        self.0.u0(z)
    }
    fn jacobian(&self, z: Point2) -> Mat2 {
        self.0.u0_jacobian(z)
    }
}

impl PlanarMap for GrhtMap {
    #[inline]
    fn eval(&self, z: Point2) -> Point2 {
        let p = &self.params;
        if z.y <= self.h0 {
            p.u0(z)
        } else if z.y >= self.h1 {
            p.u1(z)
        } else {
            let r = blend_weight(z.y, self.h0, self.h1);
            p.u0(z) * (1.0 - r) + p.u1(z) * r
        }
    }

    #[inline]
    fn jacobian(&self, z: Point2) -> Mat2 {
        let p = &self.params;
        if z.y <= self.h0 {
            p.u0_jacobian(z)
        } else if z.y >= self.h1 {
            p.u1_jacobian(z)
        } else {
            let r = blend_weight(z.y, self.h0, self.h1);
            let dr = blend_weight_derivative(z.y, self.h0, self.h1);
            let j0 = p.u0_jacobian(z);
            let j1 = p.u1_jacobian(z);
            let diff = p.u1(z) - p.u0(z);
            Mat2::new(
                (1.0 - r) * j0.a11 + r * j1.a11,
                (1.0 - r) * j0.a12 + r * j1.a12 + dr * diff.x,
                (1.0 - r) * j0.a21 + r * j1.a21,
                (1.0 - r) * j0.a22 + r * j1.a22 + dr * diff.y,
            )
        }
    }
}

impl Preimages for GrhtMap {
    fn preimages(&self, target: Point2, window: Rect) -> Result<PreimageSet> {
        self.preimages_with_grid(target, window, STRIP_SEED_GRID)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fd_jacobian(m: &GrhtMap, z: Point2) -> Mat2 {
        let h = 1e-6;
        let dx = (m.eval(z + Point2::new(h, 0.0)) - m.eval(z - Point2::new(h, 0.0))) * (0.5 / h);
        let dy = (m.eval(z + Point2::new(0.0, h)) - m.eval(z - Point2::new(0.0, h))) * (0.5 / h);
        Mat2::from_columns(dx, dy)
    }

    #[test]
    fn homoclinic_points_map_to_one_zero() {
        let m = GrhtMap::new(GrhtMapParams::param1()).unwrap();
        assert_eq!(m.eval(Point2::new(0.0, 1.0)), Point2::new(1.0, 0.0));
        assert_eq!(m.eval(Point2::new(1.25, 0.0)), Point2::new(1.0, 0.0));
        assert_eq!(m.eval(Point2::ORIGIN), Point2::ORIGIN);
    }

    #[test]
    fn blend_endpoints() {
        let (h0, h1) = (0.2, 0.7);
        assert_eq!(blend_weight(h0, h0, h1), 0.0);
        assert_eq!(blend_weight(h1, h0, h1), 1.0);
        assert!((blend_weight(0.45, h0, h1) - 0.5).abs() < 1e-15);
        assert_eq!(blend_weight_derivative(h0, h0, h1), 0.0);
        assert_eq!(blend_weight_derivative(h1, h0, h1), 0.0);
    }

    #[test]
    fn jacobian_special_points() {
        let m = GrhtMap::new(GrhtMapParams::param1()).unwrap();
        assert_eq!(m.jacobian(Point2::ORIGIN), Mat2::diag(0.8, 1.25));
        assert_eq!(m.jacobian(Point2::new(0.0, 1.0)), Mat2::new(0.0, -0.5, 1.0, 0.0));
    }

    #[test]
    fn origin_determinant_matches_resonance() {
        let m = GrhtMap::new(GrhtMapParams::param1()).unwrap();
        assert_eq!(m.jacobian(Point2::ORIGIN).det(), 1.0);
        let m = GrhtMap::new(GrhtMapParams::param3()).unwrap();
        assert_eq!(m.jacobian(Point2::ORIGIN).det(), -1.0);
    }

    #[test]
    fn rejects_invalid() {
        assert!(GrhtMap::new(GrhtMapParams::new(1.2, 2.0, 0.0, 1.0, 1.0)).is_err());
        assert!(GrhtMap::new(GrhtMapParams::new(0.5, 0.9, 0.0, 1.0, 1.0)).is_err());
        assert!(GrhtMap::new(GrhtMapParams::new(0.5, 2.0, 0.0, 1.0, 0.0)).is_err());
        let m = GrhtMap::new(GrhtMapParams::param1()).unwrap();
        assert!(m.try_eval(Point2::new(f64::NAN, 0.0)).is_err());
    }

    #[test]
    fn preimages_of_homoclinic_image() {
        let m = GrhtMap::new(GrhtMapParams::param1()).unwrap();
        let w = Rect::new(-3.0, 3.0, -3.0, 3.0);
        let set = m.preimages(Point2::new(1.0, 0.0), w).unwrap();
        assert!(set.complete);
        assert!(set.points.iter().any(|z| z.dist(Point2::new(0.0, 1.0)) < 1e-12));
        assert!(set.points.iter().any(|z| z.dist(Point2::new(1.25, 0.0)) < 1e-12));
        let set = m.preimages(Point2::ORIGIN, w).unwrap();
        assert!(set.points.iter().any(|z| z.norm() < 1e-12));
        for z in &set.points {
            assert!((m.eval(*z)).norm() <= PREIMAGE_TOL);
        }
    }

    #[test]
    fn degenerate_inversion() {
        let m = GrhtMap::new(GrhtMapParams::new(0.8, 1.25, 0.0, 1.0, 1.0)).unwrap();
        assert!(matches!(
            m.preimages(Point2::ORIGIN, Rect::new(-1.0, 1.0, -1.0, 1.0)),
            Err(Error::DegenerateInversion(_))
        ));
    }

    fn any_params() -> impl Strategy<Value = GrhtMapParams> {
        (0.1f64..0.95, prop::bool::ANY, 1.05f64..3.0, prop::bool::ANY, -0.9f64..0.9, -1.5f64..1.5, 0.2f64..2.0, -0.3f64..0.3)
            .prop_map(|(l, ls, s, ss, c2, d1, d5, a1)| {
                let l = if ls { l } else { -l };
                let s = if ss { s } else { -s };
                GrhtMapParams::new(l, s, c2, d1, d5).with_a1(a1).with_mu([0.01, -0.02, 0.03, 0.01])
            })
    }

    proptest! {
        #[test]
        fn jacobian_matches_finite_differences(p in any_params(), x in -2.0f64..2.0, y in -1.5f64..2.5) {
            let m = GrhtMap::new(p).unwrap();
            let z = Point2::new(x, y);
            // Stay clear of the strip edges where the one-sided second derivative jumps.
            prop_assume!((y - m.h0()).abs() > 1e-4 && (y - m.h1()).abs() > 1e-4);
            let a = m.jacobian(z);
            let b = fd_jacobian(&m, z);
            let scale = a.max_abs().max(1.0);
            for (u, v) in [(a.a11, b.a11), (a.a12, b.a12), (a.a21, b.a21), (a.a22, b.a22)] {
                prop_assert!((u - v).abs() <= 1e-6 * scale, "{:?} vs {:?}", a, b);
            }
        }

        #[test]
        fn mu_derivative_matches_finite_differences(
            p in any_params(), x in -2.0f64..2.0, y in -1.5f64..2.5, i in 0usize..4,
        ) {
            let m = GrhtMap::new(p).unwrap();
            let z = Point2::new(x, y);
            let mut v = [0.0; 4];
            v[i] = 1.0;
            let h = 1e-6;
            let shift = |e: f64| {
                let mu = p.mu();
                GrhtMap::new(p.with_mu([0, 1, 2, 3].map(|j| mu[j] + e * v[j]))).unwrap().eval(z)
            };
            let fd = (shift(h) - shift(-h)) * (0.5 / h);
            let an = m.mu_derivative(z, v);
            prop_assert!((fd - an).norm() <= 1e-6 * an.norm().max(1.0), "{:?} vs {:?}", fd, an);
        }

        #[test]
        fn c1_across_strip_edges(p in any_params(), x in -2.0f64..2.0) {
            let m = GrhtMap::new(p).unwrap();
            for h in [m.h0(), m.h1()] {
                let lo = Point2::new(x, h - 1e-13);
                let hi = Point2::new(x, h + 1e-13);
                let at = Point2::new(x, h);
                prop_assert!((m.eval(lo) - m.eval(at)).norm() < 1e-12);
                prop_assert!((m.eval(hi) - m.eval(at)).norm() < 1e-12);
                let (ja, jb) = (m.jacobian(lo), m.jacobian(hi));
                // One-sided second derivatives differ by r''·(U1 − U0), so allow O(1e-13·r'') slack.
                let w = m.h1() - m.h0();
                let tol = 1e-12 + 1e-13 * 12.0 / (w * w) * (1.0 + (p.u1(at) - p.u0(at)).norm());
                prop_assert!((ja.a11 - jb.a11).abs() < tol && (ja.a12 - jb.a12).abs() < tol);
                prop_assert!((ja.a21 - jb.a21).abs() < tol && (ja.a22 - jb.a22).abs() < tol);
            }
        }

        #[test]
        fn preimages_map_forward(x in -1.0f64..2.5, y in -1.0f64..2.5) {
            let m = GrhtMap::new(GrhtMapParams::critical_example()).unwrap();
            let t = Point2::new(x, y);
            let set = m.preimages_with_grid(t, Rect::new(-3.0, 3.0, -3.0, 4.0), 16).unwrap();
            for z in &set.points {
                prop_assert!((m.eval(*z) - t).norm() <= PREIMAGE_TOL);
            }
        }
    }
}

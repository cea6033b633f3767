//! Single-round periodic orbits: closed forms for the unperturbed family,
//! a Newton solver on the composed map, monodromy and stability.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{eigenvalues_from_trace_det, Eigenvalues, Mat2, Point2};
use crate::maps::{GrhtMap, GrhtMapParams, PlanarMap};

/// Distance to a stability-triangle boundary below which a point is non-hyperbolic.
pub const CLASSIFY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StabilityClass {
    AsymptoticallyStable,
    Saddle,
    Repelling,
    NonHyperbolic,
}

impl StabilityClass {
    pub fn as_str(self) -> &'static str {
        match self {
            StabilityClass::AsymptoticallyStable => "stable",
            StabilityClass::Saddle => "saddle",
            StabilityClass::Repelling => "repelling",
            StabilityClass::NonHyperbolic => "nonhyperbolic",
        }
    }
}

/// Classifies a planar fixed point from its trace and determinant.
pub fn classify(trace: f64, det: f64, tol: f64) -> StabilityClass {
    let sn = det - trace + 1.0;
    let pd = det + trace + 1.0;
    if det - trace.abs() + 1.0 > tol && 1.0 - det > tol {
        return StabilityClass::AsymptoticallyStable;
    }
    let on_ns = (det - 1.0).abs() <= tol && trace * trace < 4.0 * det;
    if sn.abs() <= tol || pd.abs() <= tol || on_ns {
        return StabilityClass::NonHyperbolic;
    }
    match eigenvalues_from_trace_det(trace, det) {
        Eigenvalues::Real(a, b) => {
            let (lo, hi) = (a.abs().min(b.abs()), a.abs().max(b.abs()));
            if lo < 1.0 && hi > 1.0 {
                StabilityClass::Saddle
            } else {
                StabilityClass::Repelling
            }
        }
        Eigenvalues::Complex { .. } => StabilityClass::Repelling,
    }
}

/// Which root of the closed-form quadratic an orbit came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    /// Root continuing `ψ−`; asymptotically stable for large `k`.
    Minus,
    /// Root continuing `ψ+`; a saddle for large `k`.
    Plus,
    /// Found numerically, no closed-form label.
    Numeric,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Minus => "minus",
            Branch::Plus => "plus",
            Branch::Numeric => "numeric",
        }
    }
}

/// A period-`(k+m)` orbit with `k` iterates near the saddle and `m` excursion iterates.
#[derive(Debug, Clone, PartialEq)]
pub struct SrSolution {
    pub k: usize,
    pub m: usize,
    pub branch: Branch,
    /// Cycle starting from the point just after the excursion.
    pub points: Vec<Point2>,
    pub trace: f64,
    pub det: f64,
    pub stability: StabilityClass,
}

impl SrSolution {
    pub fn period(&self) -> usize {
        self.k + self.m
    }

    /// Largest distance between `f(points[i])` and `points[i+1]` around the cycle.
    pub fn closure_error<M: PlanarMap + ?Sized>(&self, map: &M) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|i| map.eval(self.points[i]).dist(self.points[(i + 1) % n]))
            .fold(0.0, f64::max)
    }

    /// The orbit point with the largest ordinate (the excursion point).
    pub fn excursion_point(&self) -> Point2 {
        *self.points.iter().max_by(|a, b| a.y.total_cmp(&b.y)).expect("nonempty orbit")
    }

    /// Max distance from any point of `self` to the nearest point of `other`.
    pub fn orbit_distance(&self, other: &SrSolution) -> f64 {
        self.points
            .iter()
            .map(|p| other.points.iter().map(|q| p.dist(*q)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    }
}

/// Ordered product `Df(z_{n-1}) ⋯ Df(z_0)` along a cycle.
pub fn monodromy<M: PlanarMap + ?Sized>(map: &M, orbit: &[Point2]) -> Mat2 {
    orbit.iter().fold(Mat2::IDENTITY, |acc, z| map.jacobian(*z).mul(&acc))
}

fn build_solution<M: PlanarMap + ?Sized>(map: &M, k: usize, m: usize, branch: Branch, points: Vec<Point2>) -> SrSolution {
    let mono = monodromy(map, &points);
    let (trace, det) = (mono.trace(), mono.det());
    SrSolution { k, m, branch, points, trace, det, stability: classify(trace, det, CLASSIFY_TOL) }
}

/// Δ for the unperturbed family (`x* = y* = 1`, `c1 = d3 = d4 = 0`).
pub fn discriminant(p: &GrhtMapParams) -> f64 {
    (1.0 - p.c2).powi(2)
}

/// Limits `(τ∞⁻, τ∞⁺, δ∞)` of the SR_k monodromy trace and determinant.
pub fn tau_delta_limits(p: &GrhtMapParams) -> (f64, f64, f64) {
    let sq = discriminant(p).sqrt();
    (1.0 - p.c2 - sq, 1.0 - p.c2 + sq, -p.c2)
}

/// Scaled root pair of the SR_k quadratic.
///
/// With `u = y − 1` at the excursion point, `ψ = |σ|^k u` and `φ = x / |λ|^k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiPair {
    pub psi_minus: f64,
    pub psi_plus: f64,
    pub phi_minus: f64,
    pub phi_plus: f64,
    pub delta_cap: f64,
}

/// Coefficients `(A, B, C)` of `A ψ² + B ψ + C = 0` defining `ψ` for given `k`.
pub fn psi_quadratic(p: &GrhtMapParams, k: usize) -> (f64, f64, f64) {
    let sk = p.sigma.abs().powi(k as i32);
    let sgn = p.sigma.signum().powi(k as i32);
    let rho = (p.lambda * p.sigma).powi(k as i32) * p.d1;
    (sgn * p.d5, rho * p.c2 - 1.0, (rho - 1.0) * sk)
}

/// Roots `ψ±` for the given `k`; `None` when they are complex.
pub fn psi_pair(p: &GrhtMapParams, k: usize) -> Option<PsiPair> {
    let (a, b, c) = psi_quadratic(p, k);
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    // Numerically stable root pair; the choice keeps ψ− the root nearer zero.
    let q = -0.5 * (b + b.signum() * sq);
    let (r1, r2) = (q / a, if q != 0.0 { c / q } else { 0.0 });
    let (psi_minus, psi_plus) = if r1.abs() <= r2.abs() { (r1, r2) } else { (r2, r1) };
    let sk = p.sigma.abs().powi(k as i32);
    let lsg = p.lambda.signum().powi(k as i32);
    Some(PsiPair {
        psi_minus,
        psi_plus,
        phi_minus: lsg * (1.0 + p.c2 * psi_minus / sk),
        phi_plus: lsg * (1.0 + p.c2 * psi_plus / sk),
        delta_cap: discriminant(p),
    })
}

/// Tolerance on `|(λσ)^k d1 − 1|` for a closed-form solution to exist.
pub const PARITY_TOL: f64 = 1e-9;

fn require_closed_form_family(p: &GrhtMapParams) -> Result<()> {
    p.validate()?;
    if !p.is_unperturbed() {
        return Err(Error::InvalidParams("closed form requires mu = 0 and a1 = b1 = 0".into()));
    }
    Ok(())
}

/// One closed-form SR_k orbit, or `Ok(None)` when the parity condition fails.
pub fn sr_closed_form_branch(p: &GrhtMapParams, k: usize, branch: Branch) -> Result<Option<SrSolution>> {
    require_closed_form_family(p)?;
    let rho = (p.lambda * p.sigma).powi(k as i32) * p.d1;
    if (rho - 1.0).abs() > PARITY_TOL {
        return Ok(None);
    }
    let pair = psi_pair(p, k).ok_or_else(|| Error::Domain(format!("complex SR_{k} roots")))?;
    let psi = match branch {
        Branch::Minus => pair.psi_minus,
        Branch::Plus => pair.psi_plus,
        Branch::Numeric => return Err(Error::InvalidParams("closed form has only minus/plus branches".into())),
    };
    let u = psi / p.sigma.abs().powi(k as i32);
    let map = GrhtMap::new(*p)?;
    let excursion = Point2::new(p.lambda.powi(k as i32) * (1.0 + p.c2 * u), 1.0 + u);
    if excursion.y < map.h1() {
        return Err(Error::StripCollision { k, index: k });
    }
    // Start just after the excursion; those k points are pure U0 iterates.
    let mut points = Vec::with_capacity(k + 1);
    let mut z = if k == 0 { excursion } else { p.u1(excursion) };
    for j in 0..k {
        if z.y > map.h0() {
            return Err(Error::StripCollision { k, index: j });
        }
        points.push(z);
        z = Point2::new(p.lambda * z.x, p.sigma * z.y);
    }
    points.push(excursion);
    Ok(Some(build_solution(&map, k, 1, branch, points)))
}

/// Both closed-form SR_k orbits `(minus, plus)`; `Ok(None)` is Parity-None.
pub fn sr_closed_form(p: &GrhtMapParams, k: usize) -> Result<Option<(SrSolution, SrSolution)>> {
    let minus = sr_closed_form_branch(p, k, Branch::Minus)?;
    let plus = sr_closed_form_branch(p, k, Branch::Plus)?;
    Ok(minus.zip(plus))
}

pub const NEWTON_MAX_ITER: usize = 50;
pub const NEWTON_TOL: f64 = 1e-11;

/// Fixed point of `f^{k+m}` near `guess`, with orbit and monodromy attached.
pub fn sr_newton<M: PlanarMap + ?Sized>(map: &M, k: usize, m: usize, guess: Point2) -> Result<SrSolution> {
    let z = periodic_newton(map, k + m, guess)?;
    Ok(build_solution(map, k, m, Branch::Numeric, map.orbit(z, k + m)))
}

/// Newton on `f^n(z) − z = 0` with step halving on residual increase.
pub fn periodic_newton<M: PlanarMap + ?Sized>(map: &M, n: usize, guess: Point2) -> Result<Point2> {
    let resid = |z: Point2| map.iterate(z, n) - z;
    let mut z = guess;
    let mut f = resid(z);
    let mut fnorm = f.norm();
    for _ in 0..NEWTON_MAX_ITER {
        if !fnorm.is_finite() {
            break;
        }
        if fnorm <= NEWTON_TOL * z.norm().max(1.0) {
            return Ok(z);
        }
        let orbit = map.orbit(z, n);
        let j = monodromy(map, &orbit).sub_identity();
        let step = j.solve(-f).ok_or(Error::Singular)?;
        let mut t = 1.0;
        let mut cand = z + step;
        let mut fc = resid(cand);
        for _ in 0..8 {
            if fc.norm().is_finite() && fc.norm() < fnorm {
                break;
            }
            t *= 0.5;
            cand = z + step * t;
            fc = resid(cand);
        }
        z = cand;
        f = fc;
        fnorm = f.norm();
    }
    if fnorm.is_finite() && fnorm <= NEWTON_TOL * z.norm().max(1.0) {
        return Ok(z);
    }
    Err(Error::NoConvergence { iterations: NEWTON_MAX_ITER, residual: fnorm })
}

/// Smallest `q ≤ n` with `f^q(z)` within `tol` of `z`.
pub fn minimal_period<M: PlanarMap + ?Sized>(map: &M, z: Point2, n: usize, tol: f64) -> usize {
    let mut w = z;
    for q in 1..=n {
        w = map.eval(w);
        if w.dist(z) <= tol * z.norm().max(1.0) {
            return q;
        }
    }
    n
}

/// True when the cycle has exactly `k` consecutive points with `y ≤ h0` and one
/// point above, i.e. it is single-round with respect to the strip.
pub fn is_single_round(map: &GrhtMap, sol: &SrSolution) -> bool {
    let above = sol.points.iter().filter(|z| z.y > map.h0()).count();
    above == sol.m && sol.points.len() == sol.k + sol.m
}

/// Rotates the cycle so it starts right after the excursion point.
pub fn canonical_rotation(map: &GrhtMap, mut sol: SrSolution) -> SrSolution {
    let n = sol.points.len();
    if let Some(i) = (0..n).max_by(|&a, &b| sol.points[a].y.total_cmp(&sol.points[b].y)) {
        sol.points.rotate_left((i + 1) % n);
    }
    let _ = map;
    sol
}

/// Searches for a single-round SR_k orbit of the given stability class by Newton
/// from the closed-form seed and then from a grid of excursion-point seeds.
pub fn sr_search(p: &GrhtMapParams, k: usize, want: StabilityClass, branch: Branch) -> Result<Option<SrSolution>> {
    let map = GrhtMap::new(*p)?;
    let accept = |z: Point2| -> Option<SrSolution> {
        let z = periodic_newton(&map, k + 1, z).ok()?;
        if minimal_period(&map, z, k + 1, 1e-8) != k + 1 {
            return None;
        }
        let sol = canonical_rotation(&map, build_solution(&map, k, 1, branch, map.orbit(z, k + 1)));
        (sol.stability == want && is_single_round(&map, &sol) && sol.closure_error(&map) < 1e-9).then_some(sol)
    };
    let mut seeds = Vec::new();
    if let Some(pair) = psi_pair(&GrhtMapParams { mu1: 0.0, mu2: 0.0, mu3: 0.0, mu4: 0.0, a1: 0.0, b1: 0.0, ..*p }, k) {
        let psi = if branch == Branch::Minus { pair.psi_minus } else { pair.psi_plus };
        let u = psi / p.sigma.abs().powi(k as i32);
        seeds.push(Point2::new(p.lambda.powi(k as i32) * (1.0 + p.c2 * u), 1.0 + u));
    }
    for s in seeds {
        if let Some(sol) = accept(s) {
            return Ok(Some(sol));
        }
    }
    // First hit in grid order, so the result does not depend on thread count.
    let (nx, ny) = (41, 41);
    Ok((0..nx * ny).into_par_iter().find_map_first(|idx| {
        let (i, j) = (idx / ny, idx % ny);
        accept(Point2::new(-2.5 + 5.0 * i as f64 / (nx - 1) as f64, map.h0() + (3.5 - map.h0()) * j as f64 / (ny - 1) as f64))
    }))
}

/// Fixed points of `U1` (solving `d5 u² + (D c2 − 1) u + (μ1 + D − 1) = 0`,
/// `D = d1(1+μ3)`, `u = y − 1`) with their stability under `DU1`.
pub fn u1_fixed_points(p: &GrhtMapParams) -> Vec<(Point2, StabilityClass)> {
    let dd = p.d1 * (1.0 + p.mu3);
    let roots = crate::maps::henon::real_roots_quadratic(p.d5, dd * p.c2 - 1.0, p.mu1 + dd - 1.0);
    roots
        .into_iter()
        .map(|u| {
            let z = Point2::new(1.0 + p.c2 * u, 1.0 + u);
            let j = p.u1_jacobian(z);
            (z, classify(j.trace(), j.det(), CLASSIFY_TOL))
        })
        .collect()
}

/// `|d̃1 x*/ỹ* − d1 x*/y*|` for the global map shifted by `shift_k` saddle iterates
/// (`x* = y* = 1`, `ỹ* = σ^{-shift_k}`).
pub fn grht_invariant_check(p: &GrhtMapParams, shift_k: usize) -> Result<f64> {
    let map = GrhtMap::new(*p)?;
    let y_tilde = p.sigma.powi(-(shift_k as i32));
    let orbit = map.orbit(Point2::new(0.0, y_tilde), shift_k + 1);
    let d1_tilde = monodromy(&map, &orbit).a21;
    let xi_tilde = d1_tilde * 1.0 / y_tilde;
    Ok((xi_tilde - p.d1).abs())
}

/// The stable and saddle SR_k orbits found for one `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SrFamily {
    pub k: usize,
    pub stable: Option<SrSolution>,
    pub saddle: Option<SrSolution>,
    /// Largest distance between a closed-form orbit and its Newton refinement,
    /// when the closed form applied.
    pub closed_form_gap: Option<f64>,
}

impl SrFamily {
    pub fn rows(&self) -> impl Iterator<Item = &SrSolution> + '_ {
        self.stable.iter().chain(self.saddle.iter())
    }
}

/// Closed-form orbits when the family is unperturbed, the parity condition holds
/// and the orbit avoids the strip; otherwise a Newton search per stability class.
/// Parity failure (`(λσ)^k d1 = −1`) of an unperturbed family yields no orbits.
pub fn sr_family(p: &GrhtMapParams, k: usize) -> Result<SrFamily> {
    let map = GrhtMap::new(*p)?;
    let mut fam = SrFamily { k, stable: None, saddle: None, closed_form_gap: None };
    if p.is_unperturbed() {
        let rho = (p.lambda * p.sigma).powi(k as i32) * p.d1;
        if (rho + 1.0).abs() <= PARITY_TOL {
            return Ok(fam);
        }
        for branch in [Branch::Minus, Branch::Plus] {
            let sol = match sr_closed_form_branch(p, k, branch) {
                Ok(Some(s)) => s,
                Ok(None) | Err(Error::StripCollision { .. }) | Err(Error::Domain(_)) => continue,
                Err(e) => return Err(e),
            };
            let refined = periodic_newton(&map, k + 1, sol.points[0])?;
            let gap = *fam.closed_form_gap.get_or_insert(0.0);
            fam.closed_form_gap = Some(gap.max(refined.dist(sol.points[0])));
            match sol.stability {
                StabilityClass::AsymptoticallyStable if fam.stable.is_none() => fam.stable = Some(sol),
                StabilityClass::Saddle if fam.saddle.is_none() => fam.saddle = Some(sol),
                _ => {}
            }
        }
    }
    if fam.stable.is_none() {
        fam.stable = sr_search(p, k, StabilityClass::AsymptoticallyStable, Branch::Minus)?;
    }
    if fam.saddle.is_none() {
        fam.saddle = sr_search(p, k, StabilityClass::Saddle, Branch::Plus)?;
    }
    Ok(fam)
}

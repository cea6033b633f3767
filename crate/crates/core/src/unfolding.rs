//! Saddle-node and period-doubling bifurcations of SR_k orbits along rays in
//! the unfolding parameter space `(μ1, μ2, μ3, μ4)`, the analytic formulas of
//! the resonance-free family, and scaling-law fits.

use crate::error::{Error, Result};
use crate::geometry::{Mat2, Point2};
use crate::maps::{GrhtMap, GrhtMapParams, PlanarMap};
use crate::periodic::{
    canonical_rotation, classify, minimal_period, periodic_newton, sr_closed_form_branch, sr_search,
    Branch, SrSolution, StabilityClass, CLASSIFY_TOL,
};

/// Which coordinate direction (or a user direction) a ray probes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RayLabel {
    Mu1,
    Mu2,
    Mu3,
    Mu4,
    Custom,
}

impl RayLabel {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "mu1" => RayLabel::Mu1,
            "mu2" => RayLabel::Mu2,
            "mu3" => RayLabel::Mu3,
            "mu4" => RayLabel::Mu4,
            _ => return Err(Error::Parse(format!("unknown ray `{s}` (expected mu1..mu4)"))),
        })
    }

    /// The scaling model conjectured for this coordinate direction.
    pub fn model(self) -> Option<ScalingModel> {
        match self {
            RayLabel::Mu1 => Some(ScalingModel::Alpha2k),
            RayLabel::Mu2 => Some(ScalingModel::AlphaKOverK),
            RayLabel::Mu3 => Some(ScalingModel::AlphaK),
            RayLabel::Mu4 => Some(ScalingModel::OneOverK),
            RayLabel::Custom => None,
        }
    }
}

/// Unit direction in `μ`-space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnfoldingRay {
    pub v: [f64; 4],
    pub label: RayLabel,
}

impl UnfoldingRay {
    pub fn axis(label: RayLabel) -> Self {
        let mut v = [0.0; 4];
        let i = match label {
            RayLabel::Mu1 => 0,
            RayLabel::Mu2 => 1,
            RayLabel::Mu3 => 2,
            RayLabel::Mu4 => 3,
            RayLabel::Custom => 0,
        };
        v[i] = 1.0;
        Self { v, label }
    }

    /// Normalises `v`; fails on the zero vector.
    pub fn custom(v: [f64; 4]) -> Result<Self> {
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidParams("ray direction must be a nonzero finite vector".into()));
        }
        Ok(Self { v: v.map(|c| c / n), label: RayLabel::Custom })
    }

    /// Parameters at signed distance `eps` along the ray from `base`.
    pub fn at(&self, base: &GrhtMapParams, eps: f64) -> GrhtMapParams {
        let mu = base.mu();
        base.with_mu([0, 1, 2, 3].map(|i| mu[i] + eps * self.v[i]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BifurcationKind {
    SaddleNode,
    PeriodDoubling,
}

impl BifurcationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BifurcationKind::SaddleNode => "SN",
            BifurcationKind::PeriodDoubling => "PD",
        }
    }

    /// `δ − τ + 1` for SN, `δ + τ + 1` for PD.
    pub fn test_function(self, trace: f64, det: f64) -> f64 {
        match self {
            BifurcationKind::SaddleNode => det - trace + 1.0,
            BifurcationKind::PeriodDoubling => det + trace + 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BifurcationEvent {
    pub kind: BifurcationKind,
    pub k: usize,
    pub epsilon: f64,
    pub witness: SrSolution,
}

/// Inputs of the discriminant `Δ0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Delta0Params {
    pub c2_0: f64,
    pub d4_0: f64,
    pub d5_0: f64,
    pub d3_0: f64,
    pub c1_0: f64,
    pub chi: f64,
    pub chi_eig: f64,
    pub alpha: f64,
}

impl Delta0Params {
    /// The unfolded family used throughout: `c2,0 = −1/2`, `d5,0 = 1`, `χ = χ_eig = 1`.
    pub fn toy(alpha: f64) -> Self {
        Self { c2_0: -0.5, d4_0: 0.0, d5_0: 1.0, d3_0: 0.0, c1_0: 0.0, chi: 1.0, chi_eig: 1.0, alpha }
    }
}

/// `Δ0 = (1 − c2,0 − χ d4,0)² − 4 d5,0 (d3,0 + χ c1,0)`.
pub fn delta0(p: &Delta0Params) -> f64 {
    (1.0 - p.c2_0 - p.chi * p.d4_0).powi(2) - 4.0 * p.d5_0 * (p.d3_0 + p.chi * p.c1_0)
}

/// Exact `(μ1_SN, μ1_PD)` of the period-`(k+1)` branch of the resonance-free
/// family at the `μ2`, `μ3` of `p` (`μ4` is irrelevant when `a1 = b1 = 0`).
///
/// With `ρ = σ^k d1 (1+μ3) (λ+μ2)^k` the fixed point of `U0^k ∘ U1` solves
/// `σ^k d5 u² + (ρ c2 − 1) u + σ^k μ1 + ρ − 1 = 0`, `τ = 2 d5 σ^k u` and `δ = −c2 ρ`.
pub fn analytic_sn_pd_mu1(p: &GrhtMapParams, k: usize) -> Result<(f64, f64)> {
    p.validate()?;
    if p.a1 != 0.0 || p.b1 != 0.0 {
        return Err(Error::InvalidParams("analytic formulas need a1 = b1 = 0".into()));
    }
    let sk = p.sigma.powi(k as i32);
    let rho = sk * p.d1 * (1.0 + p.mu3) * (p.lambda + p.mu2).powi(k as i32);
    let b2 = (1.0 - rho * p.c2).powi(2) / (4.0 * p.d5 * sk);
    Ok(((b2 + 1.0 - rho) / sk, (-3.0 * b2 + 1.0 - rho) / sk))
}

/// Continuation controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuationOptions {
    pub initial_step: f64,
    pub max_step: f64,
    pub min_step: f64,
    pub max_steps: usize,
    pub corrector_tol: f64,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        Self { initial_step: 0.02, max_step: 0.1, min_step: 1e-10, max_steps: 5000, corrector_tol: 1e-13 }
    }
}

/// The continuation problem `f_ε^n(z) − z = 0` in scaled unknowns
/// `w = (x/s_z, y/s_z, ε/s_ε)`.
struct Branch3<'a> {
    base: &'a GrhtMapParams,
    ray: &'a UnfoldingRay,
    n: usize,
    sz: f64,
    se: f64,
}

struct Eval3 {
    h: Point2,
    /// `[∂H/∂X, ∂H/∂Y, ∂H/∂e]` as columns.
    jac: [Point2; 3],
    mono: Mat2,
}

impl Branch3<'_> {
    fn z(&self, w: [f64; 3]) -> Point2 {
        Point2::new(w[0] * self.sz, w[1] * self.sz)
    }

    fn eps(&self, w: [f64; 3]) -> f64 {
        w[2] * self.se
    }

    fn map(&self, w: [f64; 3]) -> Result<GrhtMap> {
        GrhtMap::new(self.ray.at(self.base, self.eps(w)))
    }

    fn eval(&self, w: [f64; 3]) -> Result<Eval3> {
        let map = self.map(w)?;
        let z0 = self.z(w);
        let mut z = z0;
        let mut mono = Mat2::IDENTITY;
        let mut q = Point2::ORIGIN;
        for _ in 0..self.n {
            let j = map.jacobian(z);
            q = j.apply(q) + map.mu_derivative(z, self.ray.v);
            mono = j.mul(&mono);
            z = map.eval(z);
        }
        if !z.is_finite() {
            return Err(Error::Domain("orbit diverged".into()));
        }
        let a = mono.sub_identity();
        Ok(Eval3 {
            h: (z - z0) * (1.0 / self.sz),
            jac: [Point2::new(a.a11, a.a21), Point2::new(a.a12, a.a22), q * (self.se / self.sz)],
            mono,
        })
    }

    fn tangent(&self, e: &Eval3) -> [f64; 3] {
        let r1 = [e.jac[0].x, e.jac[1].x, e.jac[2].x];
        let r2 = [e.jac[0].y, e.jac[1].y, e.jac[2].y];
        let t = [r1[1] * r2[2] - r1[2] * r2[1], r1[2] * r2[0] - r1[0] * r2[2], r1[0] * r2[1] - r1[1] * r2[0]];
        let n = norm3(t);
        [t[0] / n, t[1] / n, t[2] / n]
    }

    /// Newton on `H = 0` plus the hyperplane `t·(w − w_pred) = 0`.
    fn correct(&self, pred: [f64; 3], t: [f64; 3], tol: f64) -> Option<([f64; 3], Eval3)> {
        let mut w = pred;
        for _ in 0..12 {
            let e = self.eval(w).ok()?;
            let plane = dot3(t, sub3(w, pred));
            if e.h.norm() <= tol && plane.abs() <= tol {
                return Some((w, e));
            }
            let rows = [
                [e.jac[0].x, e.jac[1].x, e.jac[2].x],
                [e.jac[0].y, e.jac[1].y, e.jac[2].y],
                t,
            ];
            let dw = solve3(rows, [-e.h.x, -e.h.y, -plane])?;
            w = add3(w, dw);
            if norm3(dw) <= 1e-3 * tol {
                let e = self.eval(w).ok()?;
                return (e.h.norm() <= 10.0 * tol).then_some((w, e));
            }
        }
        None
    }
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm3(a: [f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

fn add3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn scale3(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

/// Gaussian elimination with partial pivoting.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for c in 0..3 {
        let piv = (c..3).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[piv][c].abs() < 1e-300 || !a[piv][c].is_finite() {
            return None;
        }
        a.swap(c, piv);
        b.swap(c, piv);
        for r in c + 1..3 {
            let f = a[r][c] / a[c][c];
            for cc in c..3 {
                a[r][cc] -= f * a[c][cc];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let s: f64 = (r + 1..3).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Asymptotically stable SR_k orbit of `p` used to start a scan, rotated so the
/// excursion point comes last.
pub fn stable_seed(p: &GrhtMapParams, k: usize) -> Result<SrSolution> {
    let map = GrhtMap::new(*p)?;
    let bare = GrhtMapParams { a1: 0.0, b1: 0.0, mu1: 0.0, mu2: 0.0, mu3: 0.0, mu4: 0.0, ..*p };
    if let Ok(Some(cf)) = sr_closed_form_branch(&bare, k, Branch::Minus) {
        if let Ok(z) = periodic_newton(&map, k + 1, *cf.points.last().expect("orbit")) {
            if minimal_period(&map, z, k + 1, 1e-8) == k + 1 {
                let sol = crate::periodic::sr_newton(&map, k, 1, z)?;
                if sol.stability == StabilityClass::AsymptoticallyStable {
                    return Ok(canonical_rotation(&map, SrSolution { branch: Branch::Minus, ..sol }));
                }
            }
        }
    }
    sr_search(p, k, StabilityClass::AsymptoticallyStable, Branch::Minus)?
        .ok_or_else(|| Error::Domain(format!("no asymptotically stable SR_{k} orbit at the ray origin")))
}

fn witness(branch: &Branch3, w: [f64; 3], k: usize) -> Result<SrSolution> {
    let map = branch.map(w)?;
    let pts = map.orbit(branch.z(w), branch.n);
    let mono = crate::periodic::monodromy(&map, &pts);
    let sol = SrSolution {
        k,
        m: 1,
        branch: Branch::Numeric,
        points: pts,
        trace: mono.trace(),
        det: mono.det(),
        stability: classify(mono.trace(), mono.det(), CLASSIFY_TOL),
    };
    Ok(canonical_rotation(&map, sol))
}

/// Continues the branch from `w0` in direction `dir` (±1 in `ε`) until the
/// first SN or PD test-function sign change, or until `|ε| > se`.
fn continue_to_event(
    branch: &Branch3,
    w0: [f64; 3],
    dir: f64,
    k: usize,
    opts: &ContinuationOptions,
) -> Result<Option<BifurcationEvent>> {
    let mut w = w0;
    let e = branch.eval(w)?;
    let mut t = branch.tangent(&e);
    if t[2] * dir < 0.0 {
        t = scale3(t, -1.0);
    }
    let mut h = opts.initial_step;
    let g = |m: &Mat2| {
        [
            BifurcationKind::SaddleNode.test_function(m.trace(), m.det()),
            BifurcationKind::PeriodDoubling.test_function(m.trace(), m.det()),
        ]
    };
    let mut g_prev = g(&e.mono);
    for _ in 0..opts.max_steps {
        let pred = add3(w, scale3(t, h));
        let Some((w_new, e_new)) = branch.correct(pred, t, opts.corrector_tol) else {
            h *= 0.5;
            if h < opts.min_step {
                return Err(Error::BranchLost { last_good: branch.eps(w) });
            }
            continue;
        };
        if norm3(sub3(w_new, w)) > 2.0 * h {
            h *= 0.5;
            if h < opts.min_step {
                return Err(Error::BranchLost { last_good: branch.eps(w) });
            }
            continue;
        }
        let g_new = g(&e_new.mono);
        for (idx, kind) in [BifurcationKind::SaddleNode, BifurcationKind::PeriodDoubling].into_iter().enumerate() {
            if g_prev[idx] > 0.0 && g_new[idx] <= 0.0 {
                let w_ev = bisect_event(branch, w, t, h, kind, opts)?;
                let eps = branch.eps(w_ev);
                return Ok((eps.abs() <= branch.se).then(|| -> Result<BifurcationEvent> {
                    Ok(BifurcationEvent { kind, k, epsilon: eps, witness: witness(branch, w_ev, k)? })
                }).transpose()?);
            }
        }
        if branch.eps(w_new).abs() > branch.se {
            return Ok(None);
        }
        let mut t_new = branch.tangent(&e_new);
        if dot3(t_new, t) < 0.0 {
            t_new = scale3(t_new, -1.0);
        }
        w = w_new;
        t = t_new;
        g_prev = g_new;
        h = (h * 1.5).min(opts.max_step);
    }
    Err(Error::BranchLost { last_good: branch.eps(w) })
}

/// Bisects the arclength `s ∈ (0, h]` from `w` along `t` for a zero of the test function.
fn bisect_event(
    branch: &Branch3,
    w: [f64; 3],
    t: [f64; 3],
    h: f64,
    kind: BifurcationKind,
    opts: &ContinuationOptions,
) -> Result<[f64; 3]> {
    let solve_at = |s: f64| -> Result<([f64; 3], f64)> {
        if s == 0.0 {
            let e = branch.eval(w)?;
            return Ok((w, kind.test_function(e.mono.trace(), e.mono.det())));
        }
        let (ws, es) = branch
            .correct(add3(w, scale3(t, s)), t, opts.corrector_tol)
            .ok_or(Error::BranchLost { last_good: branch.eps(w) })?;
        Ok((ws, kind.test_function(es.mono.trace(), es.mono.det())))
    };
    let (mut lo, mut hi) = (0.0, h);
    let (mut w_hi, mut g_hi) = solve_at(hi)?;
    let (_, mut g_lo) = solve_at(lo)?;
    for _ in 0..200 {
        if g_hi.abs() < 1e-12 || hi - lo < 1e-15 * h.max(1e-300) {
            break;
        }
        // Illinois-style regula falsi keeps the bracket and converges superlinearly.
        let mid = if g_lo.is_finite() && g_hi.is_finite() && g_lo != g_hi {
            let m = hi - g_hi * (hi - lo) / (g_hi - g_lo);
            if m > lo && m < hi { m } else { 0.5 * (lo + hi) }
        } else {
            0.5 * (lo + hi)
        };
        let (w_mid, g_mid) = solve_at(mid)?;
        if (g_mid > 0.0) == (g_lo > 0.0) {
            lo = mid;
            g_lo = g_mid;
            g_hi *= 0.5;
        } else {
            hi = mid;
            w_hi = w_mid;
            g_hi = g_mid;
            g_lo *= 0.5;
        }
    }
    Ok(w_hi)
}

/// Continues the stable SR_k branch from `ε = 0` in both directions within
/// `bracket = [lo, hi]` (`lo < 0 < hi`) and returns the first stability-losing
/// event on each side, sorted by `ε`.
pub fn scan_ray(base: &GrhtMapParams, ray: &UnfoldingRay, k: usize, bracket: [f64; 2]) -> Result<Vec<BifurcationEvent>> {
    scan_ray_with(base, ray, k, bracket, &ContinuationOptions::default())
}

pub fn scan_ray_with(
    base: &GrhtMapParams,
    ray: &UnfoldingRay,
    k: usize,
    bracket: [f64; 2],
    opts: &ContinuationOptions,
) -> Result<Vec<BifurcationEvent>> {
    let [lo, hi] = bracket;
    if !(lo < 0.0 && hi > 0.0) {
        return Err(Error::InvalidParams(format!("bracket [{lo}, {hi}] must straddle 0")));
    }
    let seed = stable_seed(base, k)?;
    let z = *seed.points.last().expect("orbit");
    let sz = base.sigma.abs().powi(-(k as i32));
    let mut out = Vec::new();
    for (dir, se) in [(-1.0, -lo), (1.0, hi)] {
        let branch = Branch3 { base, ray, n: k + 1, sz, se };
        let w0 = [z.x / sz, z.y / sz, 0.0];
        if let Some(ev) = continue_to_event(&branch, w0, dir, k, opts)? {
            out.push(ev);
        }
    }
    out.sort_by(|a, b| a.epsilon.total_cmp(&b.epsilon));
    Ok(out)
}

/// Bracket half-width scaled to the conjectured law for this ray, with headroom.
pub fn default_bracket(label: RayLabel, k: usize, alpha: f64) -> [f64; 2] {
    let kf = k as f64;
    let w = 10.0
        * match label {
            RayLabel::Mu1 => alpha.powi(2 * k as i32),
            RayLabel::Mu2 => alpha.powi(k as i32) / kf,
            RayLabel::Mu3 => alpha.powi(k as i32),
            RayLabel::Mu4 => 1.0 / kf,
            RayLabel::Custom => alpha.powi(2 * k as i32),
        };
    [-w, w]
}

/// `(ε⁻, ε⁺)`: the interval around 0 on which the SR_k branch stays stable.
pub fn stability_window(base: &GrhtMapParams, k: usize, ray: &UnfoldingRay, bracket: [f64; 2]) -> Result<(f64, f64)> {
    let ev = scan_ray(base, ray, k, bracket)?;
    let minus = ev.iter().filter(|e| e.epsilon < 0.0).map(|e| e.epsilon).fold(f64::NEG_INFINITY, f64::max);
    let plus = ev.iter().filter(|e| e.epsilon > 0.0).map(|e| e.epsilon).fold(f64::INFINITY, f64::min);
    if !minus.is_finite() || !plus.is_finite() {
        return Err(Error::Domain(format!("stability window for k = {k} not closed inside the bracket")));
    }
    Ok((minus, plus))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScalingModel {
    Alpha2k,
    AlphaKOverK,
    AlphaK,
    OneOverK,
}

impl ScalingModel {
    pub fn eval(self, k: usize, alpha: f64) -> f64 {
        let kf = k as f64;
        match self {
            ScalingModel::Alpha2k => alpha.powi(2 * k as i32),
            ScalingModel::AlphaKOverK => alpha.powi(k as i32) / kf,
            ScalingModel::AlphaK => alpha.powi(k as i32),
            ScalingModel::OneOverK => 1.0 / kf,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ScalingModel::Alpha2k => "alpha^2k",
            ScalingModel::AlphaKOverK => "alpha^k/k",
            ScalingModel::AlphaK => "alpha^k",
            ScalingModel::OneOverK => "1/k",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub model: ScalingModel,
    /// Last ratio.
    pub constant: f64,
    /// Aitken Δ² estimate from the last three ratios (`None` for fewer than three
    /// or a vanishing second difference).
    pub extrapolated: Option<f64>,
    /// `(k, ε_k, ε_k / model(k))`.
    pub ratios: Vec<(usize, f64, f64)>,
}

/// Aitken Δ² extrapolation of the last three terms.
pub fn aitken(seq: &[f64]) -> Option<f64> {
    let n = seq.len();
    if n < 3 {
        return None;
    }
    let (a, b, c) = (seq[n - 3], seq[n - 2], seq[n - 1]);
    let den = c - 2.0 * b + a;
    if den == 0.0 || !den.is_finite() {
        return None;
    }
    Some(c - (c - b).powi(2) / den)
}

/// Ratios `ε_k / model(k)` over consecutive `k`.
pub fn scaling_fit(events: &[(usize, f64)], model: ScalingModel, alpha: f64) -> Result<ScalingFit> {
    if events.len() < 4 {
        return Err(Error::InvalidParams("scaling fit needs at least 4 k values".into()));
    }
    let mut ev = events.to_vec();
    ev.sort_by_key(|e| e.0);
    if ev.windows(2).any(|w| w[1].0 != w[0].0 + 1) {
        return Err(Error::InvalidParams("scaling fit needs consecutive k values".into()));
    }
    let ratios: Vec<(usize, f64, f64)> = ev.iter().map(|&(k, e)| (k, e, e / model.eval(k, alpha))).collect();
    let r: Vec<f64> = ratios.iter().map(|t| t.2).collect();
    Ok(ScalingFit { model, constant: *r.last().expect("nonempty"), extrapolated: aitken(&r), ratios })
}

/// For each `(μ1, μ2)` cell, the number of `k` whose analytic stability band contains `μ1`.
///
/// Row `j` holds `μ2 = mu2_range[0] + (j + 0.5)·Δμ2`, column `i` the analogous `μ1`.
pub fn overlap_count(
    base: &GrhtMapParams,
    mu1_range: [f64; 2],
    mu2_range: [f64; 2],
    k_set: &[usize],
    resolution: (usize, usize),
) -> Result<Vec<Vec<u32>>> {
    let (nx, ny) = resolution;
    let mut grid = vec![vec![0u32; nx]; ny];
    for (j, row) in grid.iter_mut().enumerate() {
        let mu2 = mu2_range[0] + (mu2_range[1] - mu2_range[0]) * (j as f64 + 0.5) / ny as f64;
        let bands: Vec<(f64, f64)> = k_set
            .iter()
            .map(|&k| analytic_sn_pd_mu1(&GrhtMapParams { mu2, ..*base }, k).map(|(sn, pd)| (pd, sn)))
            .collect::<Result<_>>()?;
        for (i, cell) in row.iter_mut().enumerate() {
            let mu1 = mu1_range[0] + (mu1_range[1] - mu1_range[0]) * (i as f64 + 0.5) / nx as f64;
            *cell = bands.iter().filter(|(pd, sn)| *pd < mu1 && mu1 < *sn).count() as u32;
        }
    }
    Ok(grid)
}

/// Number of sides of the region where every `k` in `k_set` is stable, traced
/// over `samples` values of `μ2`: distinct binding SN curves on the upper
/// envelope plus distinct binding PD curves on the lower envelope.
pub fn overlap_polygon_sides(base: &GrhtMapParams, k_set: &[usize], mu2_range: [f64; 2], samples: usize) -> Result<usize> {
    let mut prev: Option<(usize, usize)> = None;
    let mut sides = 0;
    let mut seen_region = false;
    for j in 0..samples {
        let mu2 = mu2_range[0] + (mu2_range[1] - mu2_range[0]) * j as f64 / (samples - 1).max(1) as f64;
        let mut up = (f64::INFINITY, 0);
        let mut lo = (f64::NEG_INFINITY, 0);
        for (idx, &k) in k_set.iter().enumerate() {
            let (sn, pd) = analytic_sn_pd_mu1(&GrhtMapParams { mu2, ..*base }, k)?;
            if sn < up.0 {
                up = (sn, idx);
            }
            if pd > lo.0 {
                lo = (pd, idx);
            }
        }
        if up.0 > lo.0 {
            if seen_region && prev.is_none() {
                return Err(Error::Domain("overlap region is not connected in mu2".into()));
            }
            seen_region = true;
            match prev {
                None => sides += 2,
                Some((pu, pl)) => sides += usize::from(pu != up.1) + usize::from(pl != lo.1),
            }
            prev = Some((up.1, lo.1));
        } else {
            prev = None;
        }
    }
    Ok(sides)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn delta0_examples() {
        assert_eq!(delta0(&Delta0Params::toy(0.8)), 2.25);
        let p = Delta0Params { c2_0: 1.0, ..Delta0Params::toy(0.8) };
        assert_eq!(delta0(&p), 0.0);
        let p = Delta0Params { c2_0: 0.0, c1_0: 1.0, ..Delta0Params::toy(0.8) };
        assert_eq!(delta0(&p), -3.0);
    }

    #[test]
    fn analytic_collapse_at_zero_mu() {
        let (sn, pd) = analytic_sn_pd_mu1(&GrhtMapParams::param1(), 15).unwrap();
        assert_relative_eq!(sn, 0.5625 * 0.8f64.powi(30), max_relative = 1e-12);
        assert_relative_eq!(pd, -1.6875 * 0.8f64.powi(30), max_relative = 1e-12);
        for k in 5..=25 {
            let (sn, pd) = analytic_sn_pd_mu1(&GrhtMapParams::param1(), k).unwrap();
            assert!(sn > 0.0 && pd < 0.0);
        }
    }

    #[test]
    fn aitken_on_geometric() {
        let s: Vec<f64> = (0..5).map(|n| 2.0 + 0.5f64.powi(n)).collect();
        assert_relative_eq!(aitken(&s).unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn scan_matches_analytic_small_k() {
        let p = GrhtMapParams::param1();
        let ray = UnfoldingRay::axis(RayLabel::Mu1);
        let k = 12;
        let ev = scan_ray(&p, &ray, k, default_bracket(RayLabel::Mu1, k, 0.8)).unwrap();
        let (sn, pd) = analytic_sn_pd_mu1(&p, k).unwrap();
        assert_eq!(ev.len(), 2);
        assert_eq!(ev[0].kind, BifurcationKind::PeriodDoubling);
        assert_eq!(ev[1].kind, BifurcationKind::SaddleNode);
        assert_relative_eq!(ev[0].epsilon, pd, max_relative = 1e-10);
        assert_relative_eq!(ev[1].epsilon, sn, max_relative = 1e-10);
    }

    #[test]
    fn mu3_ray_matches_derived_formula() {
        // μ1 scan at μ3 ≠ 0, where the fold depends on (1 + μ3) through ρ.
        let p = GrhtMapParams::param1().with_mu([0.0, 0.0, 0.01, 0.0]);
        let ray = UnfoldingRay::axis(RayLabel::Mu1);
        let k = 14;
        let ev = scan_ray(&p, &ray, k, [-0.01, 0.01]).unwrap();
        let (sn, pd) = analytic_sn_pd_mu1(&p, k).unwrap();
        let got_sn = ev.iter().find(|e| e.kind == BifurcationKind::SaddleNode).unwrap().epsilon;
        let got_pd = ev.iter().find(|e| e.kind == BifurcationKind::PeriodDoubling).unwrap().epsilon;
        assert_relative_eq!(got_sn, sn, max_relative = 1e-9);
        assert_relative_eq!(got_pd, pd, max_relative = 1e-9);
    }

    #[test]
    fn overlap_sides_depend_on_alpha() {
        let ks: Vec<usize> = (15..=20).collect();
        let p8 = GrhtMapParams::param1();
        let p7 = GrhtMapParams::new(0.7, 1.0 / 0.7, -0.5, 1.0, 1.0);
        assert_eq!(overlap_polygon_sides(&p8, &ks, [-0.05, 0.05], 400_001).unwrap(), 9);
        assert_eq!(overlap_polygon_sides(&p7, &ks, [-0.05, 0.05], 400_001).unwrap(), 7);
        let grid = overlap_count(&p8, [-2e-4, 2e-4], [-0.006, 0.004], &ks, (80, 80)).unwrap();
        assert_eq!(grid.iter().flatten().copied().max(), Some(6));
    }
}

//! Eigenvalue resonances, polynomial elimination of nonlinear terms near a
//! saddle, and numerical checks of the resulting conjugacies and of the
//! `U0^k` expansion.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{Point2, Rect};
use crate::maps::GrhtMapParams;

/// Default relative tolerance for resonance and denominator tests.
pub const RESONANCE_TOL: f64 = 1e-12;

/// Pairs `(p, q)` with `p, q ≥ −1`, `p + q ≥ 1` and `|λ^p σ^q − 1| ≤ tol`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceReport {
    pub pairs: Vec<(i32, i32)>,
    pub tol: f64,
    pub max_order: i32,
}

impl ResonanceReport {
    pub fn contains(&self, p: i32, q: i32) -> bool {
        self.pairs.contains(&(p, q))
    }
}

/// Exhaustive scan over `−1 ≤ p, q ≤ max_order`.
pub fn detect_resonances(lambda: f64, sigma: f64, max_order: i32, tol: f64) -> Result<ResonanceReport> {
    if !(lambda != 0.0 && lambda.abs() < 1.0 && sigma.abs() > 1.0) || max_order < 2 {
        return Err(Error::InvalidParams("need 0 < |lambda| < 1 < |sigma| and max_order >= 2".into()));
    }
    let mut pairs = Vec::new();
    for p in -1..=max_order {
        for q in -1..=max_order {
            if p + q < 1 {
                continue;
            }
            if (lambda.powi(p) * sigma.powi(q) - 1.0).abs() <= tol {
                pairs.push((p, q));
            }
        }
    }
    Ok(ResonanceReport { pairs, tol, max_order })
}

/// Quadratic coefficients of a planar map with linear part `diag(λ, σ)`,
/// `x' = λx + a1 x² + a2 xy + a3 y²`, `y' = σy + b1 x² + b2 xy + b3 y²`, and the
/// coefficients of the eliminating change of variables
/// `u = x + c1 x² + c2 xy + c3 y²`, `v = y + d1 x² + d2 xy + d3 y²`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QuadraticCoeffs {
    pub a: [f64; 3],
    pub b: [f64; 3],
    pub c: [f64; 3],
    pub d: [f64; 3],
}

impl QuadraticCoeffs {
    pub fn new(a: [f64; 3], b: [f64; 3]) -> Self {
        Self { a, b, ..Default::default() }
    }

    /// The change of variables defined by `c` and `d`, claiming every quadratic term eliminated.
    pub fn transform(&self) -> PolyTransform {
        let mut terms = Vec::new();
        let mut claimed = Vec::new();
        for i in 0..3 {
            let (px, py) = (2 - i as u32, i as u32);
            terms.push(Monomial { component: 0, px, py, coeff: self.c[i] });
            terms.push(Monomial { component: 1, px, py, coeff: self.d[i] });
            claimed.push((0, px, py));
            claimed.push((1, px, py));
        }
        PolyTransform { terms, claimed }
    }

    /// Evaluates the quadratic map itself.
    pub fn eval_map(&self, lambda: f64, sigma: f64, z: Point2) -> Point2 {
        let m = [z.x * z.x, z.x * z.y, z.y * z.y];
        let dot = |c: &[f64; 3]| c[0] * m[0] + c[1] * m[1] + c[2] * m[2];
        Point2::new(lambda * z.x + dot(&self.a), sigma * z.y + dot(&self.b))
    }
}

fn checked_ratio(num: f64, den: f64, tol: f64, term: &str) -> Result<f64> {
    if den.abs() <= tol {
        return Err(Error::ResonanceObstruction { term: term.to_string(), denominator: den });
    }
    Ok(num / den)
}

/// Fills the elimination coefficients of `q`; fails on the first blocked term.
pub fn eliminate_quadratic(lambda: f64, sigma: f64, q: QuadraticCoeffs, tol: f64) -> Result<QuadraticCoeffs> {
    if !(lambda != 0.0 && lambda.abs() < 1.0 && sigma.abs() > 1.0) {
        return Err(Error::InvalidParams("need 0 < |lambda| < 1 < |sigma|".into()));
    }
    let (l, s) = (lambda, sigma);
    let c = [
        checked_ratio(q.a[0], l * (1.0 - l), tol, "x^2 (first component)")?,
        checked_ratio(q.a[1], l * (1.0 - s), tol, "xy (first component)")?,
        checked_ratio(q.a[2], l - s * s, tol, "y^2 (first component)")?,
    ];
    let d = [
        checked_ratio(q.b[0], s - l * l, tol, "x^2 (second component)")?,
        checked_ratio(q.b[1], s * (1.0 - l), tol, "xy (second component)")?,
        checked_ratio(q.b[2], s * (1.0 - s), tol, "y^2 (second component)")?,
    ];
    Ok(QuadraticCoeffs { c, d, ..q })
}

/// Either an elimination coefficient or a resonant (non-removable) term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TermOutcome {
    Eliminated(f64),
    Resonant,
    /// Not yet processed by [`eliminate_order_n`].
    Pending,
}

/// Homogeneous order-`n` terms `Σ a[i] x^{n−i} y^i`, `Σ b[i] x^{n−i} y^i` and their fate.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderNTermTable {
    pub n: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<TermOutcome>,
    pub d: Vec<TermOutcome>,
}

impl OrderNTermTable {
    pub fn new(n: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if n < 2 || a.len() != n + 1 || b.len() != n + 1 {
            return Err(Error::InvalidParams(format!("order-{n} table needs n >= 2 and {} coefficients per component", n + 1)));
        }
        Ok(Self { n, a, b, c: vec![TermOutcome::Pending; n + 1], d: vec![TermOutcome::Pending; n + 1] })
    }

    /// Denominator of the first-component term `i`: `λ − λ^{n−i} σ^i`.
    pub fn first_denominator(lambda: f64, sigma: f64, n: usize, i: usize) -> f64 {
        lambda - lambda.powi((n - i) as i32) * sigma.powi(i as i32)
    }

    /// Denominator of the second-component term `i`: `σ(1 − σ^{i−1} λ^{n−i})`.
    pub fn second_denominator(lambda: f64, sigma: f64, n: usize, i: usize) -> f64 {
        sigma * (1.0 - sigma.powi(i as i32 - 1) * lambda.powi((n - i) as i32))
    }

    /// Change of variables for the eliminated terms, claiming exactly those.
    pub fn transform(&self) -> PolyTransform {
        let mut terms = Vec::new();
        let mut claimed = Vec::new();
        for i in 0..=self.n {
            let (px, py) = ((self.n - i) as u32, i as u32);
            for (component, outcome) in [(0usize, self.c[i]), (1usize, self.d[i])] {
                if let TermOutcome::Eliminated(coeff) = outcome {
                    terms.push(Monomial { component, px, py, coeff });
                    claimed.push((component, px, py));
                }
            }
        }
        PolyTransform { terms, claimed }
    }

    /// CSV with columns `component,n,i,coeff_in,coeff_out,resonant_flag`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["component", "n", "i", "coeff_in", "coeff_out", "resonant_flag"])?;
        for (comp, coeffs, outs) in [("x", &self.a, &self.c), ("y", &self.b, &self.d)] {
            for i in 0..=self.n {
                let (out, flag) = match outs[i] {
                    TermOutcome::Eliminated(v) => (crate::export::fmt17(v), "0"),
                    TermOutcome::Resonant => (String::new(), "1"),
                    TermOutcome::Pending => (String::new(), ""),
                };
                w.write_record([
                    comp.to_string(),
                    self.n.to_string(),
                    i.to_string(),
                    crate::export::fmt17(coeffs[i]),
                    out,
                    flag.to_string(),
                ])?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        let mut rows = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            if rec.len() != 6 {
                return Err(Error::Parse("expected 6 columns".into()));
            }
            rows.push(rec);
        }
        let parse_f = |s: &str| s.parse::<f64>().map_err(|_| Error::Parse(format!("bad number `{s}`")));
        let parse_u = |s: &str| s.parse::<usize>().map_err(|_| Error::Parse(format!("bad integer `{s}`")));
        let n = parse_u(rows.first().ok_or_else(|| Error::Parse("empty table".into()))?.get(1).unwrap_or(""))?;
        let mut t = OrderNTermTable::new(n, vec![0.0; n + 1], vec![0.0; n + 1])?;
        for rec in &rows {
            let i = parse_u(&rec[2])?;
            if parse_u(&rec[1])? != n || i > n {
                return Err(Error::Parse("inconsistent order or index".into()));
            }
            let outcome = match &rec[5] {
                "1" => TermOutcome::Resonant,
                "0" => TermOutcome::Eliminated(parse_f(&rec[4])?),
                "" => TermOutcome::Pending,
                other => return Err(Error::Parse(format!("bad resonant flag `{other}`"))),
            };
            match &rec[0] {
                "x" => {
                    t.a[i] = parse_f(&rec[3])?;
                    t.c[i] = outcome;
                }
                "y" => {
                    t.b[i] = parse_f(&rec[3])?;
                    t.d[i] = outcome;
                }
                other => return Err(Error::Parse(format!("bad component `{other}`"))),
            }
        }
        Ok(t)
    }
}

/// Marks every order-`n` term as eliminated or resonant.
pub fn eliminate_order_n(lambda: f64, sigma: f64, t: &OrderNTermTable, tol: f64) -> OrderNTermTable {
    let mut out = t.clone();
    for i in 0..=t.n {
        let dc = OrderNTermTable::first_denominator(lambda, sigma, t.n, i);
        out.c[i] = if dc.abs() < tol { TermOutcome::Resonant } else { TermOutcome::Eliminated(t.a[i] / dc) };
        let dd = OrderNTermTable::second_denominator(lambda, sigma, t.n, i);
        out.d[i] = if dd.abs() < tol { TermOutcome::Resonant } else { TermOutcome::Eliminated(t.b[i] / dd) };
    }
    out
}

/// One monomial `coeff · x^px y^py` added to `component` (0 = x, 1 = y).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monomial {
    pub component: usize,
    pub px: u32,
    pub py: u32,
    pub coeff: f64,
}

/// Near-identity change of variables `h(x, y) = (x, y) + Σ monomials`, with the
/// monomials `(component, px, py)` it claims to remove from the conjugated map.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PolyTransform {
    pub terms: Vec<Monomial>,
    pub claimed: Vec<(usize, u32, u32)>,
}

impl PolyTransform {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn apply(&self, z: Point2) -> Point2 {
        let mut out = z;
        for m in &self.terms {
            let v = m.coeff * z.x.powi(m.px as i32) * z.y.powi(m.py as i32);
            if m.component == 0 {
                out.x += v;
            } else {
                out.y += v;
            }
        }
        out
    }

    fn jacobian(&self, z: Point2) -> crate::geometry::Mat2 {
        let mut j = crate::geometry::Mat2::IDENTITY;
        for m in &self.terms {
            let dx = if m.px == 0 { 0.0 } else { m.coeff * m.px as f64 * z.x.powi(m.px as i32 - 1) * z.y.powi(m.py as i32) };
            let dy = if m.py == 0 { 0.0 } else { m.coeff * m.py as f64 * z.x.powi(m.px as i32) * z.y.powi(m.py as i32 - 1) };
            if m.component == 0 {
                j.a11 += dx;
                j.a12 += dy;
            } else {
                j.a21 += dx;
                j.a22 += dy;
            }
        }
        j
    }

    /// Inverse near the origin by Newton from the identity guess.
    pub fn invert(&self, w: Point2) -> Result<Point2> {
        let mut z = w;
        for _ in 0..60 {
            let r = self.apply(z) - w;
            if r.norm() <= 1e-17 * w.norm().max(1e-300) {
                return Ok(z);
            }
            let step = self.jacobian(z).solve(r).ok_or(Error::Singular)?;
            z = z - step;
            if step.norm() <= 1e-18 * z.norm() {
                return Ok(z);
            }
        }
        let r = (self.apply(z) - w).norm();
        if r <= 1e-14 * w.norm().max(1e-300) {
            Ok(z)
        } else {
            Err(Error::NoConvergence { iterations: 60, residual: r })
        }
    }
}

/// Condition number above which a least-squares fit is rejected.
pub const FIT_COND_LIMIT: f64 = 1e10;

/// Coefficients of the degree-≤`order` least-squares fit of `h ∘ f ∘ h⁻¹` on a
/// tensor Chebyshev grid of `(order+3)²` nodes in `window`, keyed by
/// `(component, px, py)`. The window must be centred on the origin.
pub fn fit_conjugated_map<F: Fn(Point2) -> Point2>(
    map: F,
    transform: &PolyTransform,
    order: u32,
    window: Rect,
) -> Result<Vec<((usize, u32, u32), f64)>> {
    if window.center().norm() > 1e-15 * window.diagonal() {
        return Err(Error::Domain("conjugacy window must be centred on the origin".into()));
    }
    let nodes = order as usize + 3;
    let cheb = |i: usize| ((2 * i + 1) as f64 * std::f64::consts::PI / (2 * nodes) as f64).cos();
    let (hx, hy) = (0.5 * window.width(), 0.5 * window.height());
    // Monomials in scaled coordinates s = u/hx, t = v/hy.
    let basis: Vec<(u32, u32)> = (0..=order).flat_map(|d| (0..=d).map(move |j| (d - j, j))).collect();
    let mut design = DMatrix::<f64>::zeros(nodes * nodes, basis.len());
    let mut rhs = [DVector::<f64>::zeros(nodes * nodes), DVector::<f64>::zeros(nodes * nodes)];
    for i in 0..nodes {
        for j in 0..nodes {
            let (s, t) = (cheb(i), cheb(j));
            let row = i * nodes + j;
            for (col, (px, py)) in basis.iter().enumerate() {
                design[(row, col)] = s.powi(*px as i32) * t.powi(*py as i32);
            }
            let w = Point2::new(hx * s, hy * t);
            let g = transform.apply(map(transform.invert(w)?));
            rhs[0][row] = g.x;
            rhs[1][row] = g.y;
        }
    }
    let svd = design.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(cond <= FIT_COND_LIMIT) {
        return Err(Error::Conditioning(cond));
    }
    let mut out = Vec::new();
    for (comp, b) in rhs.iter().enumerate() {
        let sol = svd.solve(b, 0.0).map_err(|e| Error::Domain(e.to_string()))?;
        for (col, (px, py)) in basis.iter().enumerate() {
            let scale = hx.powi(*px as i32) * hy.powi(*py as i32);
            out.push(((comp, *px, *py), sol[col] / scale));
        }
    }
    Ok(out)
}

/// Largest fitted magnitude among the monomials `transform` claims to remove.
pub fn verify_conjugacy<F: Fn(Point2) -> Point2>(
    map: F,
    transform: &PolyTransform,
    order: u32,
    window: Rect,
) -> Result<f64> {
    let coeffs = fit_conjugated_map(map, transform, order, window)?;
    Ok(transform
        .claimed
        .iter()
        .filter_map(|key| coeffs.iter().find(|(k, _)| k == key).map(|(_, v)| v.abs()))
        .fold(0.0, f64::max))
}

/// `(|X_k/(λ^k x) − 1 − k a x y|, |Y_k/(σ^k y) − 1 − k b x y|)` for `U0^k(x, y)`,
/// where `λ` and `a` include the unfolding shifts `μ2`, `μ4`.
///
/// The expansion is only meaningful while `k|xy|` is small.
pub fn t0k_expansion_residual(p: &GrhtMapParams, k: usize, z: Point2) -> Result<(f64, f64)> {
    p.validate()?;
    if z.x == 0.0 || z.y == 0.0 {
        return Err(Error::Domain("expansion residual needs x != 0 and y != 0".into()));
    }
    let h0 = p.h0();
    let mut w = z;
    for j in 0..k {
        if w.y > h0 {
            return Err(Error::RegionEscape { iterate: j });
        }
        w = p.u0(w);
    }
    let lam = p.lambda + p.mu2;
    let a = p.a1 + p.mu4;
    let xy = z.x * z.y;
    let rx = (w.x / (lam.powi(k as i32) * z.x) - 1.0 - k as f64 * a * xy).abs();
    let ry = (w.y / (p.sigma.powi(k as i32) * z.y) - 1.0 - k as f64 * p.b1 * xy).abs();
    Ok((rx, ry))
}

/// Truncated power series in one variable (coefficients, lowest order first).
#[derive(Debug, Clone, PartialEq)]
struct Series(Vec<f64>);

impl Series {
    fn constant(c: f64, len: usize) -> Self {
        let mut v = vec![0.0; len];
        v[0] = c;
        Series(v)
    }

    fn mul(&self, other: &Series) -> Series {
        let n = self.0.len();
        let mut out = vec![0.0; n];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate().take(n - i) {
                out[i + j] += a * b;
            }
        }
        Series(out)
    }

    fn scale(&self, s: f64) -> Series {
        Series(self.0.iter().map(|v| v * s).collect())
    }

    fn add_const(&self, c: f64) -> Series {
        let mut v = self.0.clone();
        v[0] += c;
        Series(v)
    }
}

/// Coefficient of `xy` in `x''/(λ² x) − 1` for two iterates of
/// `x' = λx(1 + xyF)`, `y' = σy(1 + xyG)`, computed by exact series
/// arithmetic in `P = xy`. Depends on `λσ` only through `product`.
///
/// Equals `F(1 + λσ)`: `2F` when `λσ = 1` and exactly 0 when `λσ = −1`.
pub fn second_iterate_xy_coefficient(product: f64, f: f64, g: f64) -> f64 {
    let len = 3;
    let mut p = Series(vec![0.0; len]);
    p.0[1] = 1.0;
    // First iterate: x'/(λx) = 1 + PF, y'/(σy) = 1 + PG, P' = λσ P (1+PF)(1+PG).
    let fx1 = p.scale(f).add_const(1.0);
    let fy1 = p.scale(g).add_const(1.0);
    let p1 = p.scale(product).mul(&fx1).mul(&fy1);
    let fx2 = p1.scale(f).add_const(1.0);
    let ratio = fx1.mul(&fx2).mul(&Series::constant(1.0, len));
    ratio.0[1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn resonance_examples() {
        let r = detect_resonances(0.8, 1.25, 10, 1e-12).unwrap();
        assert!(r.contains(1, 1));
        let r = detect_resonances(0.8, -1.25, 10, 1e-12).unwrap();
        assert!(r.contains(2, 2) && !r.contains(1, 1));
        assert!(detect_resonances(0.5, 3.0, 10, 1e-12).unwrap().pairs.is_empty());
        assert!(detect_resonances(1.5, 3.0, 10, 1e-12).is_err());
    }

    #[test]
    fn quadratic_elimination_examples() {
        let q = eliminate_quadratic(0.5, 2.0, QuadraticCoeffs::new([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]), 1e-12).unwrap();
        assert_eq!(q.c[0], 4.0);
        assert_eq!(q.d[1], 1.0);
        let err = eliminate_quadratic(0.5, 1.0 / 0.5, QuadraticCoeffs::new([0.0; 3], [0.0; 3]), 10.0).unwrap_err();
        assert!(matches!(err, Error::ResonanceObstruction { .. }));
    }

    #[test]
    fn order_three_resonant_term() {
        let t = OrderNTermTable::new(3, vec![1.0; 4], vec![1.0; 4]).unwrap();
        let e = eliminate_order_n(0.8, 1.25, &t, 1e-12);
        assert_eq!(e.c[1], TermOutcome::Resonant);
        assert!(matches!(e.c[0], TermOutcome::Eliminated(_)));
        let e = eliminate_order_n(0.8, -1.25, &t, 1e-12);
        assert!(matches!(e.c[1], TermOutcome::Eliminated(v) if (v - 1.0 / 1.6).abs() < 1e-12));
    }

    #[test]
    fn table_csv_round_trip() {
        let t = OrderNTermTable::new(3, vec![1.0, 0.5, -0.25, 2.0], vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let e = eliminate_order_n(0.8, 1.25, &t, 1e-12);
        let back = OrderNTermTable::from_csv(&e.to_csv().unwrap()).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn identity_transform_on_linear_map() {
        let r = verify_conjugacy(
            |z| Point2::new(0.5 * z.x, 2.0 * z.y),
            &PolyTransform { terms: vec![], claimed: vec![(0, 2, 0), (1, 1, 1)] },
            4,
            Rect::new(-0.1, 0.1, -0.1, 0.1),
        )
        .unwrap();
        assert!(r < 1e-12, "{r}");
    }

    #[test]
    fn conjugacy_removes_quadratic_terms() {
        let (l, s) = (0.5, 2.0);
        let q = QuadraticCoeffs::new([1.0, -0.5, 0.25], [0.3, 0.7, -0.2]);
        let e = eliminate_quadratic(l, s, q, 1e-12).unwrap();
        let w = Rect::new(-1e-2, 1e-2, -1e-2, 1e-2);
        let r = verify_conjugacy(|z| q.eval_map(l, s, z), &e.transform(), 8, w).unwrap();
        assert!(r < 1e-8, "{r}");
        let mut bad = e;
        bad.c[0] = -bad.c[0];
        let r = verify_conjugacy(|z| q.eval_map(l, s, z), &bad.transform(), 8, w).unwrap();
        assert!(r >= 0.5 * q.a[0].abs(), "{r}");
    }

    #[test]
    fn t0k_residual_cases() {
        let (rx, ry) = t0k_expansion_residual(&GrhtMapParams::param1(), 12, Point2::new(1.0, 0.8f64.powi(12))).unwrap();
        assert!(rx < 1e-15 && ry < 1e-15);
        let p = GrhtMapParams::toy_unfold();
        let k = 20;
        let (rx, _) = t0k_expansion_residual(&p, k, Point2::new(1.0, 0.8f64.powi(k as i32))).unwrap();
        let c = rx / ((k * k) as f64 * 0.8f64.powi(2 * k as i32));
        assert!(c > 0.005 && c < 0.05, "{c}");
        assert!(matches!(
            t0k_expansion_residual(&p, 3, Point2::new(1.0, 0.9)),
            Err(Error::RegionEscape { iterate: 0 })
        ));
    }

    #[test]
    fn second_iterate_cancellation() {
        assert_eq!(second_iterate_xy_coefficient(-1.0, 0.37, -1.2), 0.0);
        assert_relative_eq!(second_iterate_xy_coefficient(1.0, 0.37, -1.2), 0.74, epsilon = 1e-15);
    }
}

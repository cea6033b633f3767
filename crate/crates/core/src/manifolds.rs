//! Stable and unstable manifolds of saddle fixed points, their intersections,
//! tangency location by bisection, and the global coefficient `d1` measured
//! along a homoclinic orbit.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{Eigenvalues, Mat2, Point2, Rect};
use crate::maps::{HenonMap, HenonMapParams, PlanarMap, Preimages};

/// Fixed-point residual accepted by [`saddle_frame`].
pub const FIXED_POINT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddleFrame {
    pub point: Point2,
    pub lambda_s: f64,
    pub v_s: Point2,
    pub lambda_u: f64,
    pub v_u: Point2,
}

impl SaddleFrame {
    /// `(s, u)` with `z − point = s·v_s + u·v_u`.
    pub fn coordinates(&self, z: Point2) -> Result<(f64, f64)> {
        let c = Mat2::from_columns(self.v_s, self.v_u).solve(z - self.point).ok_or(Error::SingularBasis)?;
        Ok((c.x, c.y))
    }
}

/// Eigen-frame of a saddle fixed point; eigenvectors are unit length with the
/// first nonzero component positive.
pub fn saddle_frame<M: PlanarMap + ?Sized>(map: &M, point: Point2) -> Result<SaddleFrame> {
    let res = (map.eval(point) - point).norm();
    if !(res <= FIXED_POINT_TOL * (1.0 + point.norm())) {
        return Err(Error::NotASaddle(format!("({}, {}) is not a fixed point (residual {res:e})", point.x, point.y)));
    }
    let j = map.jacobian(point);
    match j.eigenvalues() {
        Eigenvalues::Real(s, u) if s.abs() < 1.0 && u.abs() > 1.0 => {
            Ok(SaddleFrame { point, lambda_s: s, v_s: j.eigenvector(s), lambda_u: u, v_u: j.eigenvector(u) })
        }
        Eigenvalues::Real(s, u) => Err(Error::NotASaddle(format!("eigenvalues {s}, {u}"))),
        Eigenvalues::Complex { re, im } => Err(Error::NotASaddle(format!("eigenvalues {re} ± {im}i"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ManifoldKind {
    Stable,
    Unstable,
}

impl ManifoldKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ManifoldKind::Stable => "stable",
            ManifoldKind::Unstable => "unstable",
        }
    }
}

/// A polyline approximation of one side of a manifold. Point `i` is joined to
/// point `i − 1` unless `i` is listed in `breaks`.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldBranch {
    pub kind: ManifoldKind,
    /// `+1` or `−1`: which half of the eigendirection was seeded.
    pub side: i8,
    /// Deepest image (unstable) or preimage (stable) generation present.
    pub generation: usize,
    pub polyline: Vec<Point2>,
    pub point_generation: Vec<usize>,
    /// Sorted indices that start a new connected piece.
    pub breaks: Vec<usize>,
    /// False when some preimage search could not certify completeness.
    pub complete: bool,
    /// Points dropped because their orbit left the bounding box.
    pub truncated: usize,
}

impl ManifoldBranch {
    fn empty(kind: ManifoldKind, side: i8) -> Self {
        Self {
            kind,
            side,
            generation: 0,
            polyline: Vec::new(),
            point_generation: Vec::new(),
            breaks: Vec::new(),
            complete: true,
            truncated: 0,
        }
    }

    fn push_piece(&mut self, generation: usize, piece: &[Point2]) {
        if piece.is_empty() {
            return;
        }
        if !self.polyline.is_empty() {
            self.breaks.push(self.polyline.len());
        }
        self.polyline.extend_from_slice(piece);
        self.point_generation.extend(std::iter::repeat(generation).take(piece.len()));
        self.generation = self.generation.max(generation);
    }

    pub fn len(&self) -> usize {
        self.polyline.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polyline.is_empty()
    }

    /// Connected segments `(a, b)`.
    pub fn segments(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let mut next_break = 0;
        (1..self.polyline.len()).filter_map(move |i| {
            while next_break < self.breaks.len() && self.breaks[next_break] < i {
                next_break += 1;
            }
            if next_break < self.breaks.len() && self.breaks[next_break] == i {
                None
            } else {
                Some((self.polyline[i - 1], self.polyline[i]))
            }
        })
    }

    /// Connected pieces as slices of `polyline`.
    pub fn pieces(&self) -> impl Iterator<Item = &[Point2]> + '_ {
        let mut bounds = vec![0];
        bounds.extend_from_slice(&self.breaks);
        bounds.push(self.polyline.len());
        (0..bounds.len() - 1).map(move |i| &self.polyline[bounds[i]..bounds[i + 1]])
    }

    /// Concatenates branches of one kind into a single branch with breaks.
    pub fn merge(branches: &[ManifoldBranch]) -> ManifoldBranch {
        let kind = branches.first().map_or(ManifoldKind::Stable, |b| b.kind);
        let side = branches.first().map_or(1, |b| b.side);
        let mut out = ManifoldBranch::empty(kind, side);
        for b in branches {
            let offset = out.polyline.len();
            if offset > 0 && !b.is_empty() {
                out.breaks.push(offset);
            }
            out.breaks.extend(b.breaks.iter().map(|i| i + offset));
            out.polyline.extend_from_slice(&b.polyline);
            out.point_generation.extend_from_slice(&b.point_generation);
            out.generation = out.generation.max(b.generation);
            out.complete &= b.complete;
            out.truncated += b.truncated;
        }
        out
    }

    /// Largest distance from `z` to the nearest polyline segment.
    pub fn distance_to(&self, z: Point2) -> f64 {
        let seg = self.segments().map(|(a, b)| segment_point_distance(a, b, z)).fold(f64::INFINITY, f64::min);
        let pts = self.polyline.iter().map(|p| p.dist(z)).fold(f64::INFINITY, f64::min);
        seg.min(pts)
    }
}

fn segment_point_distance(a: Point2, b: Point2, z: Point2) -> f64 {
    let d = b - a;
    let l2 = d.dot(d);
    let t = if l2 > 0.0 { ((z - a).dot(d) / l2).clamp(0.0, 1.0) } else { 0.0 };
    a.lerp(b, t).dist(z)
}

/// Growth controls shared by both manifold kinds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManifoldOptions {
    /// Points leaving this box are dropped and split their polyline.
    pub bounds: Rect,
    /// Maximum spacing between consecutive points inside `bounds`.
    pub max_segment: f64,
    /// Optional region resolved with the finer spacing `focus_segment`.
    pub focus: Option<Rect>,
    pub focus_segment: f64,
    /// Inserted points per generation are capped at `(growth_cap − 1)` times the
    /// count carried over from the previous generation.
    pub growth_cap: f64,
    pub max_points: usize,
    /// Maximum number of bisections of one source segment.
    pub max_refine_depth: u32,
    /// Full preimage scans run every `scan_stride` source points to pick up
    /// strands born inside a segment (stable growth only).
    pub scan_stride: usize,
}

impl ManifoldOptions {
    /// Spacing `1e−2` of the window diagonal inside `window`.
    pub fn for_window(window: Rect) -> Self {
        let d = window.diagonal();
        Self {
            bounds: window,
            max_segment: 1e-2 * d,
            focus: None,
            focus_segment: 1e-2 * d,
            growth_cap: 2.0,
            max_points: 400_000,
            max_refine_depth: 24,
            scan_stride: 16,
        }
    }

    pub fn with_focus(mut self, focus: Rect, segment: f64) -> Self {
        self.focus = Some(focus);
        self.focus_segment = segment;
        self
    }

    fn segment_limit(&self, a: Point2, b: Point2) -> f64 {
        match self.focus {
            Some(f) if boxes_overlap(f, a, b) => self.focus_segment.min(self.max_segment),
            _ => self.max_segment,
        }
    }
}

fn boxes_overlap(r: Rect, a: Point2, b: Point2) -> bool {
    a.x.min(b.x) <= r.xmax && a.x.max(b.x) >= r.xmin && a.y.min(b.y) <= r.ymax && a.y.max(b.y) >= r.ymin
}

fn inside(r: &Rect, z: Point2) -> bool {
    z.is_finite() && r.contains(z)
}

/// Unstable branch on side `side` of the saddle: `n_points` seeds on the segment
/// `[C, f(C)]` (or `[C, f²(C)]` when `λ_u < 0`) with `C = p + side·offset·v_u`,
/// carried forward `n_generations` times.
///
/// Every point is an exact forward image of a seed, so inserted points do not
/// accumulate interpolation error; the parent of an inserted point is added to
/// the previous generation so each point has its preimage in the branch.
pub fn grow_unstable<M: PlanarMap + ?Sized>(
    map: &M,
    frame: &SaddleFrame,
    side: i8,
    seed_offset: f64,
    n_points: usize,
    n_generations: usize,
    opts: &ManifoldOptions,
) -> Result<ManifoldBranch> {
    validate_growth(side, seed_offset, n_points)?;
    let sign = f64::from(side.signum());
    let steps = if frame.lambda_u < 0.0 { 2 } else { 1 };
    let c = frame.point + frame.v_u * (sign * seed_offset);
    let b = map.iterate(c, steps);
    let seed = |s: f64| c.lerp(b, s);
    // Each piece of a generation: (seed parameter, position), sorted by parameter.
    let mut gens: Vec<Vec<Vec<(f64, Point2)>>> = Vec::with_capacity(n_generations + 1);
    let mut truncated = 0;
    let first: Vec<(f64, Point2)> =
        (0..n_points).map(|i| i as f64 / (n_points - 1) as f64).map(|s| (s, seed(s))).collect();
    gens.push(split_outside(first, &opts.bounds, &mut truncated));
    let mut total: usize = gens[0].iter().map(Vec::len).sum();

    for g in 1..=n_generations {
        let prev = &gens[g - 1];
        let carried: usize = prev.iter().map(Vec::len).sum();
        if carried == 0 {
            break;
        }
        let mut budget = ((opts.growth_cap - 1.0).max(0.0) * carried as f64) as usize;
        let mut next = Vec::new();
        let mut parents: Vec<(f64, Point2)> = Vec::new();
        for piece in prev {
            let mut cur: Vec<(f64, Point2)> = Vec::with_capacity(piece.len());
            for &(s, z) in piece {
                let fz = map.eval(z);
                if !inside(&opts.bounds, fz) {
                    truncated += 1;
                    if cur.len() > 1 {
                        next.push(std::mem::take(&mut cur));
                    } else {
                        cur.clear();
                    }
                    continue;
                }
                if let Some(&(s0, f0)) = cur.last() {
                    let mut fill = Vec::new();
                    refine_forward(map, &seed, g, (s0, f0), (s, fz), opts, 0, &mut budget, &mut fill);
                    for (sm, parent, image) in fill {
                        match image {
                            Some(image) => {
                                parents.push((sm, parent));
                                cur.push((sm, image));
                            }
                            // The curve leaves the box between two samples.
                            None => {
                                truncated += 1;
                                if cur.len() > 1 {
                                    next.push(std::mem::take(&mut cur));
                                } else {
                                    cur.clear();
                                }
                            }
                        }
                    }
                }
                cur.push((s, fz));
            }
            if cur.len() > 1 {
                next.push(cur);
            }
        }
        total += next.iter().map(Vec::len).sum::<usize>() + parents.len();
        insert_by_parameter(&mut gens[g - 1], parents);
        gens.push(next);
        if total >= opts.max_points {
            break;
        }
    }

    // A parent can land in a fold of its generation that the samples skipped;
    // re-refine top-down so every generation meets the spacing bound again.
    let mut budget = opts.max_points;
    for g in (0..gens.len().saturating_sub(1)).rev() {
        let mut repaired = Vec::with_capacity(gens[g].len());
        let mut parents = Vec::new();
        for piece in std::mem::take(&mut gens[g]) {
            let mut cur: Vec<(f64, Point2)> = Vec::with_capacity(piece.len());
            for node in piece {
                if let Some(&last) = cur.last() {
                    let mut fill = Vec::new();
                    if g == 0 {
                        refine_seed(&seed, last, node, opts, 0, &mut budget, &mut fill);
                    } else {
                        refine_forward(map, &seed, g, last, node, opts, 0, &mut budget, &mut fill);
                    }
                    for (sm, parent, image) in fill {
                        match image {
                            Some(image) => {
                                if g > 0 {
                                    parents.push((sm, parent));
                                }
                                cur.push((sm, image));
                            }
                            None => {
                                truncated += 1;
                                if cur.len() > 1 {
                                    repaired.push(std::mem::take(&mut cur));
                                } else {
                                    cur.clear();
                                }
                            }
                        }
                    }
                }
                cur.push(node);
            }
            if cur.len() > 1 {
                repaired.push(cur);
            }
        }
        gens[g] = repaired;
        if g > 0 {
            insert_by_parameter(&mut gens[g - 1], parents);
        }
    }

    let mut out = ManifoldBranch::empty(ManifoldKind::Unstable, side);
    out.truncated = truncated;
    for (g, pieces) in gens.iter().enumerate() {
        for piece in pieces {
            let pts: Vec<Point2> = piece.iter().map(|q| q.1).collect();
            let joins = steps == 1
                && out.polyline.last().is_some_and(|last: &Point2| last.dist(pts[0]) <= opts.max_segment)
                && out.point_generation.last() == Some(&(g.max(1) - 1))
                && g > 0;
            if joins {
                out.polyline.extend_from_slice(&pts);
                out.point_generation.extend(std::iter::repeat(g).take(pts.len()));
                out.generation = out.generation.max(g);
            } else {
                out.push_piece(g, &pts);
            }
        }
    }
    Ok(out)
}

/// Inserts `(s, z)` nodes into the piece whose parameter range contains `s`;
/// nodes falling between pieces are dropped.
fn insert_by_parameter(pieces: &mut [Vec<(f64, Point2)>], nodes: Vec<(f64, Point2)>) {
    for node in nodes {
        let idx = pieces.partition_point(|p| p.first().is_some_and(|q| q.0 <= node.0));
        if idx == 0 {
            continue;
        }
        let piece = &mut pieces[idx - 1];
        if piece.last().is_some_and(|q| q.0 >= node.0) {
            let at = piece.partition_point(|q| q.0 < node.0);
            if piece.get(at).map_or(true, |q| q.0 != node.0) {
                piece.insert(at, node);
            }
        }
    }
}

/// `refine_forward` for generation 0, where points lie on the seed segment.
fn refine_seed<F: Fn(f64) -> Point2>(
    seed: &F,
    a: (f64, Point2),
    b: (f64, Point2),
    opts: &ManifoldOptions,
    depth: u32,
    budget: &mut usize,
    out: &mut Vec<(f64, Point2, Option<Point2>)>,
) {
    if a.1.dist(b.1) <= opts.segment_limit(a.1, b.1) || depth >= opts.max_refine_depth || *budget == 0 {
        return;
    }
    let sm = 0.5 * (a.0 + b.0);
    let z = seed(sm);
    *budget -= 1;
    refine_seed(seed, a, (sm, z), opts, depth + 1, budget, out);
    out.push((sm, z, Some(z)));
    refine_seed(seed, (sm, z), b, opts, depth + 1, budget, out);
}

fn validate_growth(side: i8, seed_offset: f64, n_points: usize) -> Result<()> {
    if side == 0 {
        return Err(Error::InvalidParams("side must be +1 or -1".into()));
    }
    if !(seed_offset > 0.0 && seed_offset.is_finite()) {
        return Err(Error::InvalidParams("seed offset must be positive".into()));
    }
    if n_points < 2 {
        return Err(Error::InvalidParams("need at least two seed points".into()));
    }
    Ok(())
}

fn split_outside(nodes: Vec<(f64, Point2)>, bounds: &Rect, truncated: &mut usize) -> Vec<Vec<(f64, Point2)>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    for n in nodes {
        if inside(bounds, n.1) {
            cur.push(n);
        } else {
            *truncated += 1;
            if cur.len() > 1 {
                out.push(std::mem::take(&mut cur));
            } else {
                cur.clear();
            }
        }
    }
    if cur.len() > 1 {
        out.push(cur);
    }
    out
}

/// Bisects the seed interval `(s0, s1)` until the generation-`g` images are
/// within the spacing bound; pushes `(s, f^{g−1}(seed(s)), f^g(seed(s)))` in
/// order, with `None` in place of an image that left the box.
#[allow(clippy::too_many_arguments)]
fn refine_forward<M: PlanarMap + ?Sized, F: Fn(f64) -> Point2>(
    map: &M,
    seed: &F,
    g: usize,
    a: (f64, Point2),
    b: (f64, Point2),
    opts: &ManifoldOptions,
    depth: u32,
    budget: &mut usize,
    out: &mut Vec<(f64, Point2, Option<Point2>)>,
) {
    if a.1.dist(b.1) <= opts.segment_limit(a.1, b.1) || depth >= opts.max_refine_depth || *budget == 0 {
        return;
    }
    let sm = 0.5 * (a.0 + b.0);
    if sm <= a.0 || sm >= b.0 {
        return;
    }
    let parent = map.iterate(seed(sm), g - 1);
    let image = map.eval(parent);
    if !inside(&opts.bounds, image) {
        out.push((sm, parent, None));
        return;
    }
    *budget -= 1;
    refine_forward(map, seed, g, a, (sm, image), opts, depth + 1, budget, out);
    out.push((sm, parent, Some(image)));
    refine_forward(map, seed, g, (sm, image), b, opts, depth + 1, budget, out);
}

/// Stable strands on side `side`: a fundamental domain `[f(C), C]` (or
/// `[f²(C), C]` when `λ_s < 0`) on the stable eigendirection, pulled back
/// `depth` times. Each returned branch is one preimage strand of one generation;
/// non-invertible maps produce several strands per generation.
pub fn grow_stable<M: Preimages + ?Sized>(
    map: &M,
    frame: &SaddleFrame,
    side: i8,
    seed_offset: f64,
    n_points: usize,
    depth: usize,
    opts: &ManifoldOptions,
) -> Result<Vec<ManifoldBranch>> {
    validate_growth(side, seed_offset, n_points)?;
    let sign = f64::from(side.signum());
    let steps = if frame.lambda_s < 0.0 { 2 } else { 1 };
    let c = frame.point + frame.v_s * (sign * seed_offset);
    let b = map.iterate(c, steps);
    let first: Vec<Point2> = (0..n_points).map(|i| b.lerp(c, i as f64 / (n_points - 1) as f64)).collect();
    let mut branches = Vec::new();
    let mut seed_branch = ManifoldBranch::empty(ManifoldKind::Stable, side);
    seed_branch.push_piece(0, &first);
    branches.push(seed_branch);
    let mut prev: Vec<Vec<Point2>> = vec![first];
    let mut total = n_points;
    for g in 1..=depth {
        let carried: usize = prev.iter().map(Vec::len).sum();
        let mut budget = ((opts.growth_cap - 1.0).max(0.0) * carried as f64) as usize;
        let mut next = Vec::new();
        for piece in &prev {
            let (strands, complete) = pull_back(map, piece, opts, &mut budget)?;
            for s in strands {
                let mut br = ManifoldBranch::empty(ManifoldKind::Stable, side);
                br.complete = complete;
                br.push_piece(g, &s);
                branches.push(br);
                next.push(s);
            }
        }
        total += next.iter().map(Vec::len).sum::<usize>();
        prev = next;
        if prev.is_empty() || total >= opts.max_points {
            break;
        }
    }
    Ok(branches)
}

/// All continuous preimage strands of the polyline `piece`.
fn pull_back<M: Preimages + ?Sized>(
    map: &M,
    piece: &[Point2],
    opts: &ManifoldOptions,
    budget: &mut usize,
) -> Result<(Vec<Vec<Point2>>, bool)> {
    let mut done: Vec<Vec<Point2>> = Vec::new();
    let mut active: Vec<Vec<Point2>> = Vec::new();
    let mut complete = true;
    let stride = opts.scan_stride.max(1);
    for i in 0..piece.len() {
        if i > 0 {
            let mut kept = Vec::with_capacity(active.len());
            for mut t in active.drain(..) {
                let q = *t.last().expect("nonempty track");
                match track_step(map, q, piece[i - 1], piece[i], opts, 0, budget) {
                    Some(pts) => {
                        t.extend(pts);
                        kept.push(t);
                    }
                    None => done.push(t),
                }
            }
            // Two tracks meeting on one branch: keep the first.
            let mut merged: Vec<Vec<Point2>> = Vec::with_capacity(kept.len());
            for t in kept {
                let last = *t.last().expect("nonempty");
                if merged.iter().any(|m| m.last().expect("nonempty").dist(last) <= 1e-9 * (1.0 + last.norm())) {
                    done.push(t);
                } else {
                    merged.push(t);
                }
            }
            active = merged;
        }
        if i % stride == 0 || i + 1 == piece.len() {
            let set = map.preimages(piece[i], opts.bounds)?;
            complete &= set.complete;
            for z in set.points {
                if !inside(&opts.bounds, z) {
                    continue;
                }
                let tol = 1e-7 * (1.0 + z.norm());
                if !active.iter().any(|t| t.last().expect("nonempty").dist(z) <= tol) {
                    active.push(vec![z]);
                }
            }
        }
    }
    done.extend(active);
    done.retain(|t| t.len() > 1);
    Ok((done, complete))
}

/// Continues a local inverse from `q` (a preimage of `t0`) to a preimage of `t1`,
/// bisecting the target segment when the step is too long or jumps branches.
fn track_step<M: Preimages + ?Sized>(
    map: &M,
    q: Point2,
    t0: Point2,
    t1: Point2,
    opts: &ManifoldOptions,
    depth: u32,
    budget: &mut usize,
) -> Option<Vec<Point2>> {
    // `spaced` enforces the segment limit; without it only branch consistency is checked.
    let attempt = |spaced: bool| -> Option<Point2> {
        let pred = q + map.jacobian(q).solve(t1 - t0)?;
        let z = map.local_inverse(t1, pred)?;
        let ok = inside(&opts.bounds, z)
            && (!spaced || z.dist(q) <= opts.segment_limit(q, z))
            && z.dist(pred) <= 0.25 * pred.dist(q) + 1e-12 * (1.0 + z.norm());
        ok.then_some(z)
    };
    if let Some(z) = attempt(true) {
        return Some(vec![z]);
    }
    if depth >= opts.max_refine_depth || *budget == 0 {
        // Out of refinement: a coarser step keeps the strand connected.
        return attempt(false).map(|z| vec![z]);
    }
    *budget -= 1;
    let tm = t0.lerp(t1, 0.5);
    let mut a = track_step(map, q, t0, tm, opts, depth + 1, budget)?;
    let b = track_step(map, *a.last().expect("nonempty"), tm, t1, opts, depth + 1, budget)?;
    a.extend(b);
    Some(a)
}

/// Crossing and near-contact points between two polylines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContactKind {
    /// Segments cross at a nonzero angle.
    Transversal,
    /// Segments come within the tolerance without crossing, as at a tangency.
    Tangential,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intersection {
    pub point: Point2,
    pub kind: ContactKind,
    /// Distance between the two segments (0 for a crossing).
    pub gap: f64,
}

/// All transversal crossings of `ws` and `wu`, deduplicated within `tol`.
pub fn transversal_crossings(ws: &ManifoldBranch, wu: &ManifoldBranch, tol: f64) -> Vec<Point2> {
    classify_intersections(ws, wu, 0.0, tol)
        .into_iter()
        .filter(|i| i.kind == ContactKind::Transversal)
        .map(|i| i.point)
        .collect()
}

/// Points where the polylines cross, plus local near-contacts within `tol`
/// (a tangency does not produce a crossing of the sampled curves).
pub fn homoclinic_intersections(ws: &ManifoldBranch, wu: &ManifoldBranch, tol: f64) -> Vec<Point2> {
    classify_intersections(ws, wu, tol, tol).into_iter().map(|i| i.point).collect()
}

/// Crossings (deduplicated within `dedup`) and contacts closer than `contact_tol`.
pub fn classify_intersections(ws: &ManifoldBranch, wu: &ManifoldBranch, contact_tol: f64, dedup: f64) -> Vec<Intersection> {
    let a: Vec<(Point2, Point2)> = ws.segments().collect();
    let b: Vec<(Point2, Point2)> = wu.segments().collect();
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let index = SegmentGrid::new(&b, contact_tol);
    let mut crossings = Vec::new();
    let mut contacts: Vec<(Intersection, f64)> = Vec::new();
    let mut cand = Vec::new();
    for &(p, q) in &a {
        index.candidates(p, q, contact_tol, &mut cand);
        for &j in &cand {
            let (r, s) = b[j];
            if let Some(x) = segment_crossing(p, q, r, s) {
                crossings.push(x);
            } else if contact_tol > 0.0 {
                let (gap, at) = segment_gap(p, q, r, s);
                if gap <= contact_tol {
                    let reach = p.dist(q) + r.dist(s) + contact_tol;
                    contacts.push((Intersection { point: at, kind: ContactKind::Tangential, gap }, reach));
                }
            }
        }
    }
    let mut out: Vec<Intersection> = Vec::new();
    for x in crossings {
        if !out.iter().any(|o| o.point.dist(x) <= dedup) {
            out.push(Intersection { point: x, kind: ContactKind::Transversal, gap: 0.0 });
        }
    }
    contacts.sort_by(|u, v| u.0.gap.total_cmp(&v.0.gap));
    let mut accepted: Vec<(Intersection, f64)> = Vec::new();
    for (c, reach) in contacts {
        let near_crossing = out.iter().any(|o| o.point.dist(c.point) <= reach);
        let near_contact = accepted.iter().any(|(o, r)| o.point.dist(c.point) <= reach.max(*r));
        if !near_crossing && !near_contact {
            accepted.push((c, reach));
        }
    }
    out.extend(accepted.into_iter().map(|(c, _)| c));
    out
}

/// Proper or endpoint crossing of two non-parallel segments.
fn segment_crossing(p: Point2, q: Point2, r: Point2, s: Point2) -> Option<Point2> {
    let d1 = q - p;
    let d2 = s - r;
    let den = d1.cross(d2);
    if den.abs() <= 1e-14 * d1.norm() * d2.norm() || den == 0.0 {
        return None;
    }
    let w = r - p;
    let t = w.cross(d2) / den;
    let u = w.cross(d1) / den;
    ((0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u)).then(|| p + d1 * t)
}

/// Distance between non-crossing segments and the midpoint of the closest pair.
fn segment_gap(p: Point2, q: Point2, r: Point2, s: Point2) -> (f64, Point2) {
    let closest = |a: Point2, b: Point2, z: Point2| {
        let d = b - a;
        let l2 = d.dot(d);
        let t = if l2 > 0.0 { ((z - a).dot(d) / l2).clamp(0.0, 1.0) } else { 0.0 };
        a.lerp(b, t)
    };
    [(p, closest(r, s, p)), (q, closest(r, s, q)), (closest(p, q, r), r), (closest(p, q, s), s)]
        .into_iter()
        .map(|(u, v)| (u.dist(v), u.lerp(v, 0.5)))
        .min_by(|x, y| x.0.total_cmp(&y.0))
        .expect("four candidates")
}

/// Uniform bucket grid over segment bounding boxes.
struct SegmentGrid {
    origin: Point2,
    cell: f64,
    buckets: HashMap<(i64, i64), Vec<usize>>,
    oversized: Vec<usize>,
}

const MAX_CELLS_PER_SEGMENT: i64 = 64;

impl SegmentGrid {
    fn new(segs: &[(Point2, Point2)], pad: f64) -> Self {
        let mut lens: Vec<f64> = segs.iter().map(|(a, b)| a.dist(*b)).filter(|l| *l > 0.0).collect();
        lens.sort_by(f64::total_cmp);
        let median = lens.get(lens.len() / 2).copied().unwrap_or(1.0);
        let cell = (2.0 * median).max(2.0 * pad).max(1e-12);
        let origin = segs
            .iter()
            .flat_map(|(a, b)| [*a, *b])
            .fold(Point2::new(f64::INFINITY, f64::INFINITY), |m, p| Point2::new(m.x.min(p.x), m.y.min(p.y)));
        let mut g = Self { origin, cell, buckets: HashMap::new(), oversized: Vec::new() };
        for (i, &(a, b)) in segs.iter().enumerate() {
            let (i0, i1, j0, j1) = g.cell_range(a, b, pad);
            if (i1 - i0 + 1) * (j1 - j0 + 1) > MAX_CELLS_PER_SEGMENT {
                g.oversized.push(i);
                continue;
            }
            for ci in i0..=i1 {
                for cj in j0..=j1 {
                    g.buckets.entry((ci, cj)).or_default().push(i);
                }
            }
        }
        g
    }

    fn cell_range(&self, a: Point2, b: Point2, pad: f64) -> (i64, i64, i64, i64) {
        let f = |v: f64, o: f64| ((v - o) / self.cell).floor() as i64;
        (
            f(a.x.min(b.x) - pad, self.origin.x),
            f(a.x.max(b.x) + pad, self.origin.x),
            f(a.y.min(b.y) - pad, self.origin.y),
            f(a.y.max(b.y) + pad, self.origin.y),
        )
    }

    fn candidates(&self, a: Point2, b: Point2, pad: f64, out: &mut Vec<usize>) {
        out.clear();
        let (i0, i1, j0, j1) = self.cell_range(a, b, pad);
        if (i1 - i0 + 1) * (j1 - j0 + 1) > MAX_CELLS_PER_SEGMENT * MAX_CELLS_PER_SEGMENT {
            out.extend(self.buckets.values().flatten().copied());
        } else {
            for ci in i0..=i1 {
                for cj in j0..=j1 {
                    if let Some(v) = self.buckets.get(&(ci, cj)) {
                        out.extend_from_slice(v);
                    }
                }
            }
        }
        out.extend_from_slice(&self.oversized);
        out.sort_unstable();
        out.dedup();
    }
}

/// Number of transversal crossings of `ws` and `wu` inside `window`.
pub fn local_crossing_count(ws: &ManifoldBranch, wu: &ManifoldBranch, window: &Rect) -> usize {
    transversal_crossings(ws, wu, 1e-12).into_iter().filter(|p| window.contains(*p)).count()
}

/// Bisection on a change of the local intersection count `count(param)`.
///
/// Every iterate keeps a bracket whose end counts differ; returns the midpoint
/// once the bracket is narrower than `width`.
pub fn tangency_bisection<F>(count: F, bracket: [f64; 2], width: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<usize>,
{
    let [mut lo, mut hi] = bracket;
    if !(lo < hi) {
        return Err(Error::BadBracket { lo, hi });
    }
    let c_lo = count(lo)?;
    let c_hi = count(hi)?;
    if c_lo == c_hi {
        return Err(Error::BadBracket { lo, hi });
    }
    while hi - lo >= width {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count(mid)? == c_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Manifold-growth recipe used to count intersections near a tangency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangencySetup {
    /// Crossings are counted inside this window.
    pub window: Rect,
    pub seed_offset: f64,
    pub n_points: usize,
    pub unstable_generations: usize,
    pub stable_depth: usize,
    pub unstable_sides: [bool; 2],
    pub stable_sides: [bool; 2],
    /// Crossings closer than this to the saddle are ignored: there the two local
    /// branches meet and chord crossings are artefacts of the discretisation.
    pub exclusion_radius: f64,
    pub opts: ManifoldOptions,
}

impl TangencySetup {
    /// Recipe for the generalised Hénon map near its first tangency in `R`: the
    /// positive-side branches grown from a `1e-3` fundamental domain over 40
    /// generations, counted over `[-8, 3]²` outside a `0.05` disc at the saddle.
    pub fn henon_default() -> Self {
        let window = Rect::new(-8.0, 3.0, -8.0, 3.0);
        Self {
            window,
            seed_offset: 1e-3,
            n_points: 50,
            unstable_generations: 40,
            stable_depth: 40,
            unstable_sides: [true, false],
            stable_sides: [true, false],
            exclusion_radius: 0.05,
            opts: ManifoldOptions { max_points: 200_000, max_segment: 1e-2, ..ManifoldOptions::for_window(window) },
        }
    }

    fn sides(flags: [bool; 2]) -> impl Iterator<Item = i8> {
        [(flags[0], 1i8), (flags[1], -1i8)].into_iter().filter(|s| s.0).map(|s| s.1)
    }
}

/// Grows the requested branches at the saddle `frame` and counts crossings in the window.
pub fn intersection_count<M: Preimages + ?Sized>(map: &M, frame: &SaddleFrame, setup: &TangencySetup) -> Result<usize> {
    let (wu, ws) = grow_pair(map, frame, setup)?;
    Ok(transversal_crossings(&ws, &wu, 1e-12)
        .into_iter()
        .filter(|p| setup.window.contains(*p) && p.dist(frame.point) >= setup.exclusion_radius)
        .count())
}

/// Crossing count for the generalised Hénon map at `params`, taken at its unique
/// saddle fixed point.
pub fn henon_intersection_count(params: HenonMapParams, setup: &TangencySetup) -> Result<usize> {
    let map = HenonMap::new(params)?;
    let frame = henon_saddle(&map)?;
    intersection_count(&map, &frame, setup)
}

/// The saddle among the real fixed points; `NotASaddle` when there is none or
/// more than one.
pub fn henon_saddle(map: &HenonMap) -> Result<SaddleFrame> {
    let fixed = map.params.fixed_points();
    let mut frames = fixed.iter().filter_map(|z| saddle_frame(map, *z).ok());
    match (frames.next(), frames.next()) {
        (Some(f), None) => Ok(f),
        (None, _) => Err(Error::NotASaddle(format!("none of the fixed points {fixed:?} is a saddle"))),
        _ => Err(Error::NotASaddle("more than one saddle fixed point".into())),
    }
}

/// `(unstable, stable)` branches merged per kind.
pub fn grow_pair<M: Preimages + ?Sized>(
    map: &M,
    frame: &SaddleFrame,
    setup: &TangencySetup,
) -> Result<(ManifoldBranch, ManifoldBranch)> {
    let mut wu = Vec::new();
    for side in TangencySetup::sides(setup.unstable_sides) {
        wu.push(grow_unstable(map, frame, side, setup.seed_offset, setup.n_points, setup.unstable_generations, &setup.opts)?);
    }
    let mut ws = Vec::new();
    for side in TangencySetup::sides(setup.stable_sides) {
        ws.extend(grow_stable(map, frame, side, setup.seed_offset, setup.n_points, setup.stable_depth, &setup.opts)?);
    }
    Ok((ManifoldBranch::merge(&wu), ManifoldBranch::merge(&ws)))
}

/// Breakdown of a `d1` estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct D1Estimate {
    /// Finite-difference estimate with perturbation `delta`.
    pub coarse: f64,
    /// Same with `delta / 2`.
    pub fine: f64,
    /// Richardson combination `2·fine − coarse`.
    pub extrapolated: f64,
    /// Tangent-map value from the product of analytic Jacobians.
    pub linear: f64,
    pub steps_in: usize,
    pub steps_out: usize,
}

/// `d1` along a homoclinic orbit `[W2, …, W1]` that leaves the saddle along its
/// unstable side and returns along its stable side.
pub fn estimate_d1<M: PlanarMap + ?Sized>(map: &M, orbit: &[Point2], frame: &SaddleFrame, delta: f64) -> Result<f64> {
    Ok(estimate_d1_detailed(map, orbit, frame, delta)?.extrapolated)
}

/// A `δ·v_s` perturbation of `W2` is carried to `W1`; its `v_u` component in
/// the basis `(v_s, v_u)` is divided by `λ_s^{n_in} λ_u^{n_out}`, the passes
/// through the linear neighbourhood before and after the excursion, so the
/// result is the coefficient of `∂T1/∂x` in eigen-coordinates.
pub fn estimate_d1_detailed<M: PlanarMap + ?Sized>(
    map: &M,
    orbit: &[Point2],
    frame: &SaddleFrame,
    delta: f64,
) -> Result<D1Estimate> {
    if orbit.len() < 2 {
        return Err(Error::InvalidParams("homoclinic orbit needs at least two points".into()));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParams("delta must be positive".into()));
    }
    let basis = Mat2::from_columns(frame.v_s, frame.v_u);
    if basis.solve(Point2::new(1.0, 0.0)).is_none() {
        return Err(Error::SingularBasis);
    }
    let coords: Vec<(f64, f64)> = orbit.iter().map(|z| frame.coordinates(*z)).collect::<Result<_>>()?;
    let excursion = coords
        .iter()
        .position(|(s, u)| s.abs() > u.abs())
        .filter(|&i| i > 0)
        .ok_or_else(|| Error::Domain("orbit does not pass from the unstable to the stable side".into()))?;
    let steps_in = excursion - 1;
    let steps_out = orbit.len() - 1 - excursion;
    let n = orbit.len() - 1;
    let norm = frame.lambda_s.powi(steps_in as i32) * frame.lambda_u.powi(steps_out as i32);
    let unstable_part =
        |v: Point2| -> Result<f64> { Ok(basis.solve(v).ok_or(Error::SingularBasis)?.y / norm) };

    let mut v = frame.v_s;
    for z in &orbit[..n] {
        v = map.jacobian(*z).apply(v);
    }
    let linear = unstable_part(v)?;
    let fd = |d: f64| -> Result<f64> {
        let w = map.iterate(orbit[0] + frame.v_s * d, n) - map.iterate(orbit[0], n);
        unstable_part(w * (1.0 / d))
    };
    let coarse = fd(delta)?;
    let fine = fd(0.5 * delta)?;
    Ok(D1Estimate { coarse, fine, extrapolated: 2.0 * fine - coarse, linear, steps_in, steps_out })
}

/// Homoclinic orbit of the piecewise family's saddle at the origin through the
/// tangency pair `(0, 1) ↦ (1, 0)`: `n` points on the unstable axis, then `n + 1`
/// on the stable axis.
pub fn axis_homoclinic_orbit<M: PlanarMap + ?Sized>(map: &M, frame: &SaddleFrame, n: usize) -> Vec<Point2> {
    let mut start = Point2::new(0.0, 1.0);
    let sigma = frame.lambda_u;
    let mut prefix = Vec::with_capacity(n);
    for _ in 0..n {
        start = Point2::new(0.0, start.y / sigma);
        prefix.push(start);
    }
    prefix.reverse();
    prefix.push(Point2::new(0.0, 1.0));
    let mut z = map.eval(Point2::new(0.0, 1.0));
    prefix.push(z);
    for _ in 0..n {
        z = map.eval(z);
        prefix.push(z);
    }
    prefix
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{GrhtMap, GrhtMapParams, LinearMap};

    fn toy() -> GrhtMap {
        GrhtMap::new(GrhtMapParams::param1()).unwrap()
    }

    #[test]
    fn frame_at_toy_origin() {
        let f = saddle_frame(&toy(), Point2::ORIGIN).unwrap();
        assert_eq!(f.v_s, Point2::new(1.0, 0.0));
        assert_eq!(f.v_u, Point2::new(0.0, 1.0));
        assert!((f.lambda_s - 0.8).abs() < 1e-15 && (f.lambda_u - 1.25).abs() < 1e-15);
    }

    #[test]
    fn non_hyperbolic_rejected() {
        let m = LinearMap::new(Mat2::diag(1.0, 2.0));
        assert!(matches!(saddle_frame(&m, Point2::ORIGIN), Err(Error::NotASaddle(_))));
        let m = LinearMap::new(Mat2::new(0.0, -2.0, 2.0, 0.0));
        assert!(matches!(saddle_frame(&m, Point2::ORIGIN), Err(Error::NotASaddle(_))));
        assert!(saddle_frame(&toy(), Point2::new(0.1, 0.0)).is_err());
    }

    #[test]
    fn linear_manifolds_lie_on_axes() {
        let m = LinearMap::new(Mat2::diag(0.5, 2.0));
        let f = saddle_frame(&m, Point2::ORIGIN).unwrap();
        let opts = ManifoldOptions::for_window(Rect::new(-2.0, 2.0, -2.0, 2.0));
        let wu = grow_unstable(&m, &f, 1, 1e-4, 20, 20, &opts).unwrap();
        assert!(wu.polyline.iter().all(|z| z.x.abs() <= 1e-12));
        assert!(wu.polyline.iter().any(|z| z.y > 1.5));
        let ws = grow_stable(&m, &f, -1, 1e-4, 20, 20, &opts).unwrap();
        assert!(ws.iter().flat_map(|b| &b.polyline).all(|z| z.y.abs() <= 1e-12));
        assert!(ws.iter().flat_map(|b| &b.polyline).any(|z| z.x < -1.5));
    }

    #[test]
    fn spacing_bound_and_parent_invariant() {
        let map = toy();
        let f = saddle_frame(&map, Point2::ORIGIN).unwrap();
        let opts = ManifoldOptions::for_window(Rect::new(-1.0, 2.5, -1.0, 2.5));
        let wu = grow_unstable(&map, &f, 1, 1e-4, 50, 48, &opts).unwrap();
        for (a, b) in wu.segments() {
            assert!(a.dist(b) <= opts.max_segment * (1.0 + 1e-9), "{a:?} {b:?}");
        }
        for (i, z) in wu.polyline.iter().enumerate() {
            let g = wu.point_generation[i];
            if g == 0 {
                continue;
            }
            let has_parent = wu
                .polyline
                .iter()
                .zip(&wu.point_generation)
                .any(|(p, &gp)| gp == g - 1 && map.eval(*p).dist(*z) <= opts.max_segment);
            assert!(has_parent, "point {i} has no parent");
        }
    }

    #[test]
    fn toy_unstable_passes_tangency_points() {
        let map = toy();
        let f = saddle_frame(&map, Point2::ORIGIN).unwrap();
        let opts = ManifoldOptions::for_window(Rect::new(-1.0, 2.5, -1.0, 2.5));
        let wu = grow_unstable(&map, &f, 1, 1e-4, 50, 60, &opts).unwrap();
        assert!(wu.distance_to(Point2::new(0.0, 1.0)) < 1e-3);
        assert!(wu.distance_to(Point2::new(1.0, 0.0)) < 1e-3);
    }

    #[test]
    fn negative_unstable_eigenvalue_fills_both_sides() {
        let map = GrhtMap::new(GrhtMapParams::param2()).unwrap();
        let f = saddle_frame(&map, Point2::ORIGIN).unwrap();
        assert!(f.lambda_u < 0.0);
        let opts = ManifoldOptions::for_window(Rect::new(-2.5, 2.5, -2.5, 2.5));
        let wu = grow_unstable(&map, &f, 1, 1e-4, 50, 40, &opts).unwrap();
        assert!(wu.polyline.iter().any(|z| z.x.abs() < 1e-12 && z.y > 0.5));
        assert!(wu.polyline.iter().any(|z| z.x.abs() < 1e-12 && z.y < -0.5));
    }

    #[test]
    fn toy_stable_contains_axis_segment() {
        let map = toy();
        let f = saddle_frame(&map, Point2::ORIGIN).unwrap();
        let opts = ManifoldOptions { scan_stride: 64, ..ManifoldOptions::for_window(Rect::new(-1.0, 2.5, -1.0, 2.5)) };
        let ws = ManifoldBranch::merge(&grow_stable(&map, &f, 1, 1e-4, 20, 45, &opts).unwrap());
        for i in 0..=40 {
            let z = Point2::new(0.05 * i as f64, 0.0);
            assert!(ws.distance_to(z) <= 1e-10 || z.x < 1e-4, "{z:?}");
        }
    }

    #[test]
    fn crossing_of_two_lines() {
        let mut a = ManifoldBranch::empty(ManifoldKind::Stable, 1);
        a.push_piece(0, &[Point2::new(-1.0, 0.0), Point2::new(1.0, 0.0)]);
        let mut b = ManifoldBranch::empty(ManifoldKind::Unstable, 1);
        b.push_piece(0, &[Point2::new(0.0, -1.0), Point2::new(0.0, 1.0)]);
        let x = homoclinic_intersections(&a, &b, 1e-9);
        assert_eq!(x, vec![Point2::ORIGIN]);
        let mut c = ManifoldBranch::empty(ManifoldKind::Unstable, 1);
        c.push_piece(0, &[Point2::new(0.0, 1.0), Point2::new(0.0, 2.0)]);
        assert!(homoclinic_intersections(&a, &c, 1e-9).is_empty());
    }

    #[test]
    fn breaks_split_segments() {
        let mut a = ManifoldBranch::empty(ManifoldKind::Stable, 1);
        a.push_piece(0, &[Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)]);
        a.push_piece(1, &[Point2::new(2.0, 0.0), Point2::new(3.0, 0.0)]);
        assert_eq!(a.segments().count(), 2);
        assert_eq!(a.pieces().count(), 2);
    }

    #[test]
    fn bisection_rejects_flat_bracket() {
        let r = tangency_bisection(|_| Ok(2), [0.0, 1.0], 1e-9);
        assert!(matches!(r, Err(Error::BadBracket { .. })));
        let r = tangency_bisection(|x| Ok(if x < 0.3 { 2 } else { 0 }), [0.0, 1.0], 1e-9).unwrap();
        assert!((r - 0.3).abs() < 1e-9);
    }

    #[test]
    fn toy_tangency_sits_at_zero_mu1() {
        // Near (1, 0) the unstable branch is the parabola y = μ1 + d5 (x − 1)² / c2²
        // over the stable x-axis: two crossings for μ1 < 0, none for μ1 > 0.
        let window = Rect::new(0.9, 1.1, -0.02, 0.02);
        let setup = TangencySetup {
            window,
            seed_offset: 1e-2,
            n_points: 20,
            unstable_generations: 22,
            stable_depth: 22,
            unstable_sides: [true, false],
            stable_sides: [true, false],
            exclusion_radius: 0.0,
            // Chords across the parabola's vertex sag by about d5 (h / 2c2)²; the
            // focus spacing keeps that below the 1e-8 target.
            opts: ManifoldOptions {
                max_segment: 5e-3,
                focus: Some(window),
                focus_segment: 1e-4,
                ..ManifoldOptions::for_window(Rect::new(-0.5, 2.5, -0.5, 1.5))
            },
        };
        let count = |mu1: f64| {
            let map = GrhtMap::new(GrhtMapParams { mu1, ..GrhtMapParams::param1() })?;
            let f = saddle_frame(&map, Point2::ORIGIN)?;
            intersection_count(&map, &f, &setup)
        };
        assert_eq!(count(-1e-3).unwrap(), 2);
        assert_eq!(count(1e-3).unwrap(), 0);
        let r = tangency_bisection(count, [-1e-3, 1e-3], 1e-9).unwrap();
        assert!(r.abs() < 1e-8, "{r}");
    }

    #[test]
    fn d1_recovered_on_axis_orbits() {
        for (p, want) in [(GrhtMapParams::param1(), 1.0), (GrhtMapParams::param4(), -1.0)] {
            let map = GrhtMap::new(p).unwrap();
            let f = saddle_frame(&map, Point2::ORIGIN).unwrap();
            for n in [3, 6, 7] {
                let orbit = axis_homoclinic_orbit(&map, &f, n);
                let est = estimate_d1_detailed(&map, &orbit, &f, 1e-4).unwrap();
                assert!((est.extrapolated - want).abs() < 1e-3, "{est:?}");
                assert!((est.linear - want).abs() < 1e-9);
            }
        }
    }
}


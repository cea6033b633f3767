//! Zero sets of scalar fields by marching squares, the critical curves of
//! non-invertible maps (`det Df = 0` and its image), cusps on polylines and
//! preimage counts of sample points.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{Point2, Rect};
use crate::maps::{PlanarMap, Preimages};

#[derive(Debug, Clone, PartialEq)]
pub struct ImplicitCurve {
    pub polylines: Vec<Vec<Point2>>,
    pub function_id: String,
}

impl ImplicitCurve {
    pub fn is_empty(&self) -> bool {
        self.polylines.iter().all(Vec::is_empty)
    }

    pub fn vertices(&self) -> impl Iterator<Item = &Point2> + '_ {
        self.polylines.iter().flatten()
    }
}

/// Edge of the sampling lattice: `(i, j, horizontal)` with the edge starting at node `(i, j)`.
type EdgeKey = (usize, usize, bool);

/// Zero set of `g` on `window`, sampled on `nx × ny` cells.
///
/// Each sign change along a cell edge is located by bisection; ambiguous
/// (saddle) cells are resolved by the sign at the cell centre. Segments sharing
/// an edge crossing are chained into polylines.
pub fn trace_implicit<G>(g: G, window: Rect, nx: usize, ny: usize, function_id: &str) -> Result<ImplicitCurve>
where
    G: Fn(Point2) -> f64,
{
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidParams("resolution must be positive".into()));
    }
    let node = |i: usize, j: usize| {
        Point2::new(
            window.xmin + window.width() * i as f64 / nx as f64,
            window.ymin + window.height() * j as f64 / ny as f64,
        )
    };
    let values: Vec<f64> = (0..=ny).flat_map(|j| (0..=nx).map(move |i| (i, j))).map(|(i, j)| g(node(i, j))).collect();
    let val = |i: usize, j: usize| values[j * (nx + 1) + i];
    let positive = |v: f64| v > 0.0;

    let mut crossings: HashMap<EdgeKey, Point2> = HashMap::new();
    let mut crossing = |key: EdgeKey| -> Point2 {
        *crossings.entry(key).or_insert_with(|| {
            let (i, j, horizontal) = key;
            let a = node(i, j);
            let b = if horizontal { node(i + 1, j) } else { node(i, j + 1) };
            let (fb_end, fa) = if horizontal { (val(i + 1, j), val(i, j)) } else { (val(i, j + 1), val(i, j)) };
            bisect_edge(&g, a, b, fa, fb_end)
        })
    };

    let mut segments: Vec<(EdgeKey, EdgeKey)> = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            // Corners counter-clockwise from bottom-left; edges bottom, right, top, left.
            let s = [val(i, j), val(i + 1, j), val(i + 1, j + 1), val(i, j + 1)].map(positive);
            let edges: [EdgeKey; 4] = [(i, j, true), (i + 1, j, false), (i, j + 1, true), (i, j, false)];
            let cut: Vec<usize> = (0..4).filter(|&e| s[e] != s[(e + 1) % 4]).collect();
            match cut.len() {
                2 => segments.push((edges[cut[0]], edges[cut[1]])),
                4 => {
                    let mid = Point2::new(0.5 * (node(i, j).x + node(i + 1, j).x), 0.5 * (node(i, j).y + node(i, j + 1).y));
                    // Centre agrees with corner 0: corner 0's region spans the centre,
                    // so the curve separates corners 1 and 3 individually.
                    if positive(g(mid)) == s[0] {
                        segments.push((edges[0], edges[1]));
                        segments.push((edges[2], edges[3]));
                    } else {
                        segments.push((edges[3], edges[0]));
                        segments.push((edges[1], edges[2]));
                    }
                }
                _ => {}
            }
        }
    }
    for &(a, b) in &segments {
        crossing(a);
        crossing(b);
    }
    let polylines = chain_segments(&segments).into_iter().map(|keys| keys.iter().map(|k| crossings[k]).collect()).collect();
    Ok(ImplicitCurve { polylines, function_id: function_id.to_string() })
}

fn bisect_edge<G: Fn(Point2) -> f64>(g: &G, a: Point2, b: Point2, fa: f64, fb: f64) -> Point2 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let pos_lo = fa > 0.0;
    debug_assert!(pos_lo != (fb > 0.0));
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = g(a.lerp(b, mid));
        if v == 0.0 {
            return a.lerp(b, mid);
        }
        if (v > 0.0) == pos_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    a.lerp(b, 0.5 * (lo + hi))
}

/// Chains edge-to-edge segments into maximal paths (closed loops repeat their first key).
fn chain_segments(segments: &[(EdgeKey, EdgeKey)]) -> Vec<Vec<EdgeKey>> {
    let mut adj: HashMap<EdgeKey, Vec<usize>> = HashMap::new();
    for (idx, &(a, b)) in segments.iter().enumerate() {
        adj.entry(a).or_default().push(idx);
        adj.entry(b).or_default().push(idx);
    }
    let mut used = vec![false; segments.len()];
    let mut out = Vec::new();
    let other = |idx: usize, k: EdgeKey| if segments[idx].0 == k { segments[idx].1 } else { segments[idx].0 };
    let walk = |start: EdgeKey, used: &mut Vec<bool>| -> Vec<EdgeKey> {
        let mut path = vec![start];
        let mut cur = start;
        while let Some(&idx) = adj[&cur].iter().find(|&&s| !used[s]) {
            used[idx] = true;
            cur = other(idx, cur);
            path.push(cur);
        }
        path
    };
    // Open chains start at keys with a single incident segment.
    let mut keys: Vec<EdgeKey> = adj.keys().copied().collect();
    keys.sort_unstable();
    for &k in &keys {
        if adj[&k].len() == 1 && !used[adj[&k][0]] {
            out.push(walk(k, &mut used));
        }
    }
    for idx in 0..segments.len() {
        if !used[idx] {
            out.push(walk(segments[idx].0, &mut used));
        }
    }
    out
}

/// `det Df = 0` on `window`.
pub fn critical_set<M: PlanarMap + ?Sized>(map: &M, window: Rect, nx: usize, ny: usize) -> Result<ImplicitCurve> {
    trace_implicit(|z| map.jacobian(z).det(), window, nx, ny, "det-Df")
}

/// Image of a curve under the map (the critical curve when `curve` is the critical set).
pub fn image_curve<M: PlanarMap + ?Sized>(map: &M, curve: &ImplicitCurve) -> ImplicitCurve {
    ImplicitCurve {
        polylines: curve.polylines.iter().map(|p| p.iter().map(|z| map.eval(*z)).collect()).collect(),
        function_id: format!("image({})", curve.function_id),
    }
}

/// Turning angle above which a vertex counts as a cusp.
pub const CUSP_ANGLE_DEG: f64 = 120.0;

/// Vertices whose turning angle exceeds 120° and is maximal among neighbours
/// within the same sharp run; the run's apex is the vertex with the sharpest turn,
/// refined to the vertex pair that best reverses direction.
pub fn cusp_locate(curve: &ImplicitCurve) -> Vec<Point2> {
    let threshold = CUSP_ANGLE_DEG.to_radians();
    let mut out = Vec::new();
    for poly in &curve.polylines {
        // Drop repeated points, which carry no direction.
        let mut pts: Vec<Point2> = Vec::with_capacity(poly.len());
        for p in poly {
            if pts.last().map_or(true, |q: &Point2| q.dist(*p) > 1e-14) {
                pts.push(*p);
            }
        }
        if pts.len() < 3 {
            continue;
        }
        let turn: Vec<f64> = (1..pts.len() - 1)
            .map(|i| {
                let a = pts[i] - pts[i - 1];
                let b = pts[i + 1] - pts[i];
                a.cross(b).atan2(a.dot(b)).abs()
            })
            .collect();
        let mut i = 0;
        while i < turn.len() {
            if turn[i] <= threshold {
                i += 1;
                continue;
            }
            let start = i;
            while i < turn.len() && turn[i] > threshold {
                i += 1;
            }
            let apex = (start..i).max_by(|&a, &b| turn[a].total_cmp(&turn[b])).expect("nonempty run");
            out.push(pts[apex + 1]);
        }
    }
    out
}

/// Preimage count of each sample within `window`, with the completeness flag of the search.
pub fn classify_regions<M: Preimages + ?Sized>(
    map: &M,
    samples: &[Point2],
    window: Rect,
) -> Result<Vec<(Point2, usize, bool)>> {
    samples
        .iter()
        .map(|&z| {
            let set = map.preimages(z, window)?;
            Ok((z, set.len(), set.complete))
        })
        .collect()
}

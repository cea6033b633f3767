//! Basins of attraction on a grid: each cell is iterated forward and labelled by
//! the period of the orbit it settles on, or as divergent or unresolved.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Point2, Rect};
use crate::maps::PlanarMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CellLabel {
    Period(u32),
    Diverged,
    Unresolved,
}

impl CellLabel {
    pub fn as_string(self) -> String {
        match self {
            CellLabel::Period(p) => format!("P{p}"),
            CellLabel::Diverged => "diverged".into(),
            CellLabel::Unresolved => "unresolved".into(),
        }
    }

    /// PGM grey level: divergent cells are white (255), unresolved cells black
    /// (0), and period `p` maps linearly onto `32..=224` over `1..=max_period`.
    pub fn grey(self, max_period: u32) -> u8 {
        match self {
            CellLabel::Diverged => 255,
            CellLabel::Unresolved => 0,
            CellLabel::Period(p) => {
                let span = max_period.saturating_sub(1).max(1) as f64;
                let t = (p.saturating_sub(1) as f64 / span).clamp(0.0, 1.0);
                (32.0 + 192.0 * t).round() as u8
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasinOptions {
    pub max_iter: usize,
    pub period_tol: f64,
    pub div_threshold: f64,
    pub max_period: usize,
    /// Fraction of iterates treated as transient; the period tail must lie
    /// entirely after it.
    pub transient_fraction: f64,
}

impl Default for BasinOptions {
    fn default() -> Self {
        Self { max_iter: 1000, period_tol: 1e-13, div_threshold: 1e2, max_period: 64, transient_fraction: 0.8 }
    }
}

impl BasinOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_period == 0 || self.max_iter == 0 {
            return Err(Error::InvalidParams("max_iter and max_period must be positive".into()));
        }
        if !(self.period_tol > 0.0 && self.div_threshold > 0.0) {
            return Err(Error::InvalidParams("tolerances must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.transient_fraction) {
            return Err(Error::InvalidParams("transient fraction must lie in [0, 1)".into()));
        }
        let tail = self.max_period + 1;
        let kept = self.max_iter as f64 * (1.0 - self.transient_fraction);
        if (tail as f64) > kept.floor() + 1.0 {
            return Err(Error::InvalidParams(format!(
                "period tail of {tail} iterates does not fit after the transient ({kept:.0} kept)"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasinGrid {
    pub window: Rect,
    pub nx: usize,
    pub ny: usize,
    /// Row-major: `labels[j * nx + i]` is the cell at column `i`, row `j`.
    pub labels: Vec<CellLabel>,
    pub options: BasinOptions,
}

impl BasinGrid {
    /// Sample point of cell `(i, j)`; nodes include the window corners.
    pub fn cell_point(&self, i: usize, j: usize) -> Point2 {
        grid_point(&self.window, self.nx, self.ny, i, j)
    }

    pub fn label(&self, i: usize, j: usize) -> CellLabel {
        self.labels[j * self.nx + i]
    }

    /// Distinct periods present, ascending.
    pub fn periods(&self) -> Vec<u32> {
        let mut p: Vec<u32> = self
            .labels
            .iter()
            .filter_map(|l| if let CellLabel::Period(p) = l { Some(*p) } else { None })
            .collect();
        p.sort_unstable();
        p.dedup();
        p
    }

    pub fn count(&self, label: CellLabel) -> usize {
        self.labels.iter().filter(|l| **l == label).count()
    }
}

fn grid_point(w: &Rect, nx: usize, ny: usize, i: usize, j: usize) -> Point2 {
    let t = |k: usize, n: usize| if n > 1 { k as f64 / (n - 1) as f64 } else { 0.5 };
    Point2::new(w.xmin + w.width() * t(i, nx), w.ymin + w.height() * t(j, ny))
}

/// Smallest `p ≤ max_period` with `‖z_last − z_{last−p}‖ < tol`.
pub fn detect_period(tail: &[Point2], tol: f64, max_period: usize) -> Option<usize> {
    let n = tail.len();
    if n == 0 {
        return None;
    }
    let last = tail[n - 1];
    (1..=max_period.min(n - 1)).find(|&p| (last - tail[n - 1 - p]).norm() < tol)
}

/// Iterates `z` and labels the orbit.
pub fn classify_point<M: PlanarMap + ?Sized>(map: &M, z: Point2, opts: &BasinOptions) -> CellLabel {
    classify_with_state(map, z, opts).0
}

/// Label plus the final state (when the orbit stayed bounded).
pub fn classify_with_state<M: PlanarMap + ?Sized>(map: &M, z: Point2, opts: &BasinOptions) -> (CellLabel, Point2) {
    let tail_len = opts.max_period + 1;
    let mut tail = vec![Point2::ORIGIN; tail_len];
    let mut w = z;
    for it in 0..=opts.max_iter {
        if !w.is_finite() || w.norm() > opts.div_threshold {
            return (CellLabel::Diverged, w);
        }
        if it + tail_len > opts.max_iter {
            tail[it + tail_len - opts.max_iter - 1] = w;
        }
        if it < opts.max_iter {
            w = map.eval(w);
        }
    }
    let label = match detect_period(&tail, opts.period_tol, opts.max_period) {
        Some(p) => CellLabel::Period(p as u32),
        None => CellLabel::Unresolved,
    };
    (label, tail[tail_len - 1])
}

/// Labels every node of an `nx × ny` grid over `window`.
///
/// Rows are processed in parallel and written back positionally, so the result
/// does not depend on the thread schedule.
pub fn compute_basin<M: PlanarMap + ?Sized>(
    map: &M,
    window: Rect,
    nx: usize,
    ny: usize,
    opts: &BasinOptions,
) -> Result<BasinGrid> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidParams("grid needs nx, ny >= 1".into()));
    }
    if !(window.xmax > window.xmin && window.ymax > window.ymin) {
        return Err(Error::InvalidParams("window must have positive extent".into()));
    }
    opts.validate()?;
    let rows: Vec<Vec<CellLabel>> = (0..ny)
        .into_par_iter()
        .map(|j| (0..nx).map(|i| classify_point(map, grid_point(&window, nx, ny, i, j), opts)).collect())
        .collect();
    Ok(BasinGrid { window, nx, ny, labels: rows.into_iter().flatten().collect(), options: *opts })
}

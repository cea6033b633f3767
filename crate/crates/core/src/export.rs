//! CSV and binary PGM writers.
//!
//! Every CSV has a header row, `,` delimiters and numbers printed by [`fmt17`].

use std::io::Write;

use crate::basins::BasinGrid;
use crate::critical::ImplicitCurve;
use crate::error::Result;
use crate::manifolds::ManifoldBranch;
use crate::periodic::SrSolution;
use crate::unfolding::{BifurcationEvent, ScalingFit};

/// Formats with 17 significant digits (round-trip exact for binary64).
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

fn writer<W: Write>(out: W, header: &[&str]) -> Result<csv::Writer<W>> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    Ok(w)
}

/// Columns `k,m,branch,x0,y0,trace,det,class`; `(x0, y0)` is the first cycle point.
pub fn write_sr_csv<W: Write>(out: W, rows: &[SrSolution]) -> Result<()> {
    let mut w = writer(out, &["k", "m", "branch", "x0", "y0", "trace", "det", "class"])?;
    for s in rows {
        let z = s.points.first().copied().unwrap_or(crate::Point2::new(f64::NAN, f64::NAN));
        w.write_record([
            s.k.to_string(),
            s.m.to_string(),
            s.branch.as_str().to_string(),
            fmt17(z.x),
            fmt17(z.y),
            fmt17(s.trace),
            fmt17(s.det),
            s.stability.as_str().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `generation,index,x,y`; `index` restarts at 0 on every connected piece.
pub fn write_manifold_csv<W: Write>(out: W, branch: &ManifoldBranch) -> Result<()> {
    let mut w = writer(out, &["generation", "index", "x", "y"])?;
    let mut next_break = 0;
    let mut index = 0usize;
    for (i, z) in branch.polyline.iter().enumerate() {
        if next_break < branch.breaks.len() && branch.breaks[next_break] == i {
            next_break += 1;
            index = 0;
        }
        w.write_record([branch.point_generation[i].to_string(), index.to_string(), fmt17(z.x), fmt17(z.y)])?;
        index += 1;
    }
    w.flush()?;
    Ok(())
}

/// Columns `i,j,x,y,label`, row-major in `j`.
pub fn write_basin_csv<W: Write>(out: W, grid: &BasinGrid) -> Result<()> {
    let mut w = writer(out, &["i", "j", "x", "y", "label"])?;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let z = grid.cell_point(i, j);
            w.write_record([i.to_string(), j.to_string(), fmt17(z.x), fmt17(z.y), grid.label(i, j).as_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Binary P5 with maxval 255 and grey levels from [`crate::basins::CellLabel::grey`].
/// The top raster row is the largest `y`.
pub fn write_basin_pgm<W: Write>(mut out: W, grid: &BasinGrid) -> Result<()> {
    let max_p = grid.options.max_period as u32;
    write!(out, "P5\n{} {}\n255\n", grid.nx, grid.ny)?;
    let mut row = Vec::with_capacity(grid.nx);
    for j in (0..grid.ny).rev() {
        row.clear();
        row.extend((0..grid.nx).map(|i| grid.label(i, j).grey(max_p)));
        out.write_all(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Columns `function_id,polyline,index,x,y`.
pub fn write_curve_csv<W: Write>(out: W, curve: &ImplicitCurve) -> Result<()> {
    let mut w = writer(out, &["function_id", "polyline", "index", "x", "y"])?;
    for (p, poly) in curve.polylines.iter().enumerate() {
        for (i, z) in poly.iter().enumerate() {
            w.write_record([curve.function_id.clone(), p.to_string(), i.to_string(), fmt17(z.x), fmt17(z.y)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Columns `k,kind,epsilon,x,y,trace,det`; `(x, y)` is the witness orbit's first point.
pub fn write_events_csv<W: Write>(out: W, events: &[BifurcationEvent]) -> Result<()> {
    let mut w = writer(out, &["k", "kind", "epsilon", "x", "y", "trace", "det"])?;
    for e in events {
        let z = e.witness.points.first().copied().unwrap_or(crate::Point2::new(f64::NAN, f64::NAN));
        w.write_record([
            e.k.to_string(),
            e.kind.as_str().to_string(),
            fmt17(e.epsilon),
            fmt17(z.x),
            fmt17(z.y),
            fmt17(e.witness.trace),
            fmt17(e.witness.det),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `k,epsilon,ratio,model`.
pub fn write_fit_csv<W: Write>(out: W, fit: &ScalingFit) -> Result<()> {
    let mut w = writer(out, &["k", "epsilon", "ratio", "model"])?;
    for &(k, e, r) in &fit.ratios {
        w.write_record([k.to_string(), fmt17(e), fmt17(r), fit.model.as_str().to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basins::{compute_basin, BasinOptions};
    use crate::geometry::{Point2, Rect};
    use crate::maps::{GrhtMap, GrhtMapParams};

    #[test]
    fn fmt17_round_trips() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = fmt17(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            assert_eq!(s.split('e').next().unwrap().chars().filter(char::is_ascii_digit).count(), 17);
        }
    }

    #[test]
    fn pgm_layout() {
        let map = GrhtMap::new(GrhtMapParams::param1()).unwrap();
        let g = compute_basin(&map, Rect::new(-0.5, 2.0, -0.5, 2.0), 5, 3, &BasinOptions::default()).unwrap();
        let mut buf = Vec::new();
        write_basin_pgm(&mut buf, &g).unwrap();
        let header = b"P5\n5 3\n255\n";
        assert_eq!(&buf[..header.len()], header);
        assert_eq!(buf.len(), header.len() + 15);
        // First raster row is the top of the window.
        assert_eq!(buf[header.len()], g.label(0, 2).grey(64));
    }

    #[test]
    fn curve_csv_rows() {
        let c = ImplicitCurve { polylines: vec![vec![Point2::new(0.0, 1.0), Point2::new(0.5, 1.0)]], function_id: "det-Df".into() };
        let mut buf = Vec::new();
        write_curve_csv(&mut buf, &c).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "function_id,polyline,index,x,y");
        assert_eq!(lines.len(), 3);
        assert!(lines[2].starts_with("det-Df,0,1,5.0000000000000000e-1,"));
    }
}

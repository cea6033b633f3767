//! Numerical toolkit for globally resonant homoclinic tangencies of planar maps.
//!
//! The crate provides the piecewise C¹ family that realises such a tangency,
//! the generalised Hénon map, single-round periodic orbit solvers, manifold
//! growth, basin and critical-curve computations, normal-form reduction and
//! bifurcation scans under parameter unfolding.

pub mod basins;
pub mod critical;
pub mod error;
pub mod export;
pub mod geometry;
pub mod manifolds;
pub mod maps;
pub mod normal_form;
pub mod params;
pub mod periodic;
pub mod unfolding;

pub use error::{Error, Result};
pub use geometry::{Eigenvalues, Mat2, Point2, Rect};
pub use maps::{GrhtMap, GrhtMapParams, HenonMap, HenonMapParams, PlanarMap, PreimageSet, Preimages};

/// Convenience wrapper: evaluates the piecewise map with validated parameters.
pub fn grht_eval(p: &GrhtMapParams, z: Point2) -> Result<Point2> {
    GrhtMap::new(*p)?.try_eval(z)
}

/// Convenience wrapper: analytic Jacobian of the piecewise map.
pub fn grht_jacobian(p: &GrhtMapParams, z: Point2) -> Result<Mat2> {
    Ok(GrhtMap::new(*p)?.jacobian(z))
}

/// Convenience wrapper: preimages of `target` inside `window`.
pub fn grht_preimages(p: &GrhtMapParams, target: Point2, window: Rect) -> Result<PreimageSet> {
    GrhtMap::new(*p)?.preimages(target, window)
}

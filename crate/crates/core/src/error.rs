use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("degenerate inversion: {0}")]
    DegenerateInversion(String),

    #[error("point ({x}, {y}) lies on the non-invertible line")]
    NonInvertiblePoint { x: f64, y: f64 },

    #[error("resonance obstruction: {term} has denominator {denominator:e}")]
    ResonanceObstruction { term: String, denominator: f64 },

    #[error("least-squares fit is ill-conditioned (condition number {0:e})")]
    Conditioning(f64),

    #[error("orbit left the region where the local map applies at iterate {iterate}")]
    RegionEscape { iterate: usize },

    #[error("closed-form orbit for k = {k} enters the blend strip or a wrong region at point {index}")]
    StripCollision { k: usize, index: usize },

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("singular Newton matrix")]
    Singular,

    #[error("fixed point is not a saddle: {0}")]
    NotASaddle(String),

    #[error("stable/unstable basis is singular")]
    SingularBasis,

    #[error("bracket [{lo}, {hi}] does not contain a change in intersection count")]
    BadBracket { lo: f64, hi: f64 },

    #[error("branch lost during continuation; last good parameter {last_good:e}")]
    BranchLost { last_good: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

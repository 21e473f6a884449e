use thiserror::Error;

use crate::geometry::FeasibilityReport;

/// Every failure the library reports. Nothing is silently repaired.
#[derive(Debug, Error)]
pub enum Error {
    #[error("region is empty on this grid")]
    EmptyRegion,

    #[error("invalid coefficient: {0}")]
    InvalidCoefficient(String),

    #[error("CFL bound violated: dt = {dt:.6e} exceeds the admissible {max_dt:.6e}")]
    Cfl { dt: f64, max_dt: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("operator is not positive definite (curvature {0:.3e}); the adjoint pair is broken")]
    NotPositiveDefinite(f64),

    #[error("iteration cap reached after {iterations} iterations, relative residual {residual:.3e}")]
    MaxIterations {
        iterate: Box<Vec<f64>>,
        residual: f64,
        iterations: usize,
    },

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("infeasible configuration: {}", .0.summary())]
    Feasibility(Box<FeasibilityReport>),

    #[error("xi is degenerate (norm {norm:.3e} below {threshold:.3e}); tau or beta too aggressive")]
    DegenerateXi { norm: f64, threshold: f64 },

    #[error("regions B and D overlap on {0} grid cells; shrink B so that it avoids D")]
    RegionOverlap(usize),

    #[error("format error: {0}")]
    Format(String),

    #[error("configuration error: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

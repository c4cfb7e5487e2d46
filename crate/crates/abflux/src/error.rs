//! Error type shared by every module of the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Evaluation requested at a point where a field or potential is singular.
    #[error("singular evaluation point: {0}")]
    Singularity(String),

    /// A path sample or segment passes through the reference point of an
    /// angle or line integral.
    #[error("path passes through the reference point near sample {index}")]
    PathThroughPoint { index: usize },

    /// An open path crosses the gauge string ray; the open-path value is
    /// branch-dependent there and is refused rather than silently integrated.
    #[error("open path crosses the gauge string ray at segment {segment}")]
    StringCrossing { segment: usize },

    /// Geometry that admits no well-defined answer (zero-length path,
    /// coincident sources, ...).
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// Adaptive quadrature exhausted its refinement budget.
    #[error("quadrature failed to converge: residual {residual:.3e} exceeds target {target:.3e}")]
    ToleranceFailure { residual: f64, target: f64 },

    /// An improper integral whose tail does not decay.
    #[error("integral tail does not converge: {0}")]
    DivergentTail(String),

    /// A closed loop was required but the trajectory is open.
    #[error("closed loop required: {0}")]
    OpenLoop(String),

    /// Parameter outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Gauge expression failed to parse or evaluate.
    #[error(transparent)]
    Expr(#[from] crate::expr::ExprError),
}

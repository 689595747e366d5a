use thiserror::Error;

use crate::dynamics::EvolutionState;
use crate::sigma::SigmaReport;
use crate::vstate::VStateSolution;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid contour: {0}")]
    InvalidContour(String),

    #[error("degenerate tangent at theta = {theta}: |z'| = {speed:e}")]
    DegenerateTangent { theta: f64, speed: f64 },

    #[error("contour self-intersects: segments {first} and {second} cross near ({x}, {y})")]
    SelfIntersection {
        first: usize,
        second: usize,
        x: f64,
        y: f64,
    },

    #[error("nonpositive signed area {area:e}")]
    Orientation { area: f64 },

    #[error("point ({x}, {y}) lies within {delta:e} of the boundary (distance {distance:e})")]
    BoundaryAmbiguity {
        x: f64,
        y: f64,
        distance: f64,
        delta: f64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("sign of phi disagrees with chi_D at ({x}, {y}): phi = {phi:e}, inside = {inside}")]
    LemmaViolation {
        x: f64,
        y: f64,
        phi: f64,
        inside: bool,
    },

    #[error("remainder decay exponent {exponent:.3} below 1.8: barycenter is not at the origin")]
    BarycenterNotCentered { exponent: f64 },

    #[error("Newton iteration did not converge in {iterations} iterations (residual {residual:e})")]
    Divergence {
        iterations: usize,
        residual: f64,
        last: Box<VStateSolution>,
    },

    #[error("singular Newton system: sigma_min / sigma_max = {ratio:e}")]
    SingularSystem { ratio: f64 },

    #[error("contour is not a V-state at Omega = {omega}: residual {residual:e} > {threshold:e}")]
    NotAVState {
        omega: f64,
        residual: f64,
        threshold: f64,
    },

    #[error("contour is not in Sigma_alpha for alpha = {}", report.alpha)]
    NotInClass { report: Box<SigmaReport> },

    #[error("evolution broke down at step {step}: {reason}")]
    EvolutionBreakdown {
        step: usize,
        reason: String,
        last: Box<EvolutionState>,
    },

    #[error("branch aborted after {} solutions: {source}", partial.len())]
    BranchAborted {
        partial: Vec<VStateSolution>,
        source: Box<Error>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

//! Detection and repair of rounded corners in watertight multipatch models.

mod model;
mod pipeline;

use thiserror::Error;

use crate::corner::AnalysisError;
use crate::diagnostics::DiagnosticsError;
use crate::fit::FitError;
use crate::spline::SplineError;

pub use model::{two_patch_model, watertightness_check, Adjacency, AdjacencyGap, Edge, MultipatchModel, WatertightReport, WATERTIGHT_TOL};
pub use pipeline::{
    detect_rounded_corners, repair_corner, repair_model, CandidateAction, CandidateOutcome, DetectOptions, NormalOverride, NormalSource, RepairCandidate, RepairPlan,
    RepairReport, DEFAULT_DETECT_ANGLE,
};

#[derive(Debug, Error)]
pub enum RepairError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("edge incompatibility in adjacency {adjacency}: {reason}")]
    EdgeIncompatibility { adjacency: usize, reason: String },
    #[error("corner is not repairable: {0}")]
    NotRepairable(String),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Spline(#[from] SplineError),
}

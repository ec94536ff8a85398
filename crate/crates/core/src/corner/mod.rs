//! Rounded-corner frames, classification of antiparallel corners and the
//! equivalent control-point conditions for clamped B-spline surfaces.

mod classify;
mod frame;
mod spline_conditions;

pub use classify::{classify_corner, CornerClassification, CornerKind, Diagnostics};
pub use frame::{corner_frame, limit_tangent_projection, CornerFrame, NotAntiparallelReason};
pub use spline_conditions::{spline_corner_conditions, star_vectors, CornerKnotData, SplineCornerReport};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spline::{corner_jet, Corner, SplineError, TensorSurface};

/// Decision thresholds for corner analysis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CornerTolerances {
    /// Largest angle (radians) between `ξ₁,₀` and `−ξ₀,₁` accepted as antiparallel.
    pub angle: f64,
    /// First partials shorter than `min_norm · scale` count as zero.
    pub min_norm: f64,
    /// `|det[r, s, t]| <= coplanar · ‖r‖‖s‖` counts as coplanar.
    pub coplanar: f64,
    /// `|⟨t×r, t×s⟩| <= degenerate · ‖r‖‖s‖` is the undecided band.
    pub degenerate: f64,
    /// Off-segment gate for `p₀,₀`, relative to `‖t*‖`.
    pub segment: f64,
}

impl Default for CornerTolerances {
    fn default() -> Self {
        CornerTolerances {
            angle: 1e-7,
            min_norm: 1e-12,
            coplanar: 1e-8,
            degenerate: 1e-10,
            segment: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("corner jet has non-finite entries")]
    NonFiniteJet,
    #[error("first partials are not antiparallel ({0:?})")]
    NotAntiparallel(NotAntiparallelReason),
    #[error("limit normal undefined: |t x r| = {cross_norm:e}")]
    NormalUndefined { cross_norm: f64 },
    #[error("control-point conditions need degrees >= 2, got ({degree_u}, {degree_v})")]
    DegreeTooLow { degree_u: usize, degree_v: usize },
    #[error("p10 and p01 coincide, so t* vanishes")]
    CoincidentNeighbors,
    #[error(transparent)]
    Spline(#[from] SplineError),
}

/// Classification and control-point report of one surface corner.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CornerReport {
    pub corner: Corner,
    pub classification: CornerClassification,
    /// Limit normal in the global orientation of `x_u × x_v`, if defined.
    pub global_normal: Option<crate::Vec3>,
    pub spline_conditions: Option<SplineCornerReport>,
    /// Why the control-point conditions could not be evaluated.
    pub spline_conditions_error: Option<String>,
}

/// Jet classification plus control-point conditions of `corner`.
pub fn analyze_corner(surface: &TensorSurface, corner: Corner, tol: &CornerTolerances) -> Result<CornerReport, AnalysisError> {
    let jet = corner_jet(surface, corner)?;
    let classification = classify_corner(&jet, tol);
    let global_normal = classification.frame.as_ref().map(|f| f.n * corner.orientation_sign());
    let (spline_conditions, spline_conditions_error) = match spline_corner_conditions(surface, corner, tol) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(CornerReport {
        corner,
        classification,
        global_normal,
        spline_conditions,
        spline_conditions_error,
    })
}

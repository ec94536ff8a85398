//! Numerical probes of normal continuity, curvature and local injectivity
//! near corners, plus the built-in fixture surfaces.

mod curvature;
mod export;
mod fixtures;
mod geometry;
mod injectivity;
mod probes;

use thiserror::Error;

use crate::corner::{AnalysisError, CornerKind};
use crate::spline::SplineError;

pub use curvature::{curvature_integral, curvature_integral_sequence, CURVATURE_GAUSS_POINTS};
pub use export::{fields_to_csv, sample_fields, FieldSample, FIELD_CSV_HEADER};
pub use fixtures::{
    bezier_from_monomials, degenerate_jet, random_rounded_net, discont_independent_jet, discont_opposite_jet, make_fixture, quadratic_taylor_patch, rounded_bezier,
    rounded_quadratic_jet, self_intersect, self_intersect_exact, FIXTURE_NAMES, TAYLOR_FIXTURE_EXTENT,
};
pub use geometry::{angle_between, fundamental_forms, normal_vector, FundamentalForms, SINGULAR_SINE};
pub use injectivity::{injectivity_probe, InjectivityOptions, InjectivityOutcome, ProjectionPlane, WitnessPair};
pub use probes::{
    axis_normal_probe, cross_norm_asymptotics, default_alphas, fit_rate, log_spaced, normal_convergence_probe, predicted_axis_angle, ProbeSeries,
    DEFAULT_PROBE_COUNT, DEFAULT_PROBE_MAX, DEFAULT_PROBE_MIN, PREASYMPTOTIC_DISCARD,
};

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("surface is singular at ({u}, {v})")]
    DegeneratePoint { u: f64, v: f64 },
    #[error("first fundamental form is singular at ({u}, {v})")]
    SingularMetric { u: f64, v: f64 },
    #[error("corner is {} rather than rounded", .0.as_str())]
    NotRounded(CornerKind),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unknown fixture '{0}'")]
    UnknownFixture(String),
    #[error(transparent)]
    Spline(#[from] SplineError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

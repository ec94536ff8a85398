//! Clamped B-spline bases, tensor-product surfaces, corner jets and
//! Gauss–Legendre quadrature over knot spans.

mod jet;
mod knots;
mod quadrature;
mod surface;

pub use jet::{corner_jet, jet_by_evaluation, jet_from_control_points, jet_mismatch, CornerJet, JET_PATH_TOLERANCE};
pub use knots::{BasisValues, KnotVector};
pub use quadrature::{gauss_legendre, gauss_on, knot_quadrature, quadrature_grid, QuadPoint};
pub use surface::{corner_index, Corner, PartialDerivatives, SurfaceJson, TensorSurface};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SplineError {
    #[error("degree must be at least 1")]
    DegreeZero,
    #[error("degree {degree} needs at least {} knots, got {count}", 2 * (.degree + 1))]
    TooFewKnots { degree: usize, count: usize },
    #[error("knot {index} is not finite")]
    NonFiniteKnot { index: usize },
    #[error("knots decrease at index {index}")]
    DecreasingKnots { index: usize },
    #[error("knot vector is not clamped (end knots need multiplicity degree + 1)")]
    NotClamped,
    #[error("interior knot {knot} has multiplicity {multiplicity} > degree")]
    InteriorMultiplicity { knot: f64, multiplicity: usize },
    #[error("parameter {value} outside [{start}, {end}]")]
    OutOfDomain { value: f64, start: f64, end: f64 },
    #[error("derivative order {order} exceeds degree {degree}")]
    OrderTooHigh { order: usize, degree: usize },
    #[error("control net must be {}x{} (got {rows} rows{})", .expected.0, .expected.1, .row.map(|r| format!(", row {r} has wrong length")).unwrap_or_default())]
    NetShape { expected: (usize, usize), rows: usize, row: Option<usize> },
    #[error("control net contains non-finite coordinates")]
    NonFiniteControlPoint,
    #[error("corner jets need degrees >= 2, got ({degree_u}, {degree_v})")]
    JetDegree { degree_u: usize, degree_v: usize },
    #[error("jet routes disagree (relative difference {relative:e})")]
    JetMismatch { relative: f64 },
    #[error("at least one quadrature point per span is required")]
    NoQuadraturePoints,
    #[error("unknown corner `{0}` (expected u0v0, u1v0, u0v1 or u1v1)")]
    UnknownCorner(String),
    #[error("field `{field}`: {source}")]
    Field { field: &'static str, source: Box<SplineError> },
}

impl SplineError {
    pub(crate) fn in_field(self, field: &'static str) -> SplineError {
        SplineError::Field { field, source: Box::new(self) }
    }
}

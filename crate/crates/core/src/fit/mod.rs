//! L²-projection onto tensor-product spline spaces, optionally subject to
//! rounded-corner constraints at prescribed limit normals.

mod assembly;
mod constraints;
mod hemisphere;
mod kkt;
mod project;

use thiserror::Error;

use crate::corner::AnalysisError;
use crate::spline::{KnotVector, SplineError, TensorSurface};

pub use assembly::{assemble_l2, gram_1d, Gram1d, L2System};
pub use constraints::{
    boundary_phase_rows, corner_constraint_rows, interior_phase_rows, net_vector, row_residuals, var_index, CornerConstraintSpec, ConstraintRow, RowKind,
};
pub use hemisphere::{
    disk_map, hemisphere_corner_constraints, hemisphere_elliptic, hemisphere_normal_probe, hemisphere_reference, FitConfig, HemisphereMap, Scheme,
};
pub use kkt::{filter_dependent_rows, solve_kkt, KktSolution, KKT_RANK_TOL};
pub use project::{fit_surface, CornerFitReport, FitProblem, FitReport, DEFAULT_ERROR_SAMPLES};

#[derive(Debug, Error)]
pub enum FitError {
    #[error("quadrature with {points} points per span is too coarse for degree {degree}")]
    InsufficientQuadrature { points: usize, degree: usize },
    #[error("Gram matrix is not positive definite")]
    SingularGram,
    #[error("invalid corner constraint: {0}")]
    InvalidConstraint(String),
    #[error("spline space {rows}x{cols} is too small for corner constraints")]
    SpaceTooSmall { rows: usize, cols: usize },
    #[error("constraint row {row} is dependent on earlier rows but inconsistent (residual {residual:e})")]
    InconsistentConstraints { row: usize, residual: f64 },
    #[error("KKT system is singular")]
    SingularKkt,
    #[error("invalid fit configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Spline(#[from] SplineError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

/// Pair of knot vectors spanning the trial space.
#[derive(Clone, Debug, PartialEq)]
pub struct FitSpace {
    pub ku: KnotVector,
    pub kv: KnotVector,
}

impl FitSpace {
    /// Degree `degree` on `[-1, 1]²` with uniform spacing `h = 2^-level`.
    pub fn dyadic(degree: usize, level: u32) -> Result<FitSpace, FitError> {
        let spans = 2usize.pow(level + 1);
        let k = KnotVector::uniform(degree, -1.0, 1.0, spans)?;
        Ok(FitSpace { ku: k.clone(), kv: k })
    }

    pub fn of_surface(surface: &TensorSurface) -> FitSpace {
        FitSpace {
            ku: surface.ku().clone(),
            kv: surface.kv().clone(),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.ku.num_basis(), self.kv.num_basis())
    }

    pub fn unknowns(&self) -> usize {
        let (a, b) = self.dims();
        a * b
    }
}

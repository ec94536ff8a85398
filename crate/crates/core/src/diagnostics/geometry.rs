use serde::{Deserialize, Serialize};

use super::DiagnosticsError;
use crate::spline::TensorSurface;
use crate::Vec3;

/// Relative size of `‖x_u × x_v‖` (against `‖x_u‖‖x_v‖`) below which a
/// point counts as singular.
pub const SINGULAR_SINE: f64 = 1e-14;

/// Unit normal `x_u × x_v / ‖x_u × x_v‖`.
pub fn normal_vector(surface: &TensorSurface, u: f64, v: f64) -> Result<Vec3, DiagnosticsError> {
    let d = surface.partials(u, v, 1)?;
    unit_normal(&d.get(1, 0), &d.get(0, 1)).ok_or(DiagnosticsError::DegeneratePoint { u, v })
}

pub(crate) fn unit_normal(xu: &Vec3, xv: &Vec3) -> Option<Vec3> {
    let cross = xu.cross(xv);
    let norm = cross.norm();
    let scale = xu.norm() * xv.norm();
    if !(norm > SINGULAR_SINE * scale) || norm == 0.0 {
        return None;
    }
    Some(cross / norm)
}

/// Angle between two vectors, accurate for small and near-π angles.
pub fn angle_between(a: &Vec3, b: &Vec3) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}

/// First and second fundamental forms, shape operator and principal curvatures.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FundamentalForms {
    pub g: [[f64; 2]; 2],
    pub b: [[f64; 2]; 2],
    /// Shape operator `G⁻¹ B`.
    pub shape: [[f64; 2]; 2],
    pub kappa1: f64,
    pub kappa2: f64,
    pub normal: Vec3,
    /// Surface element `‖x_u × x_v‖`.
    pub area_element: f64,
}

impl FundamentalForms {
    pub fn shape_trace(&self) -> f64 {
        self.shape[0][0] + self.shape[1][1]
    }

    pub fn shape_det(&self) -> f64 {
        self.shape[0][0] * self.shape[1][1] - self.shape[0][1] * self.shape[1][0]
    }
}

pub fn fundamental_forms(surface: &TensorSurface, u: f64, v: f64) -> Result<FundamentalForms, DiagnosticsError> {
    let d = surface.partials(u, v, 2)?;
    let (xu, xv) = (d.get(1, 0), d.get(0, 1));
    let cross = xu.cross(&xv);
    let area = cross.norm();
    let normal = unit_normal(&xu, &xv).ok_or(DiagnosticsError::DegeneratePoint { u, v })?;
    let (e, f, g) = (xu.dot(&xu), xu.dot(&xv), xv.dot(&xv));
    // det G = ‖x_u × x_v‖² avoids the cancellation in EG − F².
    let det_g = area * area;
    if !(det_g > 0.0) {
        return Err(DiagnosticsError::SingularMetric { u, v });
    }
    let (l, m, n) = (d.get(2, 0).dot(&normal), d.get(1, 1).dot(&normal), d.get(0, 2).dot(&normal));
    let inv = [[g / det_g, -f / det_g], [-f / det_g, e / det_g]];
    let shape = [
        [inv[0][0] * l + inv[0][1] * m, inv[0][0] * m + inv[0][1] * n],
        [inv[1][0] * l + inv[1][1] * m, inv[1][0] * m + inv[1][1] * n],
    ];
    let (kappa1, kappa2) = eigenvalues_2x2(&shape);
    Ok(FundamentalForms {
        g: [[e, f], [f, g]],
        b: [[l, m], [m, n]],
        shape,
        kappa1,
        kappa2,
        normal,
        area_element: area,
    })
}

/// Real eigenvalues of a 2×2 matrix similar to a symmetric one, largest
/// magnitude first. The smaller one is recovered from the determinant.
pub(crate) fn eigenvalues_2x2(m: &[[f64; 2]; 2]) -> (f64, f64) {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let diff = m[0][0] - m[1][1];
    let disc = (diff * diff + 4.0 * m[0][1] * m[1][0]).max(0.0).sqrt();
    let big = 0.5 * (tr + if tr >= 0.0 { disc } else { -disc });
    if big == 0.0 {
        return (0.0, 0.0);
    }
    (big, det / big)
}

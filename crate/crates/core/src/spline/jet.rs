use serde::{Deserialize, Serialize};

use super::{Corner, SplineError, TensorSurface};
use crate::Vec3;

/// Second-order Taylor data `ξ_{j,k} = ∂^{j+k} x / ∂u^j ∂v^k` at a corner,
/// expressed in the local frame where the corner is `(0, 0)` and both
/// parameters increase into the domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CornerJet {
    pub corner: Corner,
    pub xi00: Vec3,
    pub xi10: Vec3,
    pub xi01: Vec3,
    pub xi20: Vec3,
    pub xi11: Vec3,
    pub xi02: Vec3,
    /// Length scale for relative tolerances (control-net diameter when the
    /// jet comes from a surface).
    pub scale: f64,
}

impl CornerJet {
    /// Jet of the quadratic patch `Σ u^j v^k / (j! k!) ξ_{j,k}` at `(0, 0)`.
    pub fn from_taylor(xi00: Vec3, xi10: Vec3, xi01: Vec3, xi20: Vec3, xi11: Vec3, xi02: Vec3) -> Self {
        let scale = [xi10, xi01, xi20, xi11, xi02]
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        CornerJet {
            corner: Corner::U0V0,
            xi00,
            xi10,
            xi01,
            xi20,
            xi11,
            xi02,
            scale,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|v| v.iter().all(|c| c.is_finite())) && self.scale.is_finite()
    }

    pub fn entries(&self) -> [Vec3; 6] {
        [self.xi00, self.xi10, self.xi01, self.xi20, self.xi11, self.xi02]
    }

    /// Apply a linear map to the derivative entries and an affine one to `ξ_{0,0}`.
    pub fn transformed(&self, linear: &nalgebra::Matrix3<f64>, shift: Vec3) -> CornerJet {
        CornerJet {
            corner: self.corner,
            xi00: linear * self.xi00 + shift,
            xi10: linear * self.xi10,
            xi01: linear * self.xi01,
            xi20: linear * self.xi20,
            xi11: linear * self.xi11,
            xi02: linear * self.xi02,
            scale: self.scale,
        }
    }

    /// Exchange the roles of the two parameters.
    pub fn swapped(&self) -> CornerJet {
        CornerJet {
            corner: self.corner,
            xi00: self.xi00,
            xi10: self.xi01,
            xi01: self.xi10,
            xi20: self.xi02,
            xi11: self.xi11,
            xi02: self.xi20,
            scale: self.scale,
        }
    }

    /// Evaluate the quadratic Taylor polynomial at local `(u, v)`.
    pub fn taylor_point(&self, u: f64, v: f64) -> Vec3 {
        self.xi00 + self.xi10 * u + self.xi01 * v + self.xi20 * (0.5 * u * u) + self.xi11 * (u * v) + self.xi02 * (0.5 * v * v)
    }
}

/// Relative agreement required between the two jet routes.
pub const JET_PATH_TOLERANCE: f64 = 1e-10;

/// Jet at `corner` from generic derivative evaluation, cross-checked against
/// the closed-form control-point expressions.
pub fn corner_jet(surface: &TensorSurface, corner: Corner) -> Result<CornerJet, SplineError> {
    let local = surface.oriented_at(corner);
    let by_eval = jet_by_evaluation(&local, corner)?;
    let by_points = jet_from_control_points(&local, corner)?;
    let mismatch = jet_mismatch(&by_eval, &by_points);
    if mismatch > JET_PATH_TOLERANCE {
        return Err(SplineError::JetMismatch { relative: mismatch });
    }
    Ok(by_eval)
}

fn check_degrees(local: &TensorSurface) -> Result<(), SplineError> {
    let (du, dv) = (local.ku().degree(), local.kv().degree());
    if du < 2 || dv < 2 {
        return Err(SplineError::JetDegree { degree_u: du, degree_v: dv });
    }
    Ok(())
}

/// Route (a): evaluate partials of the locally oriented surface at `(0, 0)`.
pub fn jet_by_evaluation(local: &TensorSurface, corner: Corner) -> Result<CornerJet, SplineError> {
    check_degrees(local)?;
    let d = local.partials(0.0, 0.0, 2)?;
    Ok(CornerJet {
        corner,
        xi00: d.get(0, 0),
        xi10: d.get(1, 0),
        xi01: d.get(0, 1),
        xi20: d.get(2, 0),
        xi11: d.get(1, 1),
        xi02: d.get(0, 2),
        scale: local.diameter().max(f64::MIN_POSITIVE),
    })
}

/// Route (b): derivative formulas in terms of the corner control points and
/// the first interior knot offsets of a clamped knot vector.
pub fn jet_from_control_points(local: &TensorSurface, corner: Corner) -> Result<CornerJet, SplineError> {
    check_degrees(local)?;
    let (n1, n2) = (local.ku().degree() as f64, local.kv().degree() as f64);
    let (tu1, tu2) = (local.ku().start_offset(1), local.ku().start_offset(2));
    let (tv1, tv2) = (local.kv().start_offset(1), local.kv().start_offset(2));
    let p = |j, k| local.point(j, k);
    let d10 = p(1, 0) - p(0, 0);
    let d01 = p(0, 1) - p(0, 0);
    Ok(CornerJet {
        corner,
        xi00: p(0, 0),
        xi10: d10 * (n1 / tu1),
        xi01: d01 * (n2 / tv1),
        xi20: ((p(2, 0) - p(1, 0)) / tu2 - d10 / tu1) * (n1 * (n1 - 1.0) / tu1),
        xi11: (p(1, 1) - p(1, 0) - p(0, 1) + p(0, 0)) * (n1 * n2 / (tu1 * tv1)),
        xi02: ((p(0, 2) - p(0, 1)) / tv2 - d01 / tv1) * (n2 * (n2 - 1.0) / tv1),
        scale: local.diameter().max(f64::MIN_POSITIVE),
    })
}

/// Largest per-order relative difference between two jets.
pub fn jet_mismatch(a: &CornerJet, b: &CornerJet) -> f64 {
    let groups: [&[usize]; 3] = [&[0], &[1, 2], &[3, 4, 5]];
    let (ea, eb) = (a.entries(), b.entries());
    groups
        .iter()
        .map(|g| {
            let scale = g.iter().map(|&i| ea[i].norm().max(eb[i].norm())).fold(0.0, f64::max);
            let diff = g.iter().map(|&i| (ea[i] - eb[i]).norm()).fold(0.0, f64::max);
            if scale > 0.0 {
                diff / scale
            } else {
                diff
            }
        })
        .fold(0.0, f64::max)
}

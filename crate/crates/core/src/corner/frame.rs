use serde::{Deserialize, Serialize};

use super::{AnalysisError, CornerTolerances};
use crate::spline::CornerJet;
use crate::Vec3;

/// Limit frame of a corner with antiparallel first partials.
///
/// `ξ₁,₀ = λ t` and `ξ₀,₁ = −μ t`; `r = μ ξ₂,₀ + λ ξ₁,₁`,
/// `s = λ ξ₀,₂ + μ ξ₁,₁`; `n = t×r / ‖t×r‖`, `c = n×t`,
/// `ρ = ⟨c, r⟩`, `σ = ⟨c, s⟩`. All vectors live in the local frame of the
/// jet (corner at `(0,0)`, parameters increasing into the domain).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CornerFrame {
    pub t: Vec3,
    pub lambda: f64,
    pub mu: f64,
    pub r: Vec3,
    pub s: Vec3,
    pub n: Vec3,
    pub c: Vec3,
    pub rho: f64,
    pub sigma: f64,
}

impl CornerFrame {
    /// Coordinates of `(Id − n nᵗ)(point − origin)` in the basis `(t, c)`.
    pub fn project(&self, point: &Vec3, origin: &Vec3) -> [f64; 2] {
        limit_tangent_projection(self, point, origin)
    }
}

/// Outcome of the antiparallelism test on the first partials.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Antiparallel {
    pub t: Vec3,
    pub lambda: f64,
    pub mu: f64,
    pub angle: f64,
}

/// Why a pair of first partials is not antiparallel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NotAntiparallelReason {
    ZeroPartial,
    SameDirection,
    AngleExceedsTolerance,
}

/// Angle between `a` and `−b`.
pub(crate) fn antiparallel_angle(a: &Vec3, b: &Vec3) -> f64 {
    let cross = a.cross(b).norm();
    let dot = -a.dot(b);
    cross.atan2(dot)
}

pub(crate) fn check_antiparallel(jet: &CornerJet, tol: &CornerTolerances) -> Result<Antiparallel, NotAntiparallelReason> {
    let lambda = jet.xi10.norm();
    let mu = jet.xi01.norm();
    let floor = tol.min_norm * jet.scale;
    if lambda <= floor || mu <= floor {
        return Err(NotAntiparallelReason::ZeroPartial);
    }
    let angle = antiparallel_angle(&jet.xi10, &jet.xi01);
    if angle > tol.angle {
        return Err(if angle > std::f64::consts::FRAC_PI_2 {
            NotAntiparallelReason::SameDirection
        } else {
            NotAntiparallelReason::AngleExceedsTolerance
        });
    }
    let t = (jet.xi10 / lambda - jet.xi01 / mu).normalize();
    Ok(Antiparallel { t, lambda, mu, angle })
}

/// The vectors `r` and `s` of a jet for given `λ`, `μ`.
pub(crate) fn cross_vectors(jet: &CornerJet, lambda: f64, mu: f64) -> (Vec3, Vec3) {
    let r = jet.xi20 * mu + jet.xi11 * lambda;
    let s = jet.xi02 * lambda + jet.xi11 * mu;
    (r, s)
}

/// Build the limit frame of `jet`.
pub fn corner_frame(jet: &CornerJet, tol: &CornerTolerances) -> Result<CornerFrame, AnalysisError> {
    if !jet.is_finite() {
        return Err(AnalysisError::NonFiniteJet);
    }
    let anti = check_antiparallel(jet, tol).map_err(AnalysisError::NotAntiparallel)?;
    let (r, s) = cross_vectors(jet, anti.lambda, anti.mu);
    let txr = anti.t.cross(&r);
    let norm = txr.norm();
    let floor = tol.min_norm * r.norm().max(jet.scale * anti.lambda.max(anti.mu));
    if norm <= floor {
        return Err(AnalysisError::NormalUndefined { cross_norm: norm });
    }
    let n = txr / norm;
    let c = n.cross(&anti.t);
    Ok(CornerFrame {
        t: anti.t,
        lambda: anti.lambda,
        mu: anti.mu,
        r,
        s,
        n,
        c,
        rho: c.dot(&r),
        sigma: c.dot(&s),
    })
}

/// Coordinates `(⟨t, Π⟩, ⟨c, Π⟩)` of the projection of `point − origin` to the
/// limit tangent plane.
pub fn limit_tangent_projection(frame: &CornerFrame, point: &Vec3, origin: &Vec3) -> [f64; 2] {
    let d = point - origin;
    let projected = d - frame.n * frame.n.dot(&d);
    [frame.t.dot(&projected), frame.c.dot(&projected)]
}

use serde::{Deserialize, Serialize};

use super::frame::{antiparallel_angle, check_antiparallel, corner_frame, cross_vectors, NotAntiparallelReason};
use super::{CornerFrame, CornerTolerances};
use crate::spline::CornerJet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CornerKind {
    /// First partials linearly independent.
    Regular,
    /// Antiparallel, coplanar and onesided: normal continuous.
    Rounded,
    /// Antiparallel with `r, s, t` linearly independent.
    DiscontinuousIndependent,
    /// Antiparallel and coplanar with `⟨t×r, t×s⟩ < 0`.
    DiscontinuousOpposite,
    /// Antiparallel and coplanar with `⟨t×r, t×s⟩ = 0`; no smoothness claim.
    Degenerate,
    NotAntiparallel,
}

impl CornerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CornerKind::Regular => "Regular",
            CornerKind::Rounded => "Rounded",
            CornerKind::DiscontinuousIndependent => "DiscontinuousIndependent",
            CornerKind::DiscontinuousOpposite => "DiscontinuousOpposite",
            CornerKind::Degenerate => "Degenerate",
            CornerKind::NotAntiparallel => "NotAntiparallel",
        }
    }

    /// Whether the first partials are antiparallel.
    pub fn is_antiparallel(self) -> bool {
        !matches!(self, CornerKind::Regular | CornerKind::NotAntiparallel)
    }
}

/// Residuals behind a classification. Quantities that were not reached by
/// the decision procedure are `None`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Angle between `ξ₁,₀` and `−ξ₀,₁` in radians.
    pub antiparallel_angle: Option<f64>,
    /// `|det[r, s, t]| / (‖r‖‖s‖)`.
    pub coplanarity: Option<f64>,
    /// `⟨t×r, t×s⟩`.
    pub quadruple_product: Option<f64>,
    /// `⟨t×r, t×s⟩ / (‖r‖‖s‖)`.
    pub quadruple_scaled: Option<f64>,
    pub not_antiparallel: Option<NotAntiparallelReason>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CornerClassification {
    pub kind: CornerKind,
    pub diagnostics: Diagnostics,
    /// Limit frame, present whenever `t × r` is nonzero.
    pub frame: Option<CornerFrame>,
}

/// Classify the corner described by `jet`.
pub fn classify_corner(jet: &CornerJet, tol: &CornerTolerances) -> CornerClassification {
    let mut diagnostics = Diagnostics::default();
    let a = jet.xi10;
    let b = jet.xi01;
    let floor = tol.min_norm * jet.scale;
    let independent = a.norm() > floor && b.norm() > floor && {
        let sin = a.cross(&b).norm() / (a.norm() * b.norm());
        sin > tol.angle.sin()
    };
    if independent && jet.is_finite() {
        diagnostics.antiparallel_angle = Some(antiparallel_angle(&a, &b));
        return CornerClassification {
            kind: CornerKind::Regular,
            diagnostics,
            frame: None,
        };
    }
    let anti = match check_antiparallel(jet, tol) {
        Ok(a) => a,
        Err(reason) => {
            diagnostics.not_antiparallel = Some(reason);
            if a.norm() > floor && b.norm() > floor {
                diagnostics.antiparallel_angle = Some(antiparallel_angle(&a, &b));
            }
            return CornerClassification {
                kind: CornerKind::NotAntiparallel,
                diagnostics,
                frame: None,
            };
        }
    };
    diagnostics.antiparallel_angle = Some(anti.angle);
    let (r, s) = cross_vectors(jet, anti.lambda, anti.mu);
    let t = anti.t;
    let rs = r.norm() * s.norm();
    let det = r.dot(&s.cross(&t));
    let coplanarity = if rs > 0.0 { det.abs() / rs } else { 0.0 };
    let quad = t.cross(&r).dot(&t.cross(&s));
    let quad_scaled = if rs > 0.0 { quad / rs } else { 0.0 };
    diagnostics.coplanarity = Some(coplanarity);
    diagnostics.quadruple_product = Some(quad);
    diagnostics.quadruple_scaled = Some(quad_scaled);

    let kind = if det.abs() > tol.coplanar * rs {
        CornerKind::DiscontinuousIndependent
    } else if quad > tol.degenerate * rs {
        CornerKind::Rounded
    } else if quad < -tol.degenerate * rs {
        CornerKind::DiscontinuousOpposite
    } else {
        CornerKind::Degenerate
    };
    CornerClassification {
        kind,
        diagnostics,
        frame: corner_frame(jet, tol).ok(),
    }
}

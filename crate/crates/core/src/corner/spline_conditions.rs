use serde::{Deserialize, Serialize};

use super::{AnalysisError, CornerTolerances};
use crate::spline::{Corner, TensorSurface};
use crate::Vec3;

/// Control-point form of the rounded-corner conditions at one corner of a
/// clamped B-spline surface.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplineCornerReport {
    pub corner: Corner,
    pub alpha1: f64,
    pub alpha2: f64,
    pub r_star: Vec3,
    pub s_star: Vec3,
    pub t_star: Vec3,
    /// `p₀,₀ = α₁ p₁,₀ + α₂ p₀,₁` with `α₁ ∈ (0, 1)`.
    pub antiparallel: bool,
    /// `r*, s*, t*` linearly dependent.
    pub coplanar: bool,
    /// `⟨t*×r*, t*×s*⟩ > 0`.
    pub onesided: bool,
    /// `‖p₀,₀ − α₁ p₁,₀ − α₂ p₀,₁‖ / ‖t*‖`.
    pub segment_residual: f64,
    /// `|det[r*, s*, t*]| / (‖r*‖‖s*‖‖t*‖)`.
    pub coplanarity_residual: f64,
    pub quadruple_product: f64,
}

impl SplineCornerReport {
    pub fn all_hold(&self) -> bool {
        self.antiparallel && self.coplanar && self.onesided
    }
}

/// Knot quantities entering `r*` and `s*` for one corner.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CornerKnotData {
    pub degree_u: f64,
    pub degree_v: f64,
    pub tau_u1: f64,
    pub tau_u2: f64,
    pub tau_v1: f64,
    pub tau_v2: f64,
}

impl CornerKnotData {
    /// Knot data of a surface already oriented so the corner sits at `(0,0)`.
    pub fn of_local(local: &TensorSurface) -> CornerKnotData {
        CornerKnotData {
            degree_u: local.ku().degree() as f64,
            degree_v: local.kv().degree() as f64,
            tau_u1: local.ku().start_offset(1),
            tau_u2: local.ku().start_offset(2),
            tau_v1: local.kv().start_offset(1),
            tau_v2: local.kv().start_offset(2),
        }
    }

    /// Coefficients `(a, b)` with `r* = a (p₂,₀ − p₀,₀) + b (p₁,₁ − p₀,₀)`.
    pub fn r_coefficients(&self, alpha1: f64) -> (f64, f64) {
        let alpha2 = 1.0 - alpha1;
        ((self.degree_u - 1.0) * self.tau_u1 * alpha1, self.degree_u * self.tau_u2 * alpha2)
    }

    /// Coefficients `(a, b)` with `s* = a (p₀,₂ − p₀,₀) + b (p₁,₁ − p₀,₀)`.
    pub fn s_coefficients(&self, alpha1: f64) -> (f64, f64) {
        let alpha2 = 1.0 - alpha1;
        ((self.degree_v - 1.0) * self.tau_v1 * alpha2, self.degree_v * self.tau_v2 * alpha1)
    }
}

/// The vectors `(r*, s*, t*)` of a locally oriented surface for given `α₁`.
pub fn star_vectors(local: &TensorSurface, alpha1: f64) -> (Vec3, Vec3, Vec3) {
    let k = CornerKnotData::of_local(local);
    let p = |j, l| local.point(j, l);
    let (ra, rb) = k.r_coefficients(alpha1);
    let (sa, sb) = k.s_coefficients(alpha1);
    let r = (p(2, 0) - p(0, 0)) * ra + (p(1, 1) - p(0, 0)) * rb;
    let s = (p(0, 2) - p(0, 0)) * sa + (p(1, 1) - p(0, 0)) * sb;
    let t = p(1, 0) - p(0, 1);
    (r, s, t)
}

/// Check the control-point conditions at `corner`.
///
/// `α₁` is recovered by projecting `p₀,₀` onto the line through `p₀,₁` and
/// `p₁,₀`. Failing conditions are reported through the flags; only a
/// vanishing `t*` or too low a degree is an error.
pub fn spline_corner_conditions(surface: &TensorSurface, corner: Corner, tol: &CornerTolerances) -> Result<SplineCornerReport, AnalysisError> {
    let (du, dv) = (surface.ku().degree(), surface.kv().degree());
    if du < 2 || dv < 2 {
        return Err(AnalysisError::DegreeTooLow { degree_u: du, degree_v: dv });
    }
    let local = surface.oriented_at(corner);
    let p00 = local.point(0, 0);
    let p10 = local.point(1, 0);
    let p01 = local.point(0, 1);
    let t_star = p10 - p01;
    let t_norm = t_star.norm();
    if t_norm <= tol.min_norm * local.diameter() || t_norm == 0.0 {
        return Err(AnalysisError::CoincidentNeighbors);
    }
    let alpha1 = (p00 - p01).dot(&t_star) / (t_norm * t_norm);
    let alpha2 = 1.0 - alpha1;
    let segment_residual = (p00 - p01 - t_star * alpha1).norm() / t_norm;
    let antiparallel = segment_residual <= tol.segment && alpha1 > 0.0 && alpha1 < 1.0;

    let (r_star, s_star, _) = star_vectors(&local, alpha1);
    let rst = r_star.norm() * s_star.norm() * t_norm;
    let det = r_star.dot(&s_star.cross(&t_star));
    let coplanarity_residual = if rst > 0.0 { det.abs() / rst } else { 0.0 };
    let quad = t_star.cross(&r_star).dot(&t_star.cross(&s_star));
    let coplanar = det.abs() <= tol.coplanar * rst;
    let onesided = quad > tol.degenerate * rst * t_norm;
    Ok(SplineCornerReport {
        corner,
        alpha1,
        alpha2,
        r_star,
        s_star,
        t_star,
        antiparallel,
        coplanar,
        onesided,
        segment_residual,
        coplanarity_residual,
        quadruple_product: quad,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spline::KnotVector;

    fn v(x: f64, y: f64, z: f64) -> Vec3 {
        Vec3::new(x, y, z)
    }

    /// Biquadratic net with `p[j][k]`, `j` in `u`.
    fn example_net() -> Vec<Vec<Vec3>> {
        vec![
            vec![v(0., 0., 0.), v(-1., 0., 0.), v(-1., 1., 0.)],
            vec![v(1., 0., 0.), v(0., 1., 0.), v(-0.5, 1.5, 0.3)],
            vec![v(1., 1., 0.), v(0.5, 1.5, 0.3), v(0., 2., 0.6)],
        ]
    }

    fn bezier(net: Vec<Vec<Vec3>>) -> TensorSurface {
        let k = KnotVector::bezier(2, 0.0, 1.0).unwrap();
        TensorSurface::new(k.clone(), k, net).unwrap()
    }

    #[test]
    fn example_satisfies_all_conditions() {
        let r = spline_corner_conditions(&bezier(example_net()), Corner::U0V0, &CornerTolerances::default()).unwrap();
        assert_eq!((r.alpha1, r.alpha2), (0.5, 0.5));
        assert_eq!(r.t_star, v(2., 0., 0.));
        assert_eq!(r.r_star, v(0.5, 1.5, 0.));
        assert_eq!(r.s_star, v(-0.5, 1.5, 0.));
        assert_eq!(r.quadruple_product, 9.0);
        assert!(r.all_hold());
    }

    #[test]
    fn lifted_p20_breaks_coplanarity() {
        let mut net = example_net();
        net[2][0] = v(1., 1., 0.5);
        let r = spline_corner_conditions(&bezier(net), Corner::U0V0, &CornerTolerances::default()).unwrap();
        assert!(r.antiparallel && !r.coplanar);
    }

    #[test]
    fn lifting_p11_alone_keeps_coplanarity() {
        // r* and s* share their p₁,₁ term, so the lift stays in span{t*, r*}.
        let mut net = example_net();
        net[1][1] = v(0., 1., 0.5);
        let r = spline_corner_conditions(&bezier(net), Corner::U0V0, &CornerTolerances::default()).unwrap();
        assert_eq!(r.r_star, v(0.5, 1.5, 0.5));
        assert_eq!(r.s_star, v(-0.5, 1.5, 0.5));
        assert!(r.coplanar);
    }

    #[test]
    fn off_segment_and_errors() {
        let mut net = example_net();
        net[0][0] = v(0., 0.1, 0.);
        let r = spline_corner_conditions(&bezier(net.clone()), Corner::U0V0, &CornerTolerances::default()).unwrap();
        assert!(!r.antiparallel);
        assert!((r.segment_residual - 0.05).abs() < 1e-15);
        net[0][0] = v(2., 0., 0.);
        let r = spline_corner_conditions(&bezier(net.clone()), Corner::U0V0, &CornerTolerances::default()).unwrap();
        assert!(!r.antiparallel && r.alpha1 > 1.0);
        net[1][0] = net[0][1];
        assert_eq!(
            spline_corner_conditions(&bezier(net), Corner::U0V0, &CornerTolerances::default()),
            Err(AnalysisError::CoincidentNeighbors)
        );
    }
}

use super::geometry::fundamental_forms;
use super::DiagnosticsError;
use crate::spline::{gauss_on, Corner, TensorSurface};

/// Gauss points per cell and direction for curvature integrals.
pub const CURVATURE_GAUSS_POINTS: usize = 4;

/// Breakpoints `eps, 2 eps, 4 eps, …` up to `end`, merged with the knots.
fn geometric_breaks(eps: f64, end: f64, knots: &[f64]) -> Vec<f64> {
    let mut breaks = vec![eps];
    let mut x = eps;
    while 2.0 * x < end {
        x *= 2.0;
        breaks.push(x);
    }
    breaks.extend(knots.iter().copied().filter(|&k| k > eps && k < end));
    breaks.push(end);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * end.abs().max(1.0));
    breaks
}

/// `∫ |κ₁|^p + |κ₂|^p dμ` over the local square `[eps, H_u] × [eps, H_v]`
/// seen from `corner`, with cells refined geometrically toward the corner.
pub fn curvature_integral(surface: &TensorSurface, corner: Corner, p: f64, eps: f64) -> Result<f64, DiagnosticsError> {
    if !(p >= 1.0) {
        return Err(DiagnosticsError::InvalidArgument(format!("exponent must be >= 1, got {p}")));
    }
    let local = surface.oriented_at(corner);
    let (hu, hv) = (local.ku().end(), local.kv().end());
    if !(eps > 0.0) || eps >= hu.min(hv) {
        return Err(DiagnosticsError::InvalidArgument(format!("cutoff must lie in (0, {}), got {eps}", hu.min(hv))));
    }
    let bu = geometric_breaks(eps, hu, &local.ku().breakpoints());
    let bv = geometric_breaks(eps, hv, &local.kv().breakpoints());
    let rules_u: Vec<_> = bu.windows(2).map(|w| gauss_on(w[0], w[1], CURVATURE_GAUSS_POINTS)).collect();
    let rules_v: Vec<_> = bv.windows(2).map(|w| gauss_on(w[0], w[1], CURVATURE_GAUSS_POINTS)).collect();
    let mut total = 0.0;
    for ru in &rules_u {
        for rv in &rules_v {
            let mut cell = 0.0;
            for &(s, ws) in ru {
                for &(t, wt) in rv {
                    let f = fundamental_forms(&local, s, t)?;
                    cell += ws * wt * (f.kappa1.abs().powf(p) + f.kappa2.abs().powf(p)) * f.area_element;
                }
            }
            total += cell;
        }
    }
    Ok(total)
}

/// Values `I(eps_k)` for `eps_k = eps0 / 2^k`, `k = 0..halvings`.
pub fn curvature_integral_sequence(surface: &TensorSurface, corner: Corner, p: f64, eps0: f64, halvings: usize) -> Result<Vec<(f64, f64)>, DiagnosticsError> {
    (0..=halvings)
        .map(|k| {
            let eps = eps0 / 2f64.powi(k as i32);
            curvature_integral(surface, corner, p, eps).map(|v| (eps, v))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spline::KnotVector;
    use crate::Vec3;

    #[test]
    fn breaks_are_geometric() {
        let b = geometric_breaks(0.1, 1.0, &[0.0, 0.5, 1.0]);
        assert_eq!(b, vec![0.1, 0.2, 0.4, 0.5, 0.8, 1.0]);
    }

    #[test]
    fn plane_has_zero_integral() {
        let k = KnotVector::bezier(2, 0.0, 1.0).unwrap();
        let net = (0..3).map(|i| (0..3).map(|j| Vec3::new(i as f64, j as f64, 0.0)).collect()).collect();
        let s = TensorSurface::new(k.clone(), k, net).unwrap();
        for p in [1.0, 2.0, 3.0] {
            assert_eq!(curvature_integral(&s, Corner::U0V0, p, 1e-3).unwrap(), 0.0);
        }
        assert!(curvature_integral(&s, Corner::U0V0, 0.5, 1e-3).is_err());
        assert!(curvature_integral(&s, Corner::U0V0, 1.0, 0.0).is_err());
    }
}

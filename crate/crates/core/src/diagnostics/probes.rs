use serde::{Deserialize, Serialize};

use super::geometry::{angle_between, unit_normal};
use super::DiagnosticsError;
use crate::corner::{classify_corner, CornerClassification, CornerFrame, CornerKind, CornerTolerances};
use crate::spline::{corner_jet, Corner, TensorSurface};
use crate::Vec3;

/// Number of largest scales dropped before fitting a rate.
pub const PREASYMPTOTIC_DISCARD: usize = 2;
pub const DEFAULT_PROBE_MIN: f64 = 1e-7;
pub const DEFAULT_PROBE_MAX: f64 = 1e-1;
pub const DEFAULT_PROBE_COUNT: usize = 25;

/// A quantity measured at a decreasing sequence of scales `α`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeSeries {
    pub parameters: Vec<f64>,
    pub values: Vec<f64>,
    /// Least-squares slope of `log(value)` against `log(α)`.
    pub fitted_rate: f64,
}

/// `count` log-spaced scales from `max` down to `min`.
pub fn log_spaced(min: f64, max: f64, count: usize) -> Vec<f64> {
    if count <= 1 {
        return vec![max];
    }
    let (lo, hi) = (min.ln(), max.ln());
    (0..count).map(|i| (hi + (lo - hi) * i as f64 / (count - 1) as f64).exp()).collect()
}

pub fn default_alphas() -> Vec<f64> {
    log_spaced(DEFAULT_PROBE_MIN, DEFAULT_PROBE_MAX, DEFAULT_PROBE_COUNT)
}

/// Log-log slope over the samples with positive values, after dropping the
/// `discard` largest scales. `NaN` if fewer than two samples remain.
pub fn fit_rate(parameters: &[f64], values: &[f64], discard: usize) -> f64 {
    let mut pairs: Vec<(f64, f64)> = parameters
        .iter()
        .zip(values)
        .filter(|(a, v)| **a > 0.0 && **v > 0.0 && v.is_finite())
        .map(|(a, v)| (a.ln(), v.ln()))
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let pairs = &pairs[discard.min(pairs.len())..];
    if pairs.len() < 2 {
        return f64::NAN;
    }
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

fn check_alphas(alphas: &[f64]) -> Result<(), DiagnosticsError> {
    if alphas.is_empty() || alphas.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
        return Err(DiagnosticsError::InvalidArgument("probe scales must be positive".into()));
    }
    if alphas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(DiagnosticsError::InvalidArgument("probe scales must be strictly decreasing".into()));
    }
    Ok(())
}

fn check_direction(direction: [f64; 2]) -> Result<(), DiagnosticsError> {
    if direction[0] < 0.0 || direction[1] < 0.0 || direction[0] + direction[1] <= 0.0 {
        return Err(DiagnosticsError::InvalidArgument("direction must lie in the closed positive quadrant".into()));
    }
    Ok(())
}

/// Corner classification together with the locally oriented surface.
pub(crate) fn local_analysis(surface: &TensorSurface, corner: Corner) -> Result<(TensorSurface, CornerClassification), DiagnosticsError> {
    let jet = corner_jet(surface, corner)?;
    let class = classify_corner(&jet, &CornerTolerances::default());
    Ok((surface.oriented_at(corner), class))
}

fn rounded_frame(surface: &TensorSurface, corner: Corner) -> Result<(TensorSurface, CornerFrame), DiagnosticsError> {
    let (local, class) = local_analysis(surface, corner)?;
    match (class.kind, class.frame) {
        (CornerKind::Rounded, Some(frame)) => Ok((local, frame)),
        (kind, _) => Err(DiagnosticsError::NotRounded(kind)),
    }
}

/// Local unit normal at local `(s, t)`.
pub(crate) fn local_normal(local: &TensorSurface, s: f64, t: f64) -> Result<Vec3, DiagnosticsError> {
    let d = local.partials(s, t, 1)?;
    unit_normal(&d.get(1, 0), &d.get(0, 1)).ok_or(DiagnosticsError::DegeneratePoint { u: s, v: t })
}

/// Angles `∠(ν(α d), n)` at a rounded corner.
pub fn normal_convergence_probe(surface: &TensorSurface, corner: Corner, direction: [f64; 2], alphas: &[f64]) -> Result<ProbeSeries, DiagnosticsError> {
    check_alphas(alphas)?;
    check_direction(direction)?;
    let (local, frame) = rounded_frame(surface, corner)?;
    let values = alphas
        .iter()
        .map(|&a| local_normal(&local, a * direction[0], a * direction[1]).map(|nu| angle_between(&nu, &frame.n)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ProbeSeries {
        fitted_rate: fit_rate(alphas, &values, PREASYMPTOTIC_DISCARD),
        parameters: alphas.to_vec(),
        values,
    })
}

/// Angles between the normals at local `(α, 0)` and `(0, α)`.
pub fn axis_normal_probe(surface: &TensorSurface, corner: Corner, alphas: &[f64]) -> Result<ProbeSeries, DiagnosticsError> {
    check_alphas(alphas)?;
    let local = surface.oriented_at(corner);
    let values = alphas
        .iter()
        .map(|&a| Ok(angle_between(&local_normal(&local, a, 0.0)?, &local_normal(&local, 0.0, a)?)))
        .collect::<Result<Vec<_>, DiagnosticsError>>()?;
    let deviations: Vec<f64> = values.iter().map(|v| (v - values[values.len() - 1]).abs()).collect();
    Ok(ProbeSeries {
        fitted_rate: fit_rate(alphas, &deviations, PREASYMPTOTIC_DISCARD),
        parameters: alphas.to_vec(),
        values,
    })
}

/// Limit angle between the axis normals predicted from the corner jet:
/// `∠(t×r, t×s)` for independent `r, s, t`, `π` for opposite sides, `0`
/// for rounded corners. `None` for other kinds.
pub fn predicted_axis_angle(surface: &TensorSurface, corner: Corner) -> Result<Option<f64>, DiagnosticsError> {
    let jet = corner_jet(surface, corner)?;
    let class = classify_corner(&jet, &CornerTolerances::default());
    let (t, r, s) = match (&class.kind, &class.frame) {
        (CornerKind::DiscontinuousIndependent, _) => {
            let lambda = jet.xi10.norm();
            let mu = jet.xi01.norm();
            let t = (jet.xi10 / lambda - jet.xi01 / mu).normalize();
            let r = jet.xi20 * mu + jet.xi11 * lambda;
            let s = jet.xi02 * lambda + jet.xi11 * mu;
            (t, r, s)
        }
        (CornerKind::DiscontinuousOpposite, _) => return Ok(Some(std::f64::consts::PI)),
        (CornerKind::Rounded, _) => return Ok(Some(0.0)),
        _ => return Ok(None),
    };
    Ok(Some(angle_between(&t.cross(&r), &t.cross(&s))))
}

/// Ratios `‖x_u × x_v‖ / (ρu + σv)` at local `α d`; the fitted rate is that
/// of `|ratio − 1|`.
pub fn cross_norm_asymptotics(surface: &TensorSurface, corner: Corner, direction: [f64; 2], alphas: &[f64]) -> Result<ProbeSeries, DiagnosticsError> {
    check_alphas(alphas)?;
    check_direction(direction)?;
    let (local, frame) = rounded_frame(surface, corner)?;
    let mut values = Vec::with_capacity(alphas.len());
    for &a in alphas {
        let (s, t) = (a * direction[0], a * direction[1]);
        let d = local.partials(s, t, 1)?;
        let cross = d.get(1, 0).cross(&d.get(0, 1)).norm();
        values.push(cross / (frame.rho * s + frame.sigma * t));
    }
    let deviations: Vec<f64> = values.iter().map(|r| (r - 1.0).abs()).collect();
    Ok(ProbeSeries {
        fitted_rate: fit_rate(alphas, &deviations, PREASYMPTOTIC_DISCARD),
        parameters: alphas.to_vec(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_spacing() {
        let a = log_spaced(1e-7, 1e-1, 25);
        assert_eq!(a.len(), 25);
        assert!((a[0] - 1e-1).abs() < 1e-16 && (a[24] - 1e-7).abs() < 1e-20);
        assert!(a.windows(2).all(|w| w[1] < w[0]));
        assert!((a[4] / a[5] - 10f64.powf(0.25)).abs() < 1e-12);
    }

    #[test]
    fn rate_of_power_law() {
        let a = log_spaced(1e-6, 1e-1, 11);
        let v: Vec<f64> = a.iter().map(|x| 3.0 * x * x).collect();
        assert!((fit_rate(&a, &v, 2) - 2.0).abs() < 1e-12);
        // two samples dropped, zeros ignored
        let mut w = v.clone();
        w[0] = 1e9;
        w[1] = 1e9;
        w[5] = 0.0;
        assert!((fit_rate(&a, &w, 2) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_scales() {
        let s = super::super::fixtures::rounded_bezier();
        assert!(normal_convergence_probe(&s, Corner::U0V0, [1.0, 1.0], &[0.1, 0.2]).is_err());
        assert!(normal_convergence_probe(&s, Corner::U0V0, [-1.0, 1.0], &[0.1]).is_err());
        assert!(normal_convergence_probe(&s, Corner::U0V0, [1.0, 1.0], &[0.0]).is_err());
    }
}

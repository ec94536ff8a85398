use std::fmt::Write as _;

use super::geometry::fundamental_forms;
use super::DiagnosticsError;
use crate::spline::TensorSurface;
use crate::Vec3;

pub const FIELD_CSV_HEADER: &str = "u,v,x,y,z,nu_x,nu_y,nu_z,kappa1,kappa2,isophote";

/// One sample of the exported fields. Normal and curvature entries are
/// `NaN` at singular points.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSample {
    pub u: f64,
    pub v: f64,
    pub point: Vec3,
    pub normal: Vec3,
    pub kappa1: f64,
    pub kappa2: f64,
    /// `⟨ν, d⟩` for the isophote direction `d`.
    pub isophote: f64,
}

/// Samples on a `(nu + 1) × (nv + 1)` grid covering the whole domain.
pub fn sample_fields(surface: &TensorSurface, nu: usize, nv: usize, direction: Vec3) -> Result<Vec<FieldSample>, DiagnosticsError> {
    if nu == 0 || nv == 0 {
        return Err(DiagnosticsError::InvalidArgument("sample counts must be positive".into()));
    }
    let d = direction
        .try_normalize(0.0)
        .ok_or_else(|| DiagnosticsError::InvalidArgument("isophote direction is zero".into()))?;
    let (ku, kv) = (surface.ku(), surface.kv());
    let mut out = Vec::with_capacity((nu + 1) * (nv + 1));
    for i in 0..=nu {
        let u = if i == nu { ku.end() } else { ku.start() + ku.length() * i as f64 / nu as f64 };
        for j in 0..=nv {
            let v = if j == nv { kv.end() } else { kv.start() + kv.length() * j as f64 / nv as f64 };
            let point = surface.point_at(u, v)?;
            let (normal, kappa1, kappa2) = match fundamental_forms(surface, u, v) {
                Ok(f) => (f.normal, f.kappa1, f.kappa2),
                Err(DiagnosticsError::DegeneratePoint { .. } | DiagnosticsError::SingularMetric { .. }) => {
                    (Vec3::repeat(f64::NAN), f64::NAN, f64::NAN)
                }
                Err(e) => return Err(e),
            };
            out.push(FieldSample {
                u,
                v,
                point,
                normal,
                kappa1,
                kappa2,
                isophote: normal.dot(&d),
            });
        }
    }
    Ok(out)
}

fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:e}")
    }
}

pub fn fields_to_csv(samples: &[FieldSample]) -> String {
    let mut s = String::from(FIELD_CSV_HEADER);
    s.push('\n');
    for p in samples {
        let cols = [p.u, p.v, p.point.x, p.point.y, p.point.z, p.normal.x, p.normal.y, p.normal.z, p.kappa1, p.kappa2, p.isophote];
        let row: Vec<String> = cols.iter().map(|&x| num(x)).collect();
        let _ = writeln!(s, "{}", row.join(","));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spline::KnotVector;

    #[test]
    fn plane_export() {
        let k = KnotVector::bezier(2, 0.0, 1.0).unwrap();
        let net = (0..3).map(|i| (0..3).map(|j| Vec3::new(i as f64, j as f64, 0.0)).collect()).collect();
        let s = TensorSurface::new(k.clone(), k, net).unwrap();
        let samples = sample_fields(&s, 4, 3, Vec3::new(0.0, 0.0, 2.0)).unwrap();
        assert_eq!(samples.len(), 20);
        let csv = fields_to_csv(&samples);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], FIELD_CSV_HEADER);
        assert_eq!(lines.len(), 21);
        for l in &lines[1..] {
            let c: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            assert_eq!(c.len(), 11);
            assert_eq!((c[8], c[9], c[10]), (0.0, 0.0, 1.0));
        }
    }

    #[test]
    fn singular_corner_is_nan() {
        let s = super::super::fixtures::rounded_bezier();
        let samples = sample_fields(&s, 2, 2, Vec3::z()).unwrap();
        assert!(samples[0].kappa1.is_nan());
        assert!(fields_to_csv(&samples).lines().nth(1).unwrap().ends_with("nan,nan,nan"));
    }
}

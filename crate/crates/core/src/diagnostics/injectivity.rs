//! Sampling probe for self-overlaps of a patch projected to a plane.
//!
//! The probe samples the projection on a grid, pairs up samples that land
//! close together while being far apart in parameter space, and polishes
//! each pair with Gauss–Newton steps on `Π(η₀) − Π(η₁) = 0`. Finding no
//! witness is not a proof of injectivity.

use std::collections::HashMap;

use nalgebra::{Matrix2, Vector2, Vector4};
use serde::{Deserialize, Serialize};

use super::probes::local_analysis;
use super::DiagnosticsError;
use crate::spline::{Corner, TensorSurface};
use crate::Vec3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ProjectionPlane {
    /// Limit tangent plane of the corner (needs a limit frame).
    LimitTangent,
    /// Plane orthogonal to the given vector.
    Normal(Vec3),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InjectivityOptions {
    /// Grid intervals per direction.
    pub grid_density: usize,
    /// Fraction of the local domain (from the corner) that is sampled.
    pub extent: f64,
    pub plane: ProjectionPlane,
    /// Minimum parameter separation of a witness, in grid steps.
    pub min_separation_steps: f64,
    /// Projected distance below which a pair counts as a collision.
    pub distance_tol: f64,
    pub max_refinements: usize,
}

impl Default for InjectivityOptions {
    fn default() -> Self {
        InjectivityOptions {
            grid_density: 64,
            extent: 1.0,
            plane: ProjectionPlane::LimitTangent,
            min_separation_steps: 10.0,
            distance_tol: 1e-9,
            max_refinements: 256,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessPair {
    /// Global parameters of the two points.
    pub eta0: [f64; 2],
    pub eta1: [f64; 2],
    pub parameter_separation: f64,
    pub projected_distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result")]
pub enum InjectivityOutcome {
    /// No collision found; `resolution` is the parameter grid step.
    NoWitness { resolution: f64 },
    Witness(WitnessPair),
}

impl InjectivityOutcome {
    pub fn witness(&self) -> Option<&WitnessPair> {
        match self {
            InjectivityOutcome::Witness(w) => Some(w),
            InjectivityOutcome::NoWitness { .. } => None,
        }
    }
}

struct Projector<'a> {
    local: &'a TensorSurface,
    e1: Vec3,
    e2: Vec3,
    origin: Vec3,
    box_max: [f64; 2],
}

impl Projector<'_> {
    fn project(&self, s: f64, t: f64) -> Result<(Vector2<f64>, Matrix2<f64>), DiagnosticsError> {
        let d = self.local.partials(s, t, 1)?;
        let rel = d.get(0, 0) - self.origin;
        let (xu, xv) = (d.get(1, 0), d.get(0, 1));
        let value = Vector2::new(self.e1.dot(&rel), self.e2.dot(&rel));
        let jac = Matrix2::new(self.e1.dot(&xu), self.e1.dot(&xv), self.e2.dot(&xu), self.e2.dot(&xv));
        Ok((value, jac))
    }

    fn clamp(&self, s: f64, t: f64) -> (f64, f64) {
        (s.clamp(0.0, self.box_max[0]), t.clamp(0.0, self.box_max[1]))
    }

    /// Gauss–Newton with minimum-norm steps on the 2×4 system.
    fn refine(&self, mut a: (f64, f64), mut b: (f64, f64)) -> Result<(f64, (f64, f64), (f64, f64)), DiagnosticsError> {
        let mut best = f64::INFINITY;
        for _ in 0..60 {
            let (pa, ja) = self.project(a.0, a.1)?;
            let (pb, jb) = self.project(b.0, b.1)?;
            let f = pa - pb;
            best = f.norm();
            if best == 0.0 {
                break;
            }
            let jac = nalgebra::Matrix2x4::from_columns(&[ja.column(0).into(), ja.column(1).into(), (-jb.column(0)), (-jb.column(1))]);
            let jjt = jac * jac.transpose();
            let damping = 1e-14 * jjt.trace().max(f64::MIN_POSITIVE);
            let Some(inv) = (jjt + Matrix2::identity() * damping).try_inverse() else {
                break;
            };
            let step: Vector4<f64> = -(jac.transpose() * (inv * f));
            let na = self.clamp(a.0 + step[0], a.1 + step[1]);
            let nb = self.clamp(b.0 + step[2], b.1 + step[3]);
            if na == a && nb == b {
                break;
            }
            a = na;
            b = nb;
        }
        let (pa, _) = self.project(a.0, a.1)?;
        let (pb, _) = self.project(b.0, b.1)?;
        best = best.min((pa - pb).norm());
        Ok(((pa - pb).norm().min(best), a, b))
    }
}

/// Search for two parameter points near `corner` with the same projection.
pub fn injectivity_probe(surface: &TensorSurface, corner: Corner, options: &InjectivityOptions) -> Result<InjectivityOutcome, DiagnosticsError> {
    if options.grid_density < 2 || !(options.extent > 0.0 && options.extent <= 1.0) {
        return Err(DiagnosticsError::InvalidArgument("grid density >= 2 and extent in (0, 1] required".into()));
    }
    let local = surface.oriented_at(corner);
    let (e1, e2) = match options.plane {
        ProjectionPlane::LimitTangent => {
            let (_, class) = local_analysis(surface, corner)?;
            let frame = class.frame.ok_or(DiagnosticsError::NotRounded(class.kind))?;
            (frame.t, frame.c)
        }
        ProjectionPlane::Normal(n) => {
            let n = n.try_normalize(0.0).ok_or_else(|| DiagnosticsError::InvalidArgument("projection normal is zero".into()))?;
            let seed = if n.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
            let e1 = (seed - n * n.dot(&seed)).normalize();
            (e1, n.cross(&e1))
        }
    };
    let box_max = [local.ku().end() * options.extent, local.kv().end() * options.extent];
    let projector = Projector {
        local: &local,
        e1,
        e2,
        origin: local.point_at(0.0, 0.0)?,
        box_max,
    };

    let m = options.grid_density;
    let step = [box_max[0] / m as f64, box_max[1] / m as f64];
    let idx = |i: usize, j: usize| i * (m + 1) + j;
    let mut pts = Vec::with_capacity((m + 1) * (m + 1));
    for i in 0..=m {
        for j in 0..=m {
            pts.push(projector.project(i as f64 * step[0], j as f64 * step[1])?.0);
        }
    }
    let mut spacing = vec![0.0f64; pts.len()];
    for i in 0..=m {
        for j in 0..=m {
            let p = pts[idx(i, j)];
            let mut sp: f64 = 0.0;
            if i > 0 {
                sp = sp.max((p - pts[idx(i - 1, j)]).norm());
            }
            if i < m {
                sp = sp.max((p - pts[idx(i + 1, j)]).norm());
            }
            if j > 0 {
                sp = sp.max((p - pts[idx(i, j - 1)]).norm());
            }
            if j < m {
                sp = sp.max((p - pts[idx(i, j + 1)]).norm());
            }
            spacing[idx(i, j)] = sp;
        }
    }
    let cell = spacing.iter().copied().fold(0.0, f64::max) * 2.0;
    if !(cell > 0.0) {
        return Ok(InjectivityOutcome::NoWitness { resolution: step[0].max(step[1]) });
    }
    let key = |p: &Vector2<f64>| ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64);
    let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (k, p) in pts.iter().enumerate() {
        buckets.entry(key(p)).or_default().push(k);
    }

    let min_sep = options.min_separation_steps;
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (k, p) in pts.iter().enumerate() {
        let (ki, kj) = (k / (m + 1), k % (m + 1));
        let (cx, cy) = key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                let Some(list) = buckets.get(&(cx + dx, cy + dy)) else { continue };
                for &l in list {
                    if l <= k {
                        continue;
                    }
                    let (li, lj) = (l / (m + 1), l % (m + 1));
                    let di = ki as f64 - li as f64;
                    let dj = kj as f64 - lj as f64;
                    if (di * di + dj * dj).sqrt() < min_sep {
                        continue;
                    }
                    let reach = spacing[k] + spacing[l];
                    let dist = (p - pts[l]).norm();
                    if reach > 0.0 && dist <= reach {
                        candidates.push((dist / reach, k, l));
                    }
                }
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let grid_step = (step[0] * step[0] + step[1] * step[1]).sqrt() / std::f64::consts::SQRT_2;
    for &(_, k, l) in candidates.iter().take(options.max_refinements) {
        let a = ((k / (m + 1)) as f64 * step[0], (k % (m + 1)) as f64 * step[1]);
        let b = ((l / (m + 1)) as f64 * step[0], (l % (m + 1)) as f64 * step[1]);
        let (dist, a, b) = projector.refine(a, b)?;
        let sep = ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
        if dist <= options.distance_tol && sep >= min_sep * grid_step {
            let ga = surface.local_to_global(corner, a.0, a.1);
            let gb = surface.local_to_global(corner, b.0, b.1);
            return Ok(InjectivityOutcome::Witness(WitnessPair {
                eta0: [ga.0, ga.1],
                eta1: [gb.0, gb.1],
                parameter_separation: sep,
                projected_distance: dist,
            }));
        }
    }
    Ok(InjectivityOutcome::NoWitness { resolution: step[0].max(step[1]) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spline::KnotVector;

    #[test]
    fn planar_patch_has_no_witness() {
        let k = KnotVector::bezier(2, 0.0, 1.0).unwrap();
        let net = (0..3).map(|i| (0..3).map(|j| Vec3::new(i as f64, j as f64 + 0.1 * (i * j) as f64, 0.0)).collect()).collect();
        let s = TensorSurface::new(k.clone(), k, net).unwrap();
        let opts = InjectivityOptions {
            plane: ProjectionPlane::Normal(Vec3::z()),
            grid_density: 32,
            ..Default::default()
        };
        assert!(injectivity_probe(&s, Corner::U0V0, &opts).unwrap().witness().is_none());
    }
}

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::model::{watertightness_check, Edge, MultipatchModel, WatertightReport, WATERTIGHT_TOL};
use super::RepairError;
use crate::corner::{classify_corner, spline_corner_conditions, CornerKind, CornerTolerances, SplineCornerReport};
use crate::diagnostics::normal_vector;
use crate::fit::{fit_surface, CornerConstraintSpec, FitProblem, FitSpace};
use crate::spline::{corner_jet, Corner, TensorSurface};
use crate::Vec3;

/// Angle (radians) from exact antiparallelism up to which a corner is
/// listed as a candidate.
pub const DEFAULT_DETECT_ANGLE: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalOverride {
    pub patch: usize,
    pub corner: Corner,
    pub normal: Vec3,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectOptions {
    pub angle: f64,
    pub normals: Vec<NormalOverride>,
}

impl Default for DetectOptions {
    fn default() -> Self {
        DetectOptions {
            angle: DEFAULT_DETECT_ANGLE,
            normals: Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalSource {
    /// Limit normal of the corner frame.
    LimitFrame,
    /// Mean of the surface normals sampled next to the corner.
    SampledAverage,
    User,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepairCandidate {
    pub patch: usize,
    pub corner: Corner,
    /// Classification with the detection angle as antiparallelism
    /// tolerance; `None` if the corner jet is unavailable.
    pub kind: Option<CornerKind>,
    /// Angle between `ξ₁,₀` and `−ξ₀,₁`.
    pub antiparallel_angle: f64,
    /// Already a rounded corner satisfying all control-point conditions.
    pub conforming: bool,
    pub repairable: bool,
    pub normal: Option<Vec3>,
    pub normal_source: Option<NormalSource>,
    pub alpha1: f64,
    /// Adjacency records through the corner.
    pub adjacencies: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RepairPlan {
    pub candidates: Vec<RepairCandidate>,
}

fn angle_to_antiparallel(a: &Vec3, b: &Vec3) -> f64 {
    a.cross(b).norm().atan2(-a.dot(b))
}

fn conforms(surface: &TensorSurface, corner: Corner) -> bool {
    let tol = CornerTolerances::default();
    let Ok(jet) = corner_jet(surface, corner) else { return false };
    classify_corner(&jet, &tol).kind == CornerKind::Rounded && spline_corner_conditions(surface, corner, &tol).is_ok_and(|r| r.all_hold())
}

/// `⟨t×r, t×s⟩` of the corner jet after normalizing the first partials.
fn quadruple_product(surface: &TensorSurface, corner: Corner) -> Option<f64> {
    let jet = corner_jet(surface, corner).ok()?;
    let (lambda, mu) = (jet.xi10.norm(), jet.xi01.norm());
    let t = (jet.xi10 / lambda - jet.xi01 / mu).try_normalize(0.0)?;
    let r = jet.xi20 * mu + jet.xi11 * lambda;
    let s = jet.xi02 * lambda + jet.xi11 * mu;
    Some(t.cross(&r).dot(&t.cross(&s)))
}

fn sampled_normal(surface: &TensorSurface, corner: Corner) -> Option<Vec3> {
    let local = surface.oriented_at(corner);
    let delta = 1e-3 * local.ku().end().min(local.kv().end());
    let mut sum = Vec3::zeros();
    for (a, b) in [(1.0, 1.0), (1.0, 0.5), (0.5, 1.0)] {
        let (u, v) = surface.local_to_global(corner, a * delta, b * delta);
        sum += normal_vector(surface, u, v).ok()?;
    }
    sum.try_normalize(0.0)
}

fn corner_alpha(surface: &TensorSurface, corner: Corner) -> f64 {
    let local = surface.oriented_at(corner);
    let (p00, p10, p01) = (local.point(0, 0), local.point(1, 0), local.point(0, 1));
    let t = p10 - p01;
    let a = (p00 - p01).dot(&t) / t.norm_squared();
    if a.is_finite() && (0.05..=0.95).contains(&a) {
        a
    } else {
        0.5
    }
}

fn inspect(model: &MultipatchModel, patch: usize, corner: Corner, opts: &DetectOptions) -> Result<Option<RepairCandidate>, RepairError> {
    let surface = &model.patches[patch];
    let (u, v) = surface.local_to_global(corner, 0.0, 0.0);
    let d = surface.partials(u, v, 1)?;
    let sign = corner.orientation_sign();
    let (fu, fv) = corner.flips();
    let a = d.get(1, 0) * if fu { -1.0 } else { 1.0 };
    let b = d.get(0, 1) * if fv { -1.0 } else { 1.0 };
    if a.norm() == 0.0 || b.norm() == 0.0 {
        return Ok(None);
    }
    let angle = angle_to_antiparallel(&a, &b);
    if angle > opts.angle {
        return Ok(None);
    }
    let relaxed = CornerTolerances {
        angle: opts.angle,
        ..CornerTolerances::default()
    };
    let class = corner_jet(surface, corner).ok().map(|jet| classify_corner(&jet, &relaxed));
    let kind = class.as_ref().map(|c| c.kind);
    let conforming = conforms(surface, corner);
    let repairable = match kind {
        Some(CornerKind::Rounded) => true,
        Some(CornerKind::DiscontinuousIndependent) => quadruple_product(surface, corner).is_some_and(|q| q > 0.0),
        _ => false,
    } && surface.ku().degree() >= 2
        && surface.kv().degree() >= 2;
    let user = opts.normals.iter().find(|o| o.patch == patch && o.corner == corner);
    let (normal, normal_source) = if let Some(o) = user {
        (o.normal.try_normalize(0.0), Some(NormalSource::User))
    } else if let Some(frame) = class.as_ref().filter(|c| c.kind == CornerKind::Rounded).and_then(|c| c.frame.as_ref()) {
        (Some(frame.n * sign), Some(NormalSource::LimitFrame))
    } else {
        let n = sampled_normal(surface, corner);
        (n, n.map(|_| NormalSource::SampledAverage))
    };
    let adjacencies = model
        .adjacency
        .iter()
        .enumerate()
        .filter(|(_, adj)| Edge::through(corner).iter().any(|e| adj.touches(patch, *e)))
        .map(|(k, _)| k)
        .collect();
    Ok(Some(RepairCandidate {
        patch,
        corner,
        kind,
        antiparallel_angle: angle,
        conforming,
        repairable: repairable && normal.is_some(),
        normal,
        normal_source,
        alpha1: corner_alpha(surface, corner),
        adjacencies,
    }))
}

/// Every patch corner whose first partials are antiparallel within
/// `opts.angle`, in patch and corner order.
pub fn detect_rounded_corners(model: &MultipatchModel, opts: &DetectOptions) -> Result<RepairPlan, RepairError> {
    model.validate()?;
    let mut candidates = Vec::new();
    for patch in 0..model.patches.len() {
        for corner in Corner::ALL {
            if let Some(c) = inspect(model, patch, corner, opts)? {
                candidates.push(c);
            }
        }
    }
    Ok(RepairPlan { candidates })
}

/// Copy the edges of `start` outward through the adjacency graph so every
/// neighbour picks up the changed boundary control points.
fn propagate_edges(model: &mut MultipatchModel, start: usize) -> Result<(), RepairError> {
    let mut fixed = vec![false; model.patches.len()];
    fixed[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(q) = queue.pop_front() {
        for k in 0..model.adjacency.len() {
            let adj = model.adjacency[k];
            let (src_is_a, dst) = if adj.a == q && !fixed[adj.b] {
                (true, adj.b)
            } else if adj.b == q && !fixed[adj.a] {
                (false, adj.a)
            } else {
                continue;
            };
            for (pa, pb) in model.matched_points(k)? {
                let (from, to) = if src_is_a { (pa, pb) } else { (pb, pa) };
                let value = model.patches[q].point(from.0, from.1);
                *model.patches[dst].point_mut(to.0, to.1) = value;
            }
            fixed[dst] = true;
            queue.push_back(dst);
        }
    }
    Ok(())
}

/// Refit the candidate's patch against its own geometry with the corner
/// constrained, keep other conforming corners of the patch rounded, and
/// carry the new boundary to adjacent patches.
pub fn repair_corner(model: &MultipatchModel, candidate: &RepairCandidate) -> Result<MultipatchModel, RepairError> {
    if !candidate.repairable {
        return Err(RepairError::NotRepairable(format!("patch {} corner {}", candidate.patch, candidate.corner)));
    }
    let normal = candidate
        .normal
        .ok_or_else(|| RepairError::NotRepairable("no prescribed normal".into()))?;
    let patch = &model.patches[candidate.patch];
    let mut constraints = vec![CornerConstraintSpec::new(candidate.corner, candidate.alpha1, normal)];
    let tol = CornerTolerances::default();
    for corner in Corner::ALL {
        if corner == candidate.corner || !conforms(patch, corner) {
            continue;
        }
        let frame = classify_corner(&corner_jet(patch, corner)?, &tol).frame;
        if let Some(f) = frame {
            constraints.push(CornerConstraintSpec::new(corner, corner_alpha(patch, corner), f.n));
        }
    }
    let target = |u: f64, v: f64| patch.point_at(u, v).expect("quadrature nodes lie in the domain");
    let mut problem = FitProblem::new(FitSpace::of_surface(patch), &target);
    problem.constraints = constraints;
    problem.error_samples = 2;
    let report = fit_surface(&problem)?;
    let mut out = model.clone();
    out.patches[candidate.patch] = report.surface;
    propagate_edges(&mut out, candidate.patch)?;
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateAction {
    Repaired,
    SkippedConforming,
    NotRepairable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateOutcome {
    pub candidate: RepairCandidate,
    pub action: CandidateAction,
    pub before: Option<SplineCornerReport>,
    pub after: Option<SplineCornerReport>,
    pub after_kind: Option<CornerKind>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepairReport {
    pub schema_version: u32,
    pub before: WatertightReport,
    pub after: WatertightReport,
    pub outcomes: Vec<CandidateOutcome>,
    /// Corners that were rounded (or repaired) but no longer conform, and
    /// adjacencies left open.
    pub conflicts: Vec<String>,
}

/// Detect, refit and update every repairable candidate in order.
pub fn repair_model(model: &MultipatchModel, opts: &DetectOptions) -> Result<(MultipatchModel, RepairReport), RepairError> {
    let before = watertightness_check(model, WATERTIGHT_TOL)?;
    let plan = detect_rounded_corners(model, opts)?;
    let tol = CornerTolerances::default();
    let mut current = model.clone();
    let mut actions = Vec::with_capacity(plan.candidates.len());
    for cand in &plan.candidates {
        let before_flags = spline_corner_conditions(&current.patches[cand.patch], cand.corner, &tol).ok();
        let action = if cand.conforming {
            CandidateAction::SkippedConforming
        } else if !cand.repairable {
            CandidateAction::NotRepairable
        } else {
            // earlier repairs may have moved this patch
            let fresh = inspect(&current, cand.patch, cand.corner, opts)?.unwrap_or_else(|| cand.clone());
            current = repair_corner(&current, &RepairCandidate { repairable: true, ..fresh })?;
            CandidateAction::Repaired
        };
        actions.push((cand.clone(), action, before_flags));
    }
    let mut conflicts = Vec::new();
    let mut outcomes = Vec::with_capacity(actions.len());
    for (cand, action, before_flags) in actions {
        let s = &current.patches[cand.patch];
        let after = spline_corner_conditions(s, cand.corner, &tol).ok();
        let after_kind = corner_jet(s, cand.corner).ok().map(|j| classify_corner(&j, &tol).kind);
        if action != CandidateAction::NotRepairable && !conforms(s, cand.corner) {
            conflicts.push(format!("patch {} corner {} no longer satisfies the rounded-corner conditions", cand.patch, cand.corner));
        }
        outcomes.push(CandidateOutcome {
            candidate: cand,
            action,
            before: before_flags,
            after,
            after_kind,
        });
    }
    let after = watertightness_check(&current, WATERTIGHT_TOL)?;
    for g in &after.gaps {
        if g.max_gap > WATERTIGHT_TOL {
            conflicts.push(format!("adjacency {} has gap {:e}", g.adjacency, g.max_gap));
        }
    }
    Ok((
        current,
        RepairReport {
            schema_version: 1,
            before,
            after,
            outcomes,
            conflicts,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::{make_fixture, rounded_bezier};
    use crate::repair::two_patch_model;

    #[test]
    fn detects_single_candidate() {
        let m = two_patch_model();
        let plan = detect_rounded_corners(&m, &DetectOptions::default()).unwrap();
        assert_eq!(plan.candidates.len(), 1);
        let c = &plan.candidates[0];
        assert_eq!((c.patch, c.corner), (0, Corner::U0V0));
        assert!(c.repairable && !c.conforming);
        assert_eq!(c.adjacencies, vec![0]);
    }

    #[test]
    fn no_candidates_in_regular_model() {
        let mut m = two_patch_model();
        m.patches.remove(0);
        m.adjacency.clear();
        assert!(detect_rounded_corners(&m, &DetectOptions::default()).unwrap().candidates.is_empty());
        let (out, report) = repair_model(&m, &DetectOptions::default()).unwrap();
        assert_eq!(out, m);
        assert!(report.outcomes.is_empty() && report.conflicts.is_empty());
    }

    #[test]
    fn opposite_corner_is_listed_not_repaired() {
        let m = MultipatchModel {
            patches: vec![make_fixture("discont_opposite").unwrap()],
            adjacency: vec![],
        };
        let plan = detect_rounded_corners(&m, &DetectOptions::default()).unwrap();
        let c = plan.candidates.iter().find(|c| c.corner == Corner::U0V0).unwrap();
        assert_eq!(c.kind, Some(CornerKind::DiscontinuousOpposite));
        assert!(!c.repairable);
        let (out, report) = repair_model(&m, &DetectOptions::default()).unwrap();
        assert_eq!(out, m);
        assert_eq!(report.outcomes[0].action, CandidateAction::NotRepairable);
    }

    #[test]
    fn conforming_corner_is_skipped() {
        let m = MultipatchModel {
            patches: vec![rounded_bezier()],
            adjacency: vec![],
        };
        let (out, report) = repair_model(&m, &DetectOptions::default()).unwrap();
        assert_eq!(report.outcomes[0].action, CandidateAction::SkippedConforming);
        assert_eq!(out, m);
    }

    #[test]
    fn two_patch_repair() {
        let m = two_patch_model();
        let (out, report) = repair_model(&m, &DetectOptions::default()).unwrap();
        assert!(report.conflicts.is_empty(), "{:?}", report.conflicts);
        assert_eq!(report.after.max_gap, 0.0);
        assert!(report.outcomes[0].after.as_ref().unwrap().all_hold());
        assert_eq!(report.outcomes[0].after_kind, Some(CornerKind::Rounded));
        let (again, second) = repair_model(&out, &DetectOptions::default()).unwrap();
        assert_eq!(second.outcomes[0].action, CandidateAction::SkippedConforming);
        assert_eq!(again, out);
    }
}

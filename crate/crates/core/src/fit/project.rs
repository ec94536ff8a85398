use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::assembly::{assemble_l2, L2System};
use super::constraints::{boundary_phase_rows, corner_constraint_rows, interior_phase_rows, var_index, ConstraintRow, CornerConstraintSpec};
use super::kkt::{solve_kkt, solve_kkt_kronecker, KroneckerGram};
use super::{FitError, FitSpace};
use crate::corner::{classify_corner, spline_corner_conditions, CornerKind, CornerTolerances, SplineCornerReport};
use crate::diagnostics::angle_between;
use crate::spline::{corner_jet, Corner, TensorSurface};
use crate::Vec3;

/// Samples per direction of the error grid.
pub const DEFAULT_ERROR_SAMPLES: usize = 200;

pub struct FitProblem<'a> {
    pub space: FitSpace,
    pub target: &'a dyn Fn(f64, f64) -> Vec3,
    /// Exact unit normal of the target, for the normal-deviation metric.
    pub target_normal: Option<&'a dyn Fn(f64, f64) -> Vec3>,
    pub constraints: Vec<CornerConstraintSpec>,
    pub quad_points: usize,
    /// Fit the boundary curves first, then the interior.
    pub two_step: bool,
    pub error_samples: usize,
}

impl<'a> FitProblem<'a> {
    pub fn new(space: FitSpace, target: &'a dyn Fn(f64, f64) -> Vec3) -> FitProblem<'a> {
        let quad_points = space.ku.degree().max(space.kv.degree()) + 2;
        FitProblem {
            space,
            target,
            target_normal: None,
            constraints: Vec::new(),
            quad_points,
            two_step: false,
            error_samples: DEFAULT_ERROR_SAMPLES,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CornerFitReport {
    pub corner: Corner,
    pub kind: CornerKind,
    pub conditions: Option<SplineCornerReport>,
    pub onesided: bool,
    pub max_row_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitReport {
    pub surface: TensorSurface,
    pub l2_residual: f64,
    /// Maximum distance to the target over the sample grid.
    pub max_error: f64,
    /// Maximum normal deviation in radians, when the target normal is known.
    pub max_normal_angle: Option<f64>,
    pub constraint_residual: f64,
    pub multipliers: Vec<f64>,
    pub dropped_rows: usize,
    pub corners: Vec<CornerFitReport>,
}

fn rows_to_dense(rows: &[ConstraintRow], cols: usize, map: impl Fn(usize) -> Option<usize>) -> (DMatrix<f64>, DVector<f64>) {
    let mut c = DMatrix::zeros(rows.len(), cols);
    for (r, row) in rows.iter().enumerate() {
        for &(v, a) in &row.coeffs {
            let k = map(v).expect("row variable outside the active set");
            c[(r, k)] += a;
        }
    }
    (c, DVector::from_iterator(rows.len(), rows.iter().map(|r| r.rhs)))
}

fn stacked_moments(sys: &L2System) -> DVector<f64> {
    let (nu, nv) = (sys.gu.matrix.nrows(), sys.gv.matrix.nrows());
    let mut b = DVector::zeros(3 * nu * nv);
    for c in 0..3 {
        for i in 0..nu {
            for j in 0..nv {
                b[var_index((nu, nv), i, j, c)] = sys.moments[c][(i, j)];
            }
        }
    }
    b
}

fn fit_single(sys: &L2System, rows: &[ConstraintRow]) -> Result<(DVector<f64>, Vec<f64>, usize), FitError> {
    let g = KroneckerGram::new(sys.gu.matrix.clone(), sys.gv.matrix.clone(), 3)?;
    let (c, d) = rows_to_dense(rows, g.len(), Some);
    let sol = solve_kkt_kronecker(&g, &stacked_moments(sys), &c, &d)?;
    Ok((sol.x, sol.multipliers.iter().copied().collect(), sol.dropped.len()))
}

fn fit_two_step(
    sys: &L2System,
    space: &FitSpace,
    target: &dyn Fn(f64, f64) -> Vec3,
    boundary_rows: &[ConstraintRow],
    interior_rows: &[ConstraintRow],
) -> Result<(DVector<f64>, Vec<f64>, usize), FitError> {
    let (nu, nv) = space.dims();
    let n = nu * nv;
    let is_boundary = |i: usize, j: usize| i == 0 || j == 0 || i == nu - 1 || j == nv - 1;
    let mut compact = vec![None; n];
    let mut boundary = Vec::new();
    for i in 0..nu {
        for j in 0..nv {
            if is_boundary(i, j) {
                compact[i * nv + j] = Some(boundary.len());
                boundary.push((i, j));
            }
        }
    }
    let nb = boundary.len();

    // boundary curves: 1D Gram systems summed over the four edges
    let mut gram = DMatrix::zeros(3 * nb, 3 * nb);
    let mut rhs = DVector::zeros(3 * nb);
    let edges_u = [(0usize, space.ku.start()), (nu - 1, space.ku.end())];
    let edges_v = [(0usize, space.kv.start()), (nv - 1, space.kv.end())];
    let mut add_edge = |g1: &super::Gram1d, fixed: &dyn Fn(usize) -> usize, eval: &dyn Fn(f64) -> Vec3| {
        let m = g1.matrix.nrows();
        let values: Vec<Vec3> = g1.nodes.iter().map(|&x| eval(x)).collect();
        for a in 0..m {
            let ka = compact[fixed(a)].expect("edge point on boundary");
            for c in 0..3 {
                let moment: f64 = (0..values.len()).map(|q| g1.weights[q] * g1.basis[(a, q)] * values[q][c]).sum();
                rhs[c * nb + ka] += moment;
            }
            for b in 0..m {
                let kb = compact[fixed(b)].expect("edge point on boundary");
                for c in 0..3 {
                    gram[(c * nb + ka, c * nb + kb)] += g1.matrix[(a, b)];
                }
            }
        }
    };
    for &(i, u) in &edges_u {
        add_edge(&sys.gv, &|j| i * nv + j, &|v| target(u, v));
    }
    for &(j, v) in &edges_v {
        add_edge(&sys.gu, &|i| i * nv + j, &|u| target(u, v));
    }
    let to_boundary = |var: usize| compact[var % n].map(|k| (var / n) * nb + k);
    let (c, d) = rows_to_dense(boundary_rows, 3 * nb, to_boundary);
    let sol_b = solve_kkt(&gram, &rhs, &c, &d)?;

    let mut x = DVector::zeros(3 * n);
    for (k, &(i, j)) in boundary.iter().enumerate() {
        for c in 0..3 {
            x[var_index((nu, nv), i, j, c)] = sol_b.x[c * nb + k];
        }
    }
    let mut multipliers: Vec<f64> = sol_b.multipliers.iter().copied().collect();
    let mut dropped = sol_b.dropped.len();
    if nu < 3 || nv < 3 {
        return Ok((x, multipliers, dropped));
    }

    // interior with the boundary held fixed
    let (mi, mj) = (nu - 2, nv - 2);
    let ni = mi * mj;
    let g_full = KroneckerGram::new(sys.gu.matrix.clone(), sys.gv.matrix.clone(), 3)?;
    let coupling = g_full.apply(&x);
    let moments = stacked_moments(sys);
    let mut rhs_i = DVector::zeros(3 * ni);
    for c in 0..3 {
        for i in 1..nu - 1 {
            for j in 1..nv - 1 {
                let v = var_index((nu, nv), i, j, c);
                rhs_i[c * ni + (i - 1) * mj + (j - 1)] = moments[v] - coupling[v];
            }
        }
    }
    let g_int = KroneckerGram::new(
        sys.gu.matrix.view((1, 1), (mi, mi)).into_owned(),
        sys.gv.matrix.view((1, 1), (mj, mj)).into_owned(),
        3,
    )?;
    let to_interior = |var: usize| {
        let (c, rest) = (var / n, var % n);
        let (i, j) = (rest / nv, rest % nv);
        (!is_boundary(i, j)).then(|| c * ni + (i - 1) * mj + (j - 1))
    };
    let moved: Vec<ConstraintRow> = interior_rows
        .iter()
        .map(|row| {
            let mut r = row.clone();
            r.rhs -= row.coeffs.iter().filter(|(v, _)| to_interior(*v).is_none()).map(|&(v, a)| a * x[v]).sum::<f64>();
            r.coeffs.retain(|(v, _)| to_interior(*v).is_some());
            r
        })
        .collect();
    let (c, d) = rows_to_dense(&moved, 3 * ni, to_interior);
    let sol_i = solve_kkt_kronecker(&g_int, &rhs_i, &c, &d)?;
    for c in 0..3 {
        for i in 1..nu - 1 {
            for j in 1..nv - 1 {
                x[var_index((nu, nv), i, j, c)] = sol_i.x[c * ni + (i - 1) * mj + (j - 1)];
            }
        }
    }
    multipliers.extend(sol_i.multipliers.iter());
    dropped += sol_i.dropped.len();
    Ok((x, multipliers, dropped))
}

fn l2_residual(sys: &L2System, surface: &TensorSurface) -> f64 {
    let (nu, nv) = surface.dims();
    let mut total = 0.0;
    for c in 0..3 {
        let p = DMatrix::from_fn(nu, nv, |i, j| surface.point(i, j)[c]);
        let fitted = sys.gu.basis.transpose() * p * &sys.gv.basis;
        for a in 0..sys.gu.nodes.len() {
            for b in 0..sys.gv.nodes.len() {
                let e = fitted[(a, b)] - sys.target_values[c][(a, b)];
                total += sys.gu.weights[a] * sys.gv.weights[b] * e * e;
            }
        }
    }
    total.sqrt()
}

/// `(max distance, max normal angle)` over a uniform grid, skipping the four
/// domain corners.
fn sampled_errors(surface: &TensorSurface, problem: &FitProblem) -> Result<(f64, Option<f64>), FitError> {
    let m = problem.error_samples.max(2);
    let ((u0, u1), (v0, v1)) = surface.domain();
    let at = |a: f64, b: f64, k: usize| if k == m - 1 { b } else { a + (b - a) * k as f64 / (m - 1) as f64 };
    let mut max_err: f64 = 0.0;
    let mut max_angle: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            if (i == 0 || i == m - 1) && (j == 0 || j == m - 1) {
                continue;
            }
            let (u, v) = (at(u0, u1, i), at(v0, v1, j));
            let d = surface.partials(u, v, 1)?;
            max_err = max_err.max((d.get(0, 0) - (problem.target)(u, v)).norm());
            if let Some(normal) = problem.target_normal {
                let cross = d.get(1, 0).cross(&d.get(0, 1));
                let angle = if cross.norm() > 0.0 { angle_between(&cross, &normal(u, v)) } else { std::f64::consts::PI };
                max_angle = max_angle.max(angle);
            }
        }
    }
    Ok((max_err, problem.target_normal.map(|_| max_angle)))
}

/// L²-projection of the target onto the space, subject to the corner
/// constraints of the problem.
pub fn fit_surface(problem: &FitProblem) -> Result<FitReport, FitError> {
    let mut seen = Vec::new();
    for spec in &problem.constraints {
        spec.validate()?;
        if seen.contains(&spec.corner) {
            return Err(FitError::InvalidConstraint(format!("corner {} constrained twice", spec.corner)));
        }
        seen.push(spec.corner);
    }
    let space = &problem.space;
    let sys = assemble_l2(space, problem.target, problem.quad_points)?;
    let mut all_rows = Vec::new();
    let mut boundary_rows = Vec::new();
    let mut interior_rows = Vec::new();
    for spec in &problem.constraints {
        all_rows.extend(corner_constraint_rows(spec, space)?);
        boundary_rows.extend(boundary_phase_rows(spec, space)?);
        interior_rows.extend(interior_phase_rows(spec, space)?);
    }
    let (x, multipliers, dropped_rows) = if problem.two_step {
        fit_two_step(&sys, space, problem.target, &boundary_rows, &interior_rows)?
    } else {
        fit_single(&sys, &all_rows)?
    };

    let (nu, nv) = space.dims();
    let n = nu * nv;
    let net: Vec<Vec3> = (0..n).map(|k| Vec3::new(x[k], x[n + k], x[2 * n + k])).collect();
    let surface = TensorSurface::from_flat(space.ku.clone(), space.kv.clone(), net);
    let xs: Vec<f64> = x.iter().copied().collect();
    let constraint_residual = all_rows.iter().map(|r| r.eval(&xs).abs()).fold(0.0, f64::max);

    let tol = CornerTolerances::default();
    let mut corners = Vec::new();
    for spec in &problem.constraints {
        let conditions = spline_corner_conditions(&surface, spec.corner, &tol).ok();
        let kind = classify_corner(&corner_jet(&surface, spec.corner)?, &tol).kind;
        let max_row_residual = all_rows
            .iter()
            .filter(|r| r.corner == spec.corner)
            .map(|r| r.eval(&xs).abs())
            .fold(0.0, f64::max);
        corners.push(CornerFitReport {
            corner: spec.corner,
            kind,
            onesided: conditions.as_ref().is_some_and(|c| c.onesided),
            conditions,
            max_row_residual,
        });
    }
    let (max_error, max_normal_angle) = sampled_errors(&surface, problem)?;
    Ok(FitReport {
        l2_residual: l2_residual(&sys, &surface),
        surface,
        max_error,
        max_normal_angle,
        constraint_residual,
        multipliers,
        dropped_rows,
        corners,
    })
}

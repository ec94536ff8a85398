use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{FitError, FitSpace};
use crate::corner::CornerKnotData;
use crate::spline::{corner_index, Corner, TensorSurface};
use crate::Vec3;

fn half() -> f64 {
    0.5
}

/// Rounded-corner constraint at one corner: weights `α₁, 1 − α₁` and the
/// prescribed limit normal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CornerConstraintSpec {
    #[serde(rename = "id")]
    pub corner: Corner,
    #[serde(default = "half")]
    pub alpha1: f64,
    pub normal: Vec3,
}

impl CornerConstraintSpec {
    pub fn new(corner: Corner, alpha1: f64, normal: Vec3) -> CornerConstraintSpec {
        CornerConstraintSpec { corner, alpha1, normal }
    }

    pub fn alpha2(&self) -> f64 {
        1.0 - self.alpha1
    }

    pub fn validate(&self) -> Result<(), FitError> {
        if !(self.alpha1 > 0.0 && self.alpha1 < 1.0) {
            return Err(FitError::InvalidConstraint(format!("alpha1 = {} must lie in (0, 1)", self.alpha1)));
        }
        let len = self.normal.norm();
        if !((len - 1.0).abs() <= 1e-9) {
            return Err(FitError::InvalidConstraint(format!("normal must have unit length, got {len}")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowKind {
    /// Component of `p₀,₀ − α₁ p₁,₀ − α₂ p₀,₁ = 0`.
    Antiparallel(usize),
    /// `⟨t*, n⟩ = 0`.
    Tangent,
    /// `⟨r*, n⟩ = 0`.
    RPlane,
    /// `⟨s*, n⟩ = 0`.
    SPlane,
    /// Combination of the `r*` and `s*` rows free of `p₁,₁`.
    Combined,
}

/// Sparse linear equation `Σ coeffs · x = rhs` over the stacked control
/// point coordinates (see [`var_index`]).
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintRow {
    pub corner: Corner,
    pub kind: RowKind,
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

impl ConstraintRow {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(i, a)| a * x[i]).sum::<f64>() - self.rhs
    }
}

/// Position of coordinate `coord` of control point `(i, j)` in the stacked
/// unknown vector: coordinates outermost, then rows in `u`.
pub fn var_index(dims: (usize, usize), i: usize, j: usize, coord: usize) -> usize {
    coord * dims.0 * dims.1 + i * dims.1 + j
}

/// Control points of `surface` in [`var_index`] order.
pub fn net_vector(surface: &TensorSurface) -> Vec<f64> {
    let (n1, n2) = surface.dims();
    let mut x = vec![0.0; 3 * n1 * n2];
    for i in 0..n1 {
        for j in 0..n2 {
            let p = surface.point(i, j);
            for c in 0..3 {
                x[var_index((n1, n2), i, j, c)] = p[c];
            }
        }
    }
    x
}

struct RowBuilder {
    dims: (usize, usize),
    corner: Corner,
    acc: BTreeMap<usize, f64>,
}

impl RowBuilder {
    fn new(dims: (usize, usize), corner: Corner) -> Self {
        RowBuilder { dims, corner, acc: BTreeMap::new() }
    }

    /// Add `a · p_{j,k}[coord]` with local indices.
    fn add(&mut self, j: usize, k: usize, coord: usize, a: f64) {
        let (i, l) = corner_index(self.corner, self.dims, j, k);
        *self.acc.entry(var_index(self.dims, i, l, coord)).or_insert(0.0) += a;
    }

    /// Add `a · ⟨p_{j,k}, n⟩`.
    fn add_dot(&mut self, j: usize, k: usize, n: &Vec3, a: f64) {
        for c in 0..3 {
            if n[c] != 0.0 {
                self.add(j, k, c, a * n[c]);
            }
        }
    }

    fn finish(self, kind: RowKind) -> ConstraintRow {
        ConstraintRow {
            corner: self.corner,
            kind,
            coeffs: self.acc.into_iter().filter(|(_, a)| *a != 0.0).collect(),
            rhs: 0.0,
        }
    }
}

fn knot_data(space: &FitSpace, corner: Corner) -> CornerKnotData {
    let (fu, fv) = corner.flips();
    let offset = |k: &crate::spline::KnotVector, flip: bool, m: usize| {
        let t = k.knots();
        if flip {
            k.end() - t[t.len() - 1 - k.degree() - m]
        } else {
            t[k.degree() + m] - k.start()
        }
    };
    CornerKnotData {
        degree_u: space.ku.degree() as f64,
        degree_v: space.kv.degree() as f64,
        tau_u1: offset(&space.ku, fu, 1),
        tau_u2: offset(&space.ku, fu, 2),
        tau_v1: offset(&space.kv, fv, 1),
        tau_v2: offset(&space.kv, fv, 2),
    }
}

fn check_space(space: &FitSpace) -> Result<(usize, usize), FitError> {
    let dims = space.dims();
    if dims.0 < 3 || dims.1 < 3 || space.ku.degree() < 2 || space.kv.degree() < 2 {
        return Err(FitError::SpaceTooSmall { rows: dims.0, cols: dims.1 });
    }
    Ok(dims)
}

struct CornerRows {
    anti: [ConstraintRow; 3],
    tangent: ConstraintRow,
    r: ConstraintRow,
    s: ConstraintRow,
    combined: ConstraintRow,
}

fn build_rows(spec: &CornerConstraintSpec, space: &FitSpace) -> Result<CornerRows, FitError> {
    spec.validate()?;
    let dims = check_space(space)?;
    let (a1, a2) = (spec.alpha1, spec.alpha2());
    let n = spec.normal;
    let corner = spec.corner;
    let anti = [0, 1, 2].map(|c| {
        let mut b = RowBuilder::new(dims, corner);
        b.add(0, 0, c, 1.0);
        b.add(1, 0, c, -a1);
        b.add(0, 1, c, -a2);
        b.finish(RowKind::Antiparallel(c))
    });
    let mut b = RowBuilder::new(dims, corner);
    b.add_dot(1, 0, &n, 1.0);
    b.add_dot(0, 1, &n, -1.0);
    let tangent = b.finish(RowKind::Tangent);

    let k = knot_data(space, corner);
    let (ra, rb) = k.r_coefficients(a1);
    let (sa, sb) = k.s_coefficients(a1);
    let mut b = RowBuilder::new(dims, corner);
    b.add_dot(2, 0, &n, ra);
    b.add_dot(1, 1, &n, rb);
    b.add_dot(0, 0, &n, -(ra + rb));
    let r = b.finish(RowKind::RPlane);
    let mut b = RowBuilder::new(dims, corner);
    b.add_dot(0, 2, &n, sa);
    b.add_dot(1, 1, &n, sb);
    b.add_dot(0, 0, &n, -(sa + sb));
    let s = b.finish(RowKind::SPlane);
    // sb · r-row − rb · s-row
    let mut b = RowBuilder::new(dims, corner);
    b.add_dot(2, 0, &n, sb * ra);
    b.add_dot(0, 2, &n, -rb * sa);
    b.add_dot(0, 0, &n, -(sb * ra - rb * sa));
    let combined = b.finish(RowKind::Combined);
    Ok(CornerRows { anti, tangent, r, s, combined })
}

/// The six rows of one corner: three antiparallelism components and
/// `⟨t*, n⟩ = ⟨r*, n⟩ = ⟨s*, n⟩ = 0`.
pub fn corner_constraint_rows(spec: &CornerConstraintSpec, space: &FitSpace) -> Result<Vec<ConstraintRow>, FitError> {
    let CornerRows { anti, tangent, r, s, .. } = build_rows(spec, space)?;
    let mut rows = anti.to_vec();
    rows.extend([tangent, r, s]);
    Ok(rows)
}

/// Rows touching only boundary control points: antiparallelism, `⟨t*, n⟩`
/// and the `p₁,₁`-free combination of the `r*` and `s*` rows.
pub fn boundary_phase_rows(spec: &CornerConstraintSpec, space: &FitSpace) -> Result<Vec<ConstraintRow>, FitError> {
    let CornerRows { anti, tangent, combined, .. } = build_rows(spec, space)?;
    let mut rows = anti.to_vec();
    rows.extend([tangent, combined]);
    Ok(rows)
}

/// The `⟨r*, n⟩` row, which together with the boundary rows spans the same
/// space as [`corner_constraint_rows`].
pub fn interior_phase_rows(spec: &CornerConstraintSpec, space: &FitSpace) -> Result<Vec<ConstraintRow>, FitError> {
    Ok(vec![build_rows(spec, space)?.r])
}

/// Residuals of `rows` at the control points of `surface`.
pub fn row_residuals(rows: &[ConstraintRow], surface: &TensorSurface) -> Vec<f64> {
    let x = net_vector(surface);
    rows.iter().map(|r| r.eval(&x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::rounded_bezier;
    use crate::spline::KnotVector;

    #[test]
    fn example_net_satisfies_rows() {
        let s = rounded_bezier();
        let spec = CornerConstraintSpec::new(Corner::U0V0, 0.5, Vec3::z());
        let space = FitSpace::of_surface(&s);
        let rows = corner_constraint_rows(&spec, &space).unwrap();
        assert_eq!(rows.len(), 6);
        for r in row_residuals(&rows, &s) {
            assert_eq!(r, 0.0);
        }
        for r in row_residuals(&boundary_phase_rows(&spec, &space).unwrap(), &s) {
            assert_eq!(r, 0.0);
        }
    }

    #[test]
    fn antiparallel_residual_is_midpoint_gap() {
        let mut s = rounded_bezier();
        *s.point_mut(0, 0) = Vec3::new(0.1, -0.2, 0.3);
        let spec = CornerConstraintSpec::new(Corner::U0V0, 0.5, Vec3::z());
        let rows = corner_constraint_rows(&spec, &FitSpace::of_surface(&s)).unwrap();
        let res = row_residuals(&rows, &s);
        let gap = s.point(0, 0) - (s.point(1, 0) + s.point(0, 1)) * 0.5;
        for c in 0..3 {
            assert!((res[c] - gap[c]).abs() < 1e-15);
        }
    }

    #[test]
    fn cubic_coefficients() {
        let k = KnotVector::new(3, vec![0., 0., 0., 0., 0.5, 1., 1., 1., 1.]).unwrap();
        let space = FitSpace { ku: k.clone(), kv: k };
        let spec = CornerConstraintSpec::new(Corner::U0V0, 0.5, Vec3::x());
        let rows = corner_constraint_rows(&spec, &space).unwrap();
        let dims = space.dims();
        let r = &rows[4];
        let coeff = |i, j| r.coeffs.iter().find(|(v, _)| *v == var_index(dims, i, j, 0)).map(|e| e.1).unwrap();
        // (n₁ − 1) τ₁ α₁ with τ₁ = 0.5 and n₁ τ₂ α₂ with τ₂ = 1
        assert_eq!(coeff(2, 0), 2.0 * 0.5 * 0.5);
        assert_eq!(coeff(1, 1), 3.0 * 1.0 * 0.5);
    }

    #[test]
    fn corner_rows_follow_orientation() {
        // the u1v1 corner of a mirrored net sees the same local data
        let s = rounded_bezier();
        let mirrored = s.oriented_at(Corner::U1V1);
        let spec = CornerConstraintSpec::new(Corner::U1V1, 0.5, Vec3::z());
        let res = row_residuals(&corner_constraint_rows(&spec, &FitSpace::of_surface(&mirrored)).unwrap(), &mirrored);
        assert!(res.iter().all(|r| r.abs() < 1e-15));
    }

    #[test]
    fn rejects_bad_specs() {
        let space = FitSpace::dyadic(2, 1).unwrap();
        for spec in [
            CornerConstraintSpec::new(Corner::U0V0, 1.0, Vec3::z()),
            CornerConstraintSpec::new(Corner::U0V0, 0.5, Vec3::new(0.0, 0.0, 2.0)),
        ] {
            assert!(corner_constraint_rows(&spec, &space).is_err());
        }
        let k = KnotVector::bezier(1, 0.0, 1.0).unwrap();
        let tiny = FitSpace { ku: k.clone(), kv: k };
        assert!(corner_constraint_rows(&CornerConstraintSpec::new(Corner::U0V0, 0.5, Vec3::z()), &tiny).is_err());
    }
}

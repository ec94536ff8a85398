use serde::{Deserialize, Serialize};

use super::{KnotVector, SplineError};
use crate::Vec3;

/// One of the four corners of a rectangular parameter domain.
///
/// `U1V0` is the corner at `(u_end, v_start)`, and so on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Corner {
    #[serde(rename = "u0v0")]
    U0V0,
    #[serde(rename = "u1v0")]
    U1V0,
    #[serde(rename = "u0v1")]
    U0V1,
    #[serde(rename = "u1v1")]
    U1V1,
}

impl Corner {
    pub const ALL: [Corner; 4] = [Corner::U0V0, Corner::U1V0, Corner::U0V1, Corner::U1V1];

    /// Whether the local frame runs against the global `u` / `v` direction.
    pub fn flips(self) -> (bool, bool) {
        match self {
            Corner::U0V0 => (false, false),
            Corner::U1V0 => (true, false),
            Corner::U0V1 => (false, true),
            Corner::U1V1 => (true, true),
        }
    }

    /// `+1` if the local frame keeps the orientation of `x_u × x_v`, `-1` otherwise.
    pub fn orientation_sign(self) -> f64 {
        let (fu, fv) = self.flips();
        if fu ^ fv {
            -1.0
        } else {
            1.0
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Corner::U0V0 => "u0v0",
            Corner::U1V0 => "u1v0",
            Corner::U0V1 => "u0v1",
            Corner::U1V1 => "u1v1",
        }
    }
}

impl std::fmt::Display for Corner {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Corner {
    type Err = SplineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Corner::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| SplineError::UnknownCorner(s.to_string()))
    }
}

/// Tensor-product B-spline surface `x(u,v) = Σ b_j(u) b_k(v) p_{j,k}`.
///
/// The control net is stored row-major with the row index running in `u`.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorSurface {
    ku: KnotVector,
    kv: KnotVector,
    net: Vec<Vec3>,
}

/// All mixed partials `∂^{a+b} x / ∂u^a ∂v^b` with `a, b <= order`.
#[derive(Clone, Debug)]
pub struct PartialDerivatives {
    order: usize,
    values: Vec<Vec3>,
}

impl PartialDerivatives {
    pub fn get(&self, du: usize, dv: usize) -> Vec3 {
        self.values[du * (self.order + 1) + dv]
    }
}

impl TensorSurface {
    pub fn new(ku: KnotVector, kv: KnotVector, net: Vec<Vec<Vec3>>) -> Result<Self, SplineError> {
        let (n1, n2) = (ku.num_basis(), kv.num_basis());
        if net.len() != n1 {
            return Err(SplineError::NetShape {
                expected: (n1, n2),
                rows: net.len(),
                row: None,
            });
        }
        if let Some((i, _)) = net.iter().enumerate().find(|(_, r)| r.len() != n2) {
            return Err(SplineError::NetShape {
                expected: (n1, n2),
                rows: net.len(),
                row: Some(i),
            });
        }
        let net: Vec<Vec3> = net.into_iter().flatten().collect();
        if net.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(SplineError::NonFiniteControlPoint);
        }
        Ok(TensorSurface { ku, kv, net })
    }

    pub(crate) fn from_flat(ku: KnotVector, kv: KnotVector, net: Vec<Vec3>) -> Self {
        debug_assert_eq!(net.len(), ku.num_basis() * kv.num_basis());
        TensorSurface { ku, kv, net }
    }

    pub fn ku(&self) -> &KnotVector {
        &self.ku
    }

    pub fn kv(&self) -> &KnotVector {
        &self.kv
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.ku.num_basis(), self.kv.num_basis())
    }

    pub fn point(&self, i: usize, j: usize) -> Vec3 {
        self.net[i * self.kv.num_basis() + j]
    }

    pub fn point_mut(&mut self, i: usize, j: usize) -> &mut Vec3 {
        let n2 = self.kv.num_basis();
        &mut self.net[i * n2 + j]
    }

    /// Flat control net, row-major in `u`.
    pub fn net(&self) -> &[Vec3] {
        &self.net
    }

    pub fn rows(&self) -> Vec<Vec<Vec3>> {
        self.net.chunks(self.kv.num_basis()).map(|r| r.to_vec()).collect()
    }

    pub fn domain(&self) -> ((f64, f64), (f64, f64)) {
        ((self.ku.start(), self.ku.end()), (self.kv.start(), self.kv.end()))
    }

    /// Diameter of the bounding box of the control net.
    pub fn diameter(&self) -> f64 {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for p in &self.net {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        (hi - lo).norm()
    }

    fn check_domain(&self, u: f64, v: f64) -> Result<(), SplineError> {
        for (x, k) in [(u, &self.ku), (v, &self.kv)] {
            if !x.is_finite() || !k.contains(x) {
                return Err(SplineError::OutOfDomain {
                    value: x,
                    start: k.start(),
                    end: k.end(),
                });
            }
        }
        Ok(())
    }

    /// Partial derivative `∂^{ju+jv} x / ∂u^ju ∂v^jv` at `(u, v)`.
    pub fn eval(&self, u: f64, v: f64, ju: usize, jv: usize) -> Result<Vec3, SplineError> {
        self.check_domain(u, v)?;
        if ju > self.ku.degree() {
            return Err(SplineError::OrderTooHigh {
                order: ju,
                degree: self.ku.degree(),
            });
        }
        if jv > self.kv.degree() {
            return Err(SplineError::OrderTooHigh {
                order: jv,
                degree: self.kv.degree(),
            });
        }
        let bu = self.ku.basis_unchecked(u, ju);
        let bv = self.kv.basis_unchecked(v, jv);
        Ok(self.contract(&bu.ders[ju], bu.first, &bv.ders[jv], bv.first))
    }

    pub fn point_at(&self, u: f64, v: f64) -> Result<Vec3, SplineError> {
        self.eval(u, v, 0, 0)
    }

    /// All partials up to `order` in each direction; orders above the degree are zero.
    pub fn partials(&self, u: f64, v: f64, order: usize) -> Result<PartialDerivatives, SplineError> {
        self.check_domain(u, v)?;
        let bu = self.ku.basis_unchecked(u, order);
        let bv = self.kv.basis_unchecked(v, order);
        let mut values = Vec::with_capacity((order + 1) * (order + 1));
        for a in 0..=order {
            for b in 0..=order {
                values.push(self.contract(&bu.ders[a], bu.first, &bv.ders[b], bv.first));
            }
        }
        Ok(PartialDerivatives { order, values })
    }

    fn contract(&self, wu: &[f64], fu: usize, wv: &[f64], fv: usize) -> Vec3 {
        let n2 = self.kv.num_basis();
        let mut acc = Vec3::zeros();
        for (i, &a) in wu.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let row = (fu + i) * n2;
            let mut inner = Vec3::zeros();
            for (j, &b) in wv.iter().enumerate() {
                inner += self.net[row + fv + j] * b;
            }
            acc += inner * a;
        }
        acc
    }

    /// The same surface reparametrized so that `corner` sits at local `(0, 0)`
    /// and both local parameters increase into the domain.
    pub fn oriented_at(&self, corner: Corner) -> TensorSurface {
        let (fu, fv) = corner.flips();
        let ku = if fu { self.ku.local_reversed() } else { self.ku.local_forward() };
        let kv = if fv { self.kv.local_reversed() } else { self.kv.local_forward() };
        let (n1, n2) = self.dims();
        let mut net = Vec::with_capacity(n1 * n2);
        for j in 0..n1 {
            for k in 0..n2 {
                let (gi, gj) = corner_index(corner, (n1, n2), j, k);
                net.push(self.point(gi, gj));
            }
        }
        TensorSurface { ku, kv, net }
    }

    /// Global parameter of the local point `(s, t)` seen from `corner`.
    pub fn local_to_global(&self, corner: Corner, s: f64, t: f64) -> (f64, f64) {
        let (fu, fv) = corner.flips();
        let u = if fu { self.ku.end() - s } else { self.ku.start() + s };
        let v = if fv { self.kv.end() - t } else { self.kv.start() + t };
        (u, v)
    }

    /// Apply `f` to every control point.
    pub fn map_points(&self, f: impl Fn(&Vec3) -> Vec3) -> TensorSurface {
        TensorSurface {
            ku: self.ku.clone(),
            kv: self.kv.clone(),
            net: self.net.iter().map(f).collect(),
        }
    }

    pub fn to_json(&self) -> SurfaceJson {
        SurfaceJson {
            degree_u: self.ku.degree(),
            degree_v: self.kv.degree(),
            knots_u: self.ku.knots().to_vec(),
            knots_v: self.kv.knots().to_vec(),
            control_points: self
                .rows()
                .into_iter()
                .map(|r| r.into_iter().map(|p| [p.x, p.y, p.z]).collect())
                .collect(),
        }
    }

    pub fn from_json(json: &SurfaceJson) -> Result<Self, SplineError> {
        let ku = KnotVector::new(json.degree_u, json.knots_u.clone()).map_err(|e| e.in_field("knots_u"))?;
        let kv = KnotVector::new(json.degree_v, json.knots_v.clone()).map_err(|e| e.in_field("knots_v"))?;
        let net = json
            .control_points
            .iter()
            .map(|row| row.iter().map(|p| Vec3::new(p[0], p[1], p[2])).collect())
            .collect();
        TensorSurface::new(ku, kv, net).map_err(|e| e.in_field("control_points"))
    }
}

/// Global control-point index of local index `(j, k)` seen from `corner`.
pub fn corner_index(corner: Corner, dims: (usize, usize), j: usize, k: usize) -> (usize, usize) {
    let (fu, fv) = corner.flips();
    let i = if fu { dims.0 - 1 - j } else { j };
    let l = if fv { dims.1 - 1 - k } else { k };
    (i, l)
}

/// Surface exchange format; `control_points[i][j]` has `i` running in `u`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceJson {
    pub degree_u: usize,
    pub degree_v: usize,
    pub knots_u: Vec<f64>,
    pub knots_v: Vec<f64>,
    pub control_points: Vec<Vec<[f64; 3]>>,
}

impl Serialize for TensorSurface {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TensorSurface {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let json = SurfaceJson::deserialize(deserializer)?;
        TensorSurface::from_json(&json).map_err(serde::de::Error::custom)
    }
}

use serde::{Deserialize, Serialize};

use super::RepairError;
use crate::spline::{Corner, KnotVector, TensorSurface};
use crate::Vec3;

/// Default tolerance on shared control-point gaps.
pub const WATERTIGHT_TOL: f64 = 1e-12;

/// Boundary edge of a patch, named by the fixed parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Edge {
    U0,
    U1,
    V0,
    V1,
}

impl Edge {
    pub const ALL: [Edge; 4] = [Edge::U0, Edge::U1, Edge::V0, Edge::V1];

    /// Edges meeting at a corner.
    pub fn through(corner: Corner) -> [Edge; 2] {
        let (fu, fv) = corner.flips();
        [if fu { Edge::U1 } else { Edge::U0 }, if fv { Edge::V1 } else { Edge::V0 }]
    }

    /// Control-point indices along the edge in increasing parameter order.
    pub fn indices(self, dims: (usize, usize)) -> Vec<(usize, usize)> {
        let (n1, n2) = dims;
        match self {
            Edge::U0 => (0..n2).map(|j| (0, j)).collect(),
            Edge::U1 => (0..n2).map(|j| (n1 - 1, j)).collect(),
            Edge::V0 => (0..n1).map(|i| (i, 0)).collect(),
            Edge::V1 => (0..n1).map(|i| (i, n2 - 1)).collect(),
        }
    }

    /// Knot vector running along the edge.
    pub fn knots(self, s: &TensorSurface) -> &KnotVector {
        match self {
            Edge::U0 | Edge::U1 => s.kv(),
            Edge::V0 | Edge::V1 => s.ku(),
        }
    }
}

/// Two patches sharing an edge; `reversed` when the edge parameters run in
/// opposite directions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Adjacency {
    pub a: usize,
    pub edge_a: Edge,
    pub b: usize,
    pub edge_b: Edge,
    #[serde(default)]
    pub reversed: bool,
}

impl Adjacency {
    pub fn touches(&self, patch: usize, edge: Edge) -> bool {
        (self.a == patch && self.edge_a == edge) || (self.b == patch && self.edge_b == edge)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultipatchModel {
    pub patches: Vec<TensorSurface>,
    #[serde(default)]
    pub adjacency: Vec<Adjacency>,
}

impl MultipatchModel {
    pub fn from_json_str(text: &str) -> Result<MultipatchModel, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Point pairs `((patch, i, j), (patch, i, j))` matched by an adjacency.
    pub(crate) fn matched_points(&self, index: usize) -> Result<Vec<((usize, usize), (usize, usize))>, RepairError> {
        let adj = self.adjacency[index];
        let pa = &self.patches[adj.a];
        let pb = &self.patches[adj.b];
        let ia = adj.edge_a.indices(pa.dims());
        let mut ib = adj.edge_b.indices(pb.dims());
        if ia.len() != ib.len() {
            return Err(RepairError::EdgeIncompatibility {
                adjacency: index,
                reason: format!("{} control points against {}", ia.len(), ib.len()),
            });
        }
        let (ka, kb) = (adj.edge_a.knots(pa), adj.edge_b.knots(pb));
        if ka.degree() != kb.degree() {
            return Err(RepairError::EdgeIncompatibility {
                adjacency: index,
                reason: format!("degree {} against {}", ka.degree(), kb.degree()),
            });
        }
        let unit = |k: &KnotVector, rev: bool| -> Vec<f64> {
            let mut t: Vec<f64> = k.knots().iter().map(|x| (x - k.start()) / k.length()).collect();
            if rev {
                t = t.iter().rev().map(|x| 1.0 - x).collect();
            }
            t
        };
        let (ta, tb) = (unit(ka, false), unit(kb, adj.reversed));
        if ta.iter().zip(&tb).any(|(x, y)| (x - y).abs() > 1e-12) {
            return Err(RepairError::EdgeIncompatibility {
                adjacency: index,
                reason: "knot vectors along the edge differ".into(),
            });
        }
        if adj.reversed {
            ib.reverse();
        }
        Ok(ia.into_iter().zip(ib).collect())
    }

    pub fn validate(&self) -> Result<(), RepairError> {
        for (k, adj) in self.adjacency.iter().enumerate() {
            if adj.a >= self.patches.len() || adj.b >= self.patches.len() {
                return Err(RepairError::InvalidModel(format!("adjacency {k} refers to a missing patch")));
            }
            if adj.a == adj.b && adj.edge_a == adj.edge_b {
                return Err(RepairError::InvalidModel(format!("adjacency {k} joins an edge to itself")));
            }
            self.matched_points(k)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdjacencyGap {
    pub adjacency: usize,
    pub max_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WatertightReport {
    pub gaps: Vec<AdjacencyGap>,
    pub max_gap: f64,
    pub watertight: bool,
}

/// Largest distance between matched edge control points per adjacency.
pub fn watertightness_check(model: &MultipatchModel, tol: f64) -> Result<WatertightReport, RepairError> {
    model.validate()?;
    let mut gaps = Vec::with_capacity(model.adjacency.len());
    for (k, adj) in model.adjacency.iter().enumerate() {
        let gap = model
            .matched_points(k)?
            .into_iter()
            .map(|((i, j), (l, m))| (model.patches[adj.a].point(i, j) - model.patches[adj.b].point(l, m)).norm())
            .fold(0.0, f64::max);
        gaps.push(AdjacencyGap { adjacency: k, max_gap: gap });
    }
    let max_gap = gaps.iter().map(|g| g.max_gap).fold(0.0, f64::max);
    Ok(WatertightReport {
        gaps,
        max_gap,
        watertight: max_gap <= tol,
    })
}

fn v(x: f64, y: f64, z: f64) -> Vec3 {
    Vec3::new(x, y, z)
}

/// Biquadratic patch with a nearly rounded `(0,0)` corner (its corner point
/// is lifted off the segment of its neighbours) and a bilinear-in-`v`
/// flange sharing its `v = 0` edge.
pub fn two_patch_model() -> MultipatchModel {
    let k = KnotVector::new(2, vec![0., 0., 0., 0.5, 1., 1., 1.]).expect("valid knots");
    let rows = vec![
        vec![v(0., 0.01, 0.005), v(-1., 0., 0.), v(-1., 1., 0.), v(-1.2, 2., 0.1)],
        vec![v(1., 0., 0.), v(0., 1., 0.), v(-0.5, 1.5, 0.3), v(-0.8, 2.2, 0.4)],
        vec![v(1., 1., 0.), v(0.5, 1.5, 0.3), v(0., 2., 0.6), v(-0.4, 2.6, 0.8)],
        vec![v(1.2, 2., 0.1), v(0.8, 2.2, 0.4), v(0.3, 2.6, 0.8), v(-0.2, 3., 1.0)],
    ];
    let a = TensorSurface::new(k.clone(), k.clone(), rows.clone()).expect("4x4 net");
    let outward = [v(0., -1., 0.), v(0.7, -0.7, 0.), v(1., 0., 0.), v(1., -0.3, 0.)];
    let flange: Vec<Vec<Vec3>> = (0..4).map(|i| vec![rows[i][0] + outward[i], rows[i][0]]).collect();
    let b = TensorSurface::new(k, KnotVector::bezier(1, 0.0, 1.0).expect("valid knots"), flange).expect("4x2 net");
    MultipatchModel {
        patches: vec![a, b],
        adjacency: vec![Adjacency {
            a: 0,
            edge_a: Edge::V0,
            b: 1,
            edge_b: Edge::V1,
            reversed: false,
        }],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_is_watertight() {
        let m = two_patch_model();
        let r = watertightness_check(&m, WATERTIGHT_TOL).unwrap();
        assert_eq!(r.max_gap, 0.0);
        assert!(r.watertight);
    }

    #[test]
    fn perturbed_point_shows_gap() {
        let mut m = two_patch_model();
        *m.patches[1].point_mut(2, 1) += Vec3::new(1e-3, 0.0, 0.0);
        let r = watertightness_check(&m, WATERTIGHT_TOL).unwrap();
        assert!((r.gaps[0].max_gap - 1e-3).abs() < 1e-15);
        assert!(!r.watertight);
    }

    #[test]
    fn mismatched_knots_are_incompatible() {
        let mut m = two_patch_model();
        let b = &m.patches[1];
        let ku = KnotVector::new(2, vec![0., 0., 0., 0.4, 1., 1., 1.]).unwrap();
        m.patches[1] = TensorSurface::new(ku, b.kv().clone(), b.rows()).unwrap();
        let err = watertightness_check(&m, WATERTIGHT_TOL).unwrap_err();
        assert!(err.to_string().contains("edge incompatibility"));
    }

    #[test]
    fn reversed_edges_match_backwards() {
        let mut m = two_patch_model();
        let b = &m.patches[1];
        let mut rows = b.rows();
        rows.reverse();
        m.patches[1] = TensorSurface::new(b.ku().clone(), b.kv().clone(), rows).unwrap();
        assert!(watertightness_check(&m, WATERTIGHT_TOL).unwrap().max_gap > 0.1);
        m.adjacency[0].reversed = true;
        assert_eq!(watertightness_check(&m, WATERTIGHT_TOL).unwrap().max_gap, 0.0);
    }

    #[test]
    fn json_round_trip() {
        let m = two_patch_model();
        let text = serde_json::to_string(&m).unwrap();
        assert!(text.contains("\"edge_a\":\"v0\""));
        assert_eq!(MultipatchModel::from_json_str(&text).unwrap(), m);
    }
}

use nalgebra::DMatrix;

use super::{FitError, FitSpace};
use crate::spline::{knot_quadrature, KnotVector};
use crate::Vec3;

/// Mass matrix of one B-spline basis together with the quadrature that
/// produced it.
#[derive(Clone, Debug)]
pub struct Gram1d {
    pub matrix: DMatrix<f64>,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `basis[(i, q)] = N_i(nodes[q])`.
    pub basis: DMatrix<f64>,
}

pub fn gram_1d(k: &KnotVector, points_per_span: usize) -> Result<Gram1d, FitError> {
    if points_per_span < k.degree() + 1 {
        return Err(FitError::InsufficientQuadrature {
            points: points_per_span,
            degree: k.degree(),
        });
    }
    let rule = knot_quadrature(k, points_per_span);
    let n = k.num_basis();
    let mut basis = DMatrix::zeros(n, rule.len());
    for (q, &(x, _)) in rule.iter().enumerate() {
        let b = k.basis(x, 0)?;
        for (i, val) in b.values().iter().enumerate() {
            basis[(b.first + i, q)] = *val;
        }
    }
    let mut matrix = DMatrix::zeros(n, n);
    for (q, &(_, w)) in rule.iter().enumerate() {
        let col = basis.column(q);
        for i in 0..n {
            let bi = col[i];
            if bi == 0.0 {
                continue;
            }
            for j in i..n {
                matrix[(i, j)] += w * bi * col[j];
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            matrix[(i, j)] = matrix[(j, i)];
        }
    }
    if matrix.clone().cholesky().is_none() {
        return Err(FitError::SingularGram);
    }
    Ok(Gram1d {
        matrix,
        nodes: rule.iter().map(|r| r.0).collect(),
        weights: rule.iter().map(|r| r.1).collect(),
        basis,
    })
}

/// Separable Gram factors, moments `∫ N_i N_j y_c` and target samples.
#[derive(Clone, Debug)]
pub struct L2System {
    pub gu: Gram1d,
    pub gv: Gram1d,
    /// Per coordinate, `moments[c][(i, j)]`.
    pub moments: [DMatrix<f64>; 3],
    /// Target coordinates at the tensor quadrature nodes.
    pub target_values: [DMatrix<f64>; 3],
}

impl L2System {
    fn weighted_basis(g: &Gram1d) -> DMatrix<f64> {
        let mut b = g.basis.clone();
        for (q, w) in g.weights.iter().enumerate() {
            b.column_mut(q).scale_mut(*w);
        }
        b
    }
}

pub fn assemble_l2(space: &FitSpace, target: &dyn Fn(f64, f64) -> Vec3, quad_points: usize) -> Result<L2System, FitError> {
    let gu = gram_1d(&space.ku, quad_points)?;
    let gv = gram_1d(&space.kv, quad_points)?;
    let (qu, qv) = (gu.nodes.len(), gv.nodes.len());
    let mut values = [DMatrix::zeros(qu, qv), DMatrix::zeros(qu, qv), DMatrix::zeros(qu, qv)];
    for (a, &u) in gu.nodes.iter().enumerate() {
        for (b, &v) in gv.nodes.iter().enumerate() {
            let y = target(u, v);
            for c in 0..3 {
                values[c][(a, b)] = y[c];
            }
        }
    }
    let bu = L2System::weighted_basis(&gu);
    let bv = L2System::weighted_basis(&gv);
    let moments = [0, 1, 2].map(|c| &bu * &values[c] * bv.transpose());
    Ok(L2System {
        gu,
        gv,
        moments,
        target_values: values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gram_rows_sum_to_basis_integrals() {
        let k = KnotVector::new(3, vec![0., 0., 0., 0., 0.3, 0.5, 1., 1., 1., 1.]).unwrap();
        let g = gram_1d(&k, 4).unwrap();
        let fine = gram_1d(&k, 9).unwrap();
        for i in 0..k.num_basis() {
            let row: f64 = g.matrix.row(i).sum();
            // ∫ N_i from an independent, finer rule
            let integral: f64 = (0..fine.nodes.len()).map(|q| fine.weights[q] * fine.basis[(i, q)]).sum();
            assert!((row - integral).abs() < 1e-14);
        }
        assert!((g.matrix.sum() - 1.0).abs() < 1e-14);
        assert!((&g.matrix - g.matrix.transpose()).norm() == 0.0);
    }

    #[test]
    fn too_few_points() {
        let k = KnotVector::uniform(3, 0.0, 1.0, 2).unwrap();
        assert!(matches!(gram_1d(&k, 3), Err(FitError::InsufficientQuadrature { .. })));
    }

    #[test]
    fn zero_target_zero_moments() {
        let space = FitSpace::dyadic(2, 1).unwrap();
        let sys = assemble_l2(&space, &|_, _| Vec3::zeros(), 3).unwrap();
        assert!(sys.moments.iter().all(|m| m.iter().all(|x| *x == 0.0)));
    }
}

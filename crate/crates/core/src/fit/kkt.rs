use nalgebra::{DMatrix, DVector};

use super::FitError;

/// Relative size below which a constraint row counts as dependent on the
/// rows before it.
pub const KKT_RANK_TOL: f64 = 1e-11;

#[derive(Clone, Debug, PartialEq)]
pub struct KktSolution {
    pub x: DVector<f64>,
    /// One multiplier per input row; dropped rows get `0`.
    pub multipliers: DVector<f64>,
    /// Indices of rows dropped as linearly dependent.
    pub dropped: Vec<usize>,
}

/// Indices of a maximal independent subset of the rows of `c`, scanned in
/// order with modified Gram–Schmidt. A dependent row whose right-hand side
/// disagrees with the kept rows is an error.
pub fn filter_dependent_rows(c: &DMatrix<f64>, d: &DVector<f64>) -> Result<Vec<usize>, FitError> {
    let mut basis: Vec<(DVector<f64>, f64)> = Vec::new();
    let mut kept = Vec::new();
    for i in 0..c.nrows() {
        let row: DVector<f64> = c.row(i).transpose();
        let norm = row.norm();
        let mut v = row.clone();
        let mut rhs = d[i];
        for (q, e) in &basis {
            let a = q.dot(&v);
            v.axpy(-a, q, 1.0);
            rhs -= a * e;
        }
        let rest = v.norm();
        if rest > KKT_RANK_TOL * norm && rest > 0.0 {
            basis.push((v / rest, rhs / rest));
            kept.push(i);
        } else if rhs.abs() > 1e-9 * (d[i].abs() + norm).max(1.0) {
            return Err(FitError::InconsistentConstraints { row: i, residual: rhs });
        }
    }
    Ok(kept)
}

fn expand(kept: &[usize], m: usize, lambda: &DVector<f64>) -> (DVector<f64>, Vec<usize>) {
    let mut full = DVector::zeros(m);
    for (k, &i) in kept.iter().enumerate() {
        full[i] = lambda[k];
    }
    let dropped = (0..m).filter(|i| !kept.contains(i)).collect();
    (full, dropped)
}

fn select_rows(c: &DMatrix<f64>, d: &DVector<f64>, kept: &[usize]) -> (DMatrix<f64>, DVector<f64>) {
    (c.select_rows(kept), DVector::from_iterator(kept.len(), kept.iter().map(|&i| d[i])))
}

/// Minimize `½ xᵀ G x − bᵀ x` subject to `C x = d` through one dense
/// symmetric indefinite system `[G Cᵀ; C 0]`.
pub fn solve_kkt(gram: &DMatrix<f64>, rhs: &DVector<f64>, c: &DMatrix<f64>, d: &DVector<f64>) -> Result<KktSolution, FitError> {
    let n = gram.nrows();
    let kept = filter_dependent_rows(c, d)?;
    let (ck, dk) = select_rows(c, d, &kept);
    let m = kept.len();
    let mut k = DMatrix::zeros(n + m, n + m);
    k.view_mut((0, 0), (n, n)).copy_from(gram);
    k.view_mut((n, 0), (m, n)).copy_from(&ck);
    k.view_mut((0, n), (n, m)).copy_from(&ck.transpose());
    let mut b = DVector::zeros(n + m);
    b.rows_mut(0, n).copy_from(rhs);
    b.rows_mut(n, m).copy_from(&dk);
    let lu = k.clone().lu();
    let mut sol = lu.solve(&b).ok_or(FitError::SingularKkt)?;
    // one step of iterative refinement
    let r = &b - &k * &sol;
    if let Some(corr) = lu.solve(&r) {
        sol += corr;
    }
    if !sol.iter().all(|v| v.is_finite()) {
        return Err(FitError::SingularKkt);
    }
    let x = sol.rows(0, n).into_owned();
    let (multipliers, dropped) = expand(&kept, c.nrows(), &sol.rows(n, m).into_owned());
    Ok(KktSolution { x, multipliers, dropped })
}

/// Gram operator `M_u ⊗ M_v` acting on each of `blocks` stacked blocks of
/// row-major `n_u × n_v` coefficient arrays.
pub(crate) struct KroneckerGram {
    mu: DMatrix<f64>,
    mv: DMatrix<f64>,
    cu: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    cv: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    blocks: usize,
}

impl KroneckerGram {
    pub(crate) fn new(mu: DMatrix<f64>, mv: DMatrix<f64>, blocks: usize) -> Result<Self, FitError> {
        let cu = mu.clone().cholesky().ok_or(FitError::SingularGram)?;
        let cv = mv.clone().cholesky().ok_or(FitError::SingularGram)?;
        Ok(KroneckerGram { mu, mv, cu, cv, blocks })
    }

    fn block_len(&self) -> usize {
        self.mu.nrows() * self.mv.nrows()
    }

    pub(crate) fn len(&self) -> usize {
        self.blocks * self.block_len()
    }

    fn map_blocks(&self, x: &DVector<f64>, f: impl Fn(DMatrix<f64>) -> DMatrix<f64>) -> DVector<f64> {
        let (nu, nv) = (self.mu.nrows(), self.mv.nrows());
        let len = self.block_len();
        let mut out = DVector::zeros(x.len());
        for b in 0..self.blocks {
            let block = DMatrix::from_row_slice(nu, nv, x.rows(b * len, len).as_slice());
            let y = f(block);
            for i in 0..nu {
                for j in 0..nv {
                    out[b * len + i * nv + j] = y[(i, j)];
                }
            }
        }
        out
    }

    pub(crate) fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self.map_blocks(x, |p| &self.mu * p * &self.mv)
    }

    pub(crate) fn solve(&self, x: &DVector<f64>) -> DVector<f64> {
        self.map_blocks(x, |p| {
            let left = self.cu.solve(&p);
            self.cv.solve(&left.transpose()).transpose()
        })
    }
}

/// Same problem as [`solve_kkt`] for a Kronecker Gram matrix, solved by
/// the Schur complement on the multipliers.
pub(crate) fn solve_kkt_kronecker(g: &KroneckerGram, rhs: &DVector<f64>, c: &DMatrix<f64>, d: &DVector<f64>) -> Result<KktSolution, FitError> {
    let y0 = g.solve(rhs);
    if c.nrows() == 0 {
        return Ok(KktSolution {
            x: y0,
            multipliers: DVector::zeros(0),
            dropped: Vec::new(),
        });
    }
    let kept = filter_dependent_rows(c, d)?;
    let (ck, dk) = select_rows(c, d, &kept);
    let m = kept.len();
    let mut z = DMatrix::zeros(g.len(), m);
    for k in 0..m {
        z.set_column(k, &g.solve(&ck.row(k).transpose()));
    }
    let schur = &ck * &z;
    let schur = (&schur + schur.transpose()) * 0.5;
    let chol = schur.cholesky().ok_or(FitError::SingularKkt)?;
    let mut lambda = chol.solve(&(&ck * &y0 - &dk));
    let mut x = &y0 - &z * &lambda;
    // refinement against the constraint residual
    let res = &dk - &ck * &x;
    let dl = chol.solve(&res);
    x += &z * &dl;
    lambda -= dl;
    if !x.iter().all(|v| v.is_finite()) {
        return Err(FitError::SingularKkt);
    }
    let (multipliers, dropped) = expand(&kept, c.nrows(), &lambda);
    Ok(KktSolution { x, multipliers, dropped })
}

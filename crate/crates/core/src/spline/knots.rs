use serde::{Deserialize, Serialize};

use super::SplineError;

/// Clamped knot vector of a polynomial B-spline basis.
///
/// The first and last knots carry multiplicity `degree + 1`, interior knots
/// at most `degree`. Unclamped sequences are rejected at construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawKnots", into = "RawKnots")]
pub struct KnotVector {
    degree: usize,
    knots: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawKnots {
    degree: usize,
    knots: Vec<f64>,
}

impl TryFrom<RawKnots> for KnotVector {
    type Error = SplineError;

    fn try_from(raw: RawKnots) -> Result<Self, Self::Error> {
        KnotVector::new(raw.degree, raw.knots)
    }
}

impl From<KnotVector> for RawKnots {
    fn from(k: KnotVector) -> Self {
        RawKnots {
            degree: k.degree,
            knots: k.knots,
        }
    }
}

/// Basis functions (and derivatives) that do not vanish at a parameter.
///
/// `ders[k][i]` is the `k`-th derivative of basis function `first + i`.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisValues {
    pub first: usize,
    pub ders: Vec<Vec<f64>>,
}

impl BasisValues {
    pub fn values(&self) -> &[f64] {
        &self.ders[0]
    }
}

impl KnotVector {
    pub fn new(degree: usize, knots: Vec<f64>) -> Result<Self, SplineError> {
        if degree == 0 {
            return Err(SplineError::DegreeZero);
        }
        if knots.len() < 2 * (degree + 1) {
            return Err(SplineError::TooFewKnots {
                degree,
                count: knots.len(),
            });
        }
        if let Some(index) = knots.iter().position(|k| !k.is_finite()) {
            return Err(SplineError::NonFiniteKnot { index });
        }
        if let Some(index) = knots.windows(2).position(|w| w[1] < w[0]) {
            return Err(SplineError::DecreasingKnots { index: index + 1 });
        }
        let m = knots.len();
        let start = knots[0];
        let end = knots[m - 1];
        let clamped_start = knots[..=degree].iter().all(|&k| k == start) && knots[degree + 1] > start;
        let clamped_end = knots[m - degree - 1..].iter().all(|&k| k == end) && knots[m - degree - 2] < end;
        if !clamped_start || !clamped_end {
            return Err(SplineError::NotClamped);
        }
        let mut i = degree + 1;
        while i < m - degree - 1 {
            let mut j = i;
            while j + 1 < m - degree - 1 && knots[j + 1] == knots[i] {
                j += 1;
            }
            let mult = j - i + 1;
            if mult > degree {
                return Err(SplineError::InteriorMultiplicity {
                    knot: knots[i],
                    multiplicity: mult,
                });
            }
            i = j + 1;
        }
        Ok(KnotVector { degree, knots })
    }

    /// Clamped knot vector on `[start, end]` with `spans` equal spans.
    pub fn uniform(degree: usize, start: f64, end: f64, spans: usize) -> Result<Self, SplineError> {
        let spans = spans.max(1);
        let mut knots = vec![start; degree + 1];
        for i in 1..spans {
            knots.push(start + (end - start) * i as f64 / spans as f64);
        }
        knots.extend(std::iter::repeat_n(end, degree + 1));
        KnotVector::new(degree, knots)
    }

    /// Bernstein knots `[a; n+1] ++ [b; n+1]`.
    pub fn bezier(degree: usize, start: f64, end: f64) -> Result<Self, SplineError> {
        Self::uniform(degree, start, end, 1)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn num_basis(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    pub fn start(&self) -> f64 {
        self.knots[0]
    }

    pub fn end(&self) -> f64 {
        self.knots[self.knots.len() - 1]
    }

    pub fn length(&self) -> f64 {
        self.end() - self.start()
    }

    /// Offset of the `k`-th knot after the clamped start block, measured from
    /// the start (`k = 1` is the first interior or end knot).
    pub fn start_offset(&self, k: usize) -> f64 {
        self.knots[self.degree + k] - self.start()
    }

    /// Nonempty knot spans `(a, b)` in increasing order.
    pub fn spans(&self) -> Vec<(f64, f64)> {
        self.knots
            .windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| (w[0], w[1]))
            .collect()
    }

    /// Breakpoints (distinct knots) in increasing order.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for &k in &self.knots {
            if out.last().is_none_or(|&l| k > l) {
                out.push(k);
            }
        }
        out
    }

    pub fn contains(&self, u: f64) -> bool {
        u >= self.start() && u <= self.end()
    }

    /// Span index `i` with `knots[i] <= u < knots[i + 1]`; the domain end maps
    /// into the last nonempty span.
    pub fn find_span(&self, u: f64) -> usize {
        let n = self.num_basis();
        if u >= self.knots[n] {
            return n - 1;
        }
        if u <= self.knots[self.degree] {
            return self.degree;
        }
        let (mut lo, mut hi) = (self.degree, n);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if u < self.knots[mid] {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        lo
    }

    /// Values and derivatives up to `order` of the basis functions nonzero at `u`.
    pub fn basis(&self, u: f64, order: usize) -> Result<BasisValues, SplineError> {
        if !u.is_finite() || !self.contains(u) {
            return Err(SplineError::OutOfDomain {
                value: u,
                start: self.start(),
                end: self.end(),
            });
        }
        if order > self.degree {
            return Err(SplineError::OrderTooHigh {
                order,
                degree: self.degree,
            });
        }
        Ok(self.basis_unchecked(u, order))
    }

    /// Like [`KnotVector::basis`] but without domain checks; derivative orders
    /// above the degree are returned as zeros.
    pub(crate) fn basis_unchecked(&self, u: f64, order: usize) -> BasisValues {
        let p = self.degree;
        let span = self.find_span(u);
        let knots = &self.knots;
        let top = order.min(p);

        // ndu holds basis values (upper triangle) and knot differences (lower).
        let mut ndu = vec![vec![0.0; p + 1]; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        ndu[0][0] = 1.0;
        for j in 1..=p {
            left[j] = u - knots[span + 1 - j];
            right[j] = knots[span + j] - u;
            let mut saved = 0.0;
            for r in 0..j {
                ndu[j][r] = right[r + 1] + left[j - r];
                let temp = ndu[r][j - 1] / ndu[j][r];
                ndu[r][j] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu[j][j] = saved;
        }

        let mut ders = vec![vec![0.0; p + 1]; order + 1];
        for j in 0..=p {
            ders[0][j] = ndu[j][p];
        }
        let mut a = vec![vec![0.0; p + 1]; 2];
        for r in 0..=p {
            let (mut s1, mut s2) = (0usize, 1usize);
            a[0][0] = 1.0;
            for k in 1..=top {
                let mut d = 0.0;
                let rk = r as isize - k as isize;
                let pk = p - k;
                if r >= k {
                    a[s2][0] = a[s1][0] / ndu[pk + 1][rk as usize];
                    d = a[s2][0] * ndu[rk as usize][pk];
                }
                let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
                let j2 = if (r as isize - 1) <= pk as isize { k - 1 } else { p - r };
                for j in j1..=j2 {
                    let idx = (rk + j as isize) as usize;
                    a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][idx];
                    d += a[s2][j] * ndu[idx][pk];
                }
                if r <= pk {
                    a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                    d += a[s2][k] * ndu[r][pk];
                }
                ders[k][r] = d;
                std::mem::swap(&mut s1, &mut s2);
            }
        }
        let mut factor = p as f64;
        for (k, row) in ders.iter_mut().enumerate().skip(1).take(top) {
            for v in row.iter_mut() {
                *v *= factor;
            }
            factor *= (p - k) as f64;
        }
        BasisValues {
            first: span - p,
            ders,
        }
    }

    /// Knot vector of the reparametrization `s = end - u`, shifted to start at 0.
    pub(crate) fn local_reversed(&self) -> KnotVector {
        let end = self.end();
        KnotVector {
            degree: self.degree,
            knots: self.knots.iter().rev().map(|&k| end - k).collect(),
        }
    }

    /// Knot vector of the reparametrization `s = u - start`.
    pub(crate) fn local_forward(&self) -> KnotVector {
        let start = self.start();
        KnotVector {
            degree: self.degree,
            knots: self.knots.iter().map(|&k| k - start).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Cox-de Boor recurrence straight from the definition.
    fn cox_de_boor(knots: &[f64], i: usize, p: usize, u: f64, last: bool) -> f64 {
        if p == 0 {
            let inside = knots[i] <= u && u < knots[i + 1];
            let at_end = last && u == knots[i + 1] && knots[i] < knots[i + 1] && knots[i + 1..].iter().all(|&k| k == u);
            return if inside || at_end { 1.0 } else { 0.0 };
        }
        let mut value = 0.0;
        let d1 = knots[i + p] - knots[i];
        if d1 > 0.0 {
            value += (u - knots[i]) / d1 * cox_de_boor(knots, i, p - 1, u, last);
        }
        let d2 = knots[i + p + 1] - knots[i + 1];
        if d2 > 0.0 {
            value += (knots[i + p + 1] - u) / d2 * cox_de_boor(knots, i + 1, p - 1, u, last);
        }
        value
    }

    #[test]
    fn bernstein_quadratic_midpoint() {
        let kv = KnotVector::new(2, vec![0., 0., 0., 1., 1., 1.]).unwrap();
        let b = kv.basis(0.5, 0).unwrap();
        assert_eq!(b.first, 0);
        assert_eq!(b.values(), &[0.25, 0.5, 0.25]);
        let b = kv.basis(0.0, 0).unwrap();
        assert_eq!(b.values(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn cubic_matches_definition() {
        let knots = vec![0., 0., 0., 0., 1., 2., 2., 2., 2.];
        let kv = KnotVector::new(3, knots.clone()).unwrap();
        let b = kv.basis(0.7, 0).unwrap();
        let sum: f64 = b.values().iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        for (i, v) in b.values().iter().enumerate() {
            let oracle = cox_de_boor(&knots, b.first + i, 3, 0.7, false);
            assert!((v - oracle).abs() < 1e-14, "{v} vs {oracle}");
        }
        // functions outside the window vanish
        for i in 0..kv.num_basis() {
            if i < b.first || i > b.first + 3 {
                assert_eq!(cox_de_boor(&knots, i, 3, 0.7, false), 0.0);
            }
        }
    }

    #[test]
    fn domain_end_uses_last_span() {
        let kv = KnotVector::new(2, vec![0., 0., 0., 0.5, 1., 1., 1.]).unwrap();
        let b = kv.basis(1.0, 0).unwrap();
        assert_eq!(b.first, 1);
        assert_eq!(b.values()[2], 1.0);
        let b = kv.basis(0.5, 0).unwrap();
        assert_eq!(b.first, 1);
    }

    #[test]
    fn derivatives_sum_to_zero() {
        let kv = KnotVector::new(3, vec![0., 0., 0., 0., 0.3, 0.4, 1., 1., 1., 1.]).unwrap();
        for &u in &[0.0, 0.1, 0.3, 0.35, 0.9, 1.0] {
            let b = kv.basis(u, 3).unwrap();
            for k in 1..=3 {
                let s: f64 = b.ders[k].iter().sum();
                assert!(s.abs() < 1e-9, "order {k} at {u}: {s}");
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        let kv = KnotVector::new(2, vec![0., 0., 0., 1., 1., 1.]).unwrap();
        assert!(matches!(kv.basis(1.5, 0), Err(SplineError::OutOfDomain { .. })));
        assert!(matches!(kv.basis(0.5, 3), Err(SplineError::OrderTooHigh { .. })));
        assert!(matches!(KnotVector::new(2, vec![0., 0., 1., 1.]), Err(SplineError::TooFewKnots { .. })));
        assert!(matches!(KnotVector::new(2, vec![0., 0., 0.5, 1., 1., 1.]), Err(SplineError::NotClamped)));
        assert!(matches!(
            KnotVector::new(2, vec![0., 0., 0., 0.5, 0.5, 0.5, 1., 1., 1.]),
            Err(SplineError::InteriorMultiplicity { .. })
        ));
        assert!(matches!(KnotVector::new(1, vec![0., 0., 1., 0.5, 1.]), Err(SplineError::DecreasingKnots { .. })));
        assert!(matches!(KnotVector::new(0, vec![0., 1.]), Err(SplineError::DegreeZero)));
    }

    #[test]
    fn reversal_preserves_spans() {
        let kv = KnotVector::new(2, vec![1., 1., 1., 1.5, 3., 3., 3.]).unwrap();
        let r = kv.local_reversed();
        assert_eq!(r.knots(), &[0., 0., 0., 1.5, 2., 2., 2.]);
        assert_eq!(kv.local_forward().knots(), &[0., 0., 0., 0.5, 2., 2., 2.]);
    }
}

use super::{KnotVector, SplineError, TensorSurface};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule on `[a, b]`.
pub fn gauss_on(a: f64, b: f64, n: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    x.iter().zip(&w).map(|(&x, &w)| (mid + half * x, half * w)).collect()
}

/// One-dimensional rule with `points_per_span` nodes on every nonempty span.
pub fn knot_quadrature(kv: &KnotVector, points_per_span: usize) -> Vec<(f64, f64)> {
    kv.spans()
        .into_iter()
        .flat_map(|(a, b)| gauss_on(a, b, points_per_span))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadPoint {
    pub u: f64,
    pub v: f64,
    pub weight: f64,
}

/// Tensor Gauss–Legendre nodes over every knot-span rectangle of `surface`.
pub fn quadrature_grid(surface: &TensorSurface, points_per_span: usize) -> Result<Vec<QuadPoint>, SplineError> {
    if points_per_span == 0 {
        return Err(SplineError::NoQuadraturePoints);
    }
    let qu = knot_quadrature(surface.ku(), points_per_span);
    let qv = knot_quadrature(surface.kv(), points_per_span);
    let mut out = Vec::with_capacity(qu.len() * qv.len());
    for &(u, wu) in &qu {
        for &(v, wv) in &qv {
            out.push(QuadPoint { u, v, weight: wu * wv });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Vec3;

    fn flat(ku: KnotVector, kv: KnotVector) -> TensorSurface {
        let net = vec![vec![Vec3::zeros(); kv.num_basis()]; ku.num_basis()];
        TensorSurface::new(ku, kv, net).unwrap()
    }

    #[test]
    fn rules_integrate_polynomials_exactly() {
        for n in 1..=12 {
            let (x, w) = gauss_legendre(n);
            for deg in 0..2 * n {
                let approx: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((approx - exact).abs() < 1e-13, "n={n} deg={deg}: {approx} vs {exact}");
            }
        }
    }

    #[test]
    fn single_span_two_points() {
        let k = KnotVector::bezier(2, 0.0, 1.0).unwrap();
        let s = flat(k.clone(), k);
        let q = quadrature_grid(&s, 2).unwrap();
        assert_eq!(q.len(), 4);
        let total: f64 = q.iter().map(|p| p.weight).sum();
        assert!((total - 1.0).abs() < 1e-14);
        let cubic: f64 = q.iter().map(|p| p.weight * p.u.powi(3) * p.v.powi(3)).sum();
        assert!((cubic - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn four_spans_three_points() {
        let k = KnotVector::uniform(2, -1.0, 3.0, 4).unwrap();
        let s = flat(k.clone(), k);
        let q = quadrature_grid(&s, 3).unwrap();
        assert_eq!(q.len(), 144);
        let total: f64 = q.iter().map(|p| p.weight).sum();
        assert!((total - 16.0).abs() < 1e-12);
        assert!(matches!(quadrature_grid(&s, 0), Err(SplineError::NoQuadraturePoints)));
    }

    #[test]
    fn repeated_interior_knots_contribute_no_nodes() {
        let ku = KnotVector::new(2, vec![0., 0., 0., 0.5, 0.5, 1., 1., 1.]).unwrap();
        let kv = KnotVector::bezier(2, 0.0, 1.0).unwrap();
        let s = flat(ku, kv);
        assert_eq!(quadrature_grid(&s, 2).unwrap().len(), 2 * 2 * 2);
    }
}

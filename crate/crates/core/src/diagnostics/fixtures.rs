use rand::Rng;

use super::DiagnosticsError;
use crate::corner::CornerKnotData;
use crate::spline::{CornerJet, KnotVector, TensorSurface};
use crate::Vec3;

/// Built-in test surfaces.
pub const FIXTURE_NAMES: [&str; 6] = [
    "self_intersect",
    "rounded_quadratic",
    "rounded_bezier",
    "discont_independent",
    "discont_opposite",
    "degenerate",
];

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Bézier patch on `[0, hu] × [0, hv]` of the polynomial
/// `Σ coeffs[a][b] u^a v^b`; the degrees are the table dimensions minus one.
pub fn bezier_from_monomials(coeffs: &[Vec<Vec3>], hu: f64, hv: f64) -> TensorSurface {
    let nu = coeffs.len() - 1;
    let nv = coeffs[0].len() - 1;
    let mut net = vec![vec![Vec3::zeros(); nv + 1]; nu + 1];
    for (j, row) in net.iter_mut().enumerate() {
        for (k, p) in row.iter_mut().enumerate() {
            for (a, ca) in coeffs.iter().enumerate().take(j + 1) {
                let wu = hu.powi(a as i32) * binomial(j, a) / binomial(nu, a);
                for (b, c) in ca.iter().enumerate().take(k + 1) {
                    let wv = hv.powi(b as i32) * binomial(k, b) / binomial(nv, b);
                    *p += c * (wu * wv);
                }
            }
        }
    }
    let ku = KnotVector::bezier(nu.max(1), 0.0, hu).expect("valid Bézier knots");
    let kv = KnotVector::bezier(nv.max(1), 0.0, hv).expect("valid Bézier knots");
    TensorSurface::new(ku, kv, net).expect("net matches knots")
}

/// Biquadratic Bézier patch on `[0, extent]²` reproducing the quadratic
/// Taylor polynomial of `jet` exactly.
pub fn quadratic_taylor_patch(jet: &CornerJet, extent: f64) -> TensorSurface {
    let z = Vec3::zeros();
    let coeffs = vec![
        vec![jet.xi00, jet.xi01, jet.xi02 * 0.5],
        vec![jet.xi10, jet.xi11, z],
        vec![jet.xi20 * 0.5, z, z],
    ];
    bezier_from_monomials(&coeffs, extent, extent)
}

fn v(x: f64, y: f64, z: f64) -> Vec3 {
    Vec3::new(x, y, z)
}

/// Jet of the nonplanar rounded quadratic fixture: `λ = 2`, `μ = 1`,
/// `r = (0.6, 1, 0)`, `s = (0.5, 2, 0)`, `n = (0, 0, 1)`.
pub fn rounded_quadratic_jet() -> CornerJet {
    CornerJet::from_taylor(Vec3::zeros(), v(2., 0., 0.), v(-1., 0., 0.), v(0., 1., -2.), v(0.3, 0., 1.), v(0.1, 1., -0.5))
}

/// `r = (0, 1, 0)`, `s = (0, 0, 1)`: linearly independent with `t`.
pub fn discont_independent_jet() -> CornerJet {
    CornerJet::from_taylor(Vec3::zeros(), v(1., 0., 0.), v(-1., 0., 0.), v(0., 1., 0.), Vec3::zeros(), v(0., 0., 1.))
}

/// Coplanar `r = (0, 1, 0)`, `s = (0.6, −2, 0)` on opposite sides of `t`.
pub fn discont_opposite_jet() -> CornerJet {
    CornerJet::from_taylor(Vec3::zeros(), v(2., 0., 0.), v(-1., 0., 0.), v(0., 1., -2.), v(0., 0., 1.), v(0.3, -1., -0.5))
}

/// `s = 0`, so the quadruple product vanishes.
pub fn degenerate_jet() -> CornerJet {
    CornerJet::from_taylor(Vec3::zeros(), v(1., 0., 0.), v(-1., 0., 0.), v(0., 1., -1.), v(0., 0., 1.), v(0., 0., -1.))
}

/// Biquadratic Bézier net whose `(0,0)` corner satisfies the control-point
/// conditions with `α₁ = α₂ = 1/2` and limit normal `(0, 0, 1)`.
pub fn rounded_bezier() -> TensorSurface {
    let net = vec![
        vec![v(0., 0., 0.), v(-1., 0., 0.), v(-1., 1., 0.)],
        vec![v(1., 0., 0.), v(0., 1., 0.), v(-0.5, 1.5, 0.3)],
        vec![v(1., 1., 0.), v(0.5, 1.5, 0.3), v(0., 2., 0.6)],
    ];
    let k = KnotVector::bezier(2, 0.0, 1.0).expect("valid knots");
    TensorSurface::new(k.clone(), k, net).expect("3x3 net")
}

/// The degree-(10, 10) polynomial surface
/// `(Re z⁷, −Im z⁷, u¹⁰ + v¹⁰)` with `z = u + iv` on `[0, 1]²`: normal
/// continuous at the origin but not injective under projection to the
/// `xy`-plane.
pub fn self_intersect() -> TensorSurface {
    let mut coeffs = vec![vec![Vec3::zeros(); 11]; 11];
    // x = u⁷ − 21u⁵v² + 35u³v⁴ − 7uv⁶
    for (a, b, c) in [(7, 0, 1.0), (5, 2, -21.0), (3, 4, 35.0), (1, 6, -7.0)] {
        coeffs[a][b].x += c;
        // y is x with u and v exchanged
        coeffs[b][a].y += c;
    }
    coeffs[10][0].z = 1.0;
    coeffs[0][10].z = 1.0;
    bezier_from_monomials(&coeffs, 1.0, 1.0)
}

/// Exact polynomial of the self-intersection fixture.
pub fn self_intersect_exact(u: f64, v: f64) -> Vec3 {
    Vec3::new(
        u.powi(7) - 21.0 * u.powi(5) * v * v + 35.0 * u.powi(3) * v.powi(4) - 7.0 * u * v.powi(6),
        v.powi(7) - 21.0 * v.powi(5) * u * u + 35.0 * v.powi(3) * u.powi(4) - 7.0 * v * u.powi(6),
        u.powi(10) + v.powi(10),
    )
}

fn random_unit<R: Rng>(rng: &mut R) -> Vec3 {
    loop {
        let v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

fn random_knots<R: Rng>(rng: &mut R, degree: usize) -> KnotVector {
    let interior = rng.gen_range(0..3);
    let mut inner: Vec<f64> = (0..interior).map(|_| rng.gen_range(0.15..0.85)).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup_by(|a, b| (*a - *b).abs() < 0.05);
    let mut knots = vec![0.0; degree + 1];
    knots.extend(inner);
    knots.extend(vec![1.0; degree + 1]);
    KnotVector::new(degree, knots).expect("sorted clamped knots")
}

/// Random B-spline surface (degrees 2–3, up to three interior knots per
/// direction) whose `(0,0)` corner satisfies the control-point conditions
/// by construction: `p₀,₀` on the segment `p₀,₁ p₁,₀`, and `r*`, `s*` in the
/// plane of `t*` strictly on the same side of it.
pub fn random_rounded_net<R: Rng>(rng: &mut R) -> TensorSurface {
    let (du, dv) = (rng.gen_range(2..=3), rng.gen_range(2..=3));
    let ku = random_knots(rng, du);
    let kv = random_knots(rng, dv);
    let (n1, n2) = (ku.num_basis(), kv.num_basis());
    let mut net: Vec<Vec<Vec3>> = (0..n1)
        .map(|_| (0..n2).map(|_| Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
        .collect();
    let alpha1: f64 = rng.gen_range(0.2..0.8);
    let t = random_unit(rng);
    let n = {
        let w = random_unit(rng);
        let w = w - t * t.dot(&w);
        if w.norm() < 1e-3 {
            t.cross(&Vec3::new(t.z, t.x, t.y)).normalize()
        } else {
            w.normalize()
        }
    };
    let c = n.cross(&t);
    let p01 = net[0][1];
    let p10 = p01 + t * rng.gen_range(0.5..2.0);
    let p00 = p10 * alpha1 + p01 * (1.0 - alpha1);
    let r_star = t * rng.gen_range(-1.0..1.0) + c * rng.gen_range(0.2..1.5);
    let s_star = t * rng.gen_range(-1.0..1.0) + c * rng.gen_range(0.2..1.5);
    let local = TensorSurface::new(ku.clone(), kv.clone(), net.clone()).expect("valid net");
    let k = CornerKnotData::of_local(&local);
    let (ra, rb) = k.r_coefficients(alpha1);
    let (sa, sb) = k.s_coefficients(alpha1);
    let p11 = p00 + t * rng.gen_range(-0.5..0.5) + c * rng.gen_range(0.1..1.0);
    net[0][0] = p00;
    net[1][0] = p10;
    net[1][1] = p11;
    net[2][0] = p00 + (r_star - (p11 - p00) * rb) / ra;
    net[0][2] = p00 + (s_star - (p11 - p00) * sb) / sa;
    TensorSurface::new(ku, kv, net).expect("valid net")
}

/// Extent of the square domain used for the quadratic Taylor fixtures.
pub const TAYLOR_FIXTURE_EXTENT: f64 = 0.5;

pub fn make_fixture(name: &str) -> Result<TensorSurface, DiagnosticsError> {
    let h = TAYLOR_FIXTURE_EXTENT;
    Ok(match name {
        "self_intersect" => self_intersect(),
        "rounded_quadratic" => quadratic_taylor_patch(&rounded_quadratic_jet(), h),
        "rounded_bezier" => rounded_bezier(),
        "discont_independent" => quadratic_taylor_patch(&discont_independent_jet(), h),
        "discont_opposite" => quadratic_taylor_patch(&discont_opposite_jet(), h),
        "degenerate" => quadratic_taylor_patch(&degenerate_jet(), h),
        other => return Err(DiagnosticsError::UnknownFixture(other.to_string())),
    })
}

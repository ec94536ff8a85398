#![allow(dead_code)]

use proptest::prelude::*;
use rounded_corners::spline::{KnotVector, TensorSurface};
use rounded_corners::Vec3;

/// Clamped knots on `[start, start + len]` with interior knots drawn from a
/// coarse grid, so repeated knots occur (capped at multiplicity `degree`).
pub fn knots(degree: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = KnotVector> {
    (degree, prop::collection::vec(1usize..10, 0..5), -2.0..2.0f64, 0.5..3.0f64).prop_map(|(p, mut cells, start, len)| {
        cells.sort_unstable();
        let mut inner: Vec<usize> = Vec::new();
        for c in cells {
            if inner.iter().filter(|&&x| x == c).count() < p {
                inner.push(c);
            }
        }
        let mut k = vec![start; p + 1];
        k.extend(inner.iter().map(|&c| start + len * c as f64 / 10.0));
        k.extend(vec![start + len; p + 1]);
        KnotVector::new(p, k).expect("clamped knots")
    })
}

pub fn point() -> impl Strategy<Value = Vec3> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

pub fn surface(degree: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = TensorSurface> {
    (knots(degree.clone()), knots(degree)).prop_flat_map(|(ku, kv)| {
        let (n1, n2) = (ku.num_basis(), kv.num_basis());
        prop::collection::vec(prop::collection::vec(point(), n2), n1).prop_map(move |net| TensorSurface::new(ku.clone(), kv.clone(), net).expect("valid net"))
    })
}

/// Parameter in the closed domain from a unit fraction.
pub fn at(k: &KnotVector, f: f64) -> f64 {
    (k.start() + f * k.length()).min(k.end())
}

pub fn distance_to_breaks(k: &KnotVector, u: f64) -> f64 {
    k.breakpoints().iter().map(|b| (b - u).abs()).fold(f64::INFINITY, f64::min)
}

pub fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

mod common;

use nalgebra::{Matrix3, Rotation3, Unit};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{at, distance_to_breaks, knots, relative, surface};
use rounded_corners::corner::{classify_corner, spline_corner_conditions, CornerKind, CornerTolerances};
use rounded_corners::diagnostics::{fundamental_forms, random_rounded_net};
use rounded_corners::spline::{corner_jet, jet_by_evaluation, jet_from_control_points, jet_mismatch, Corner, TensorSurface};
use rounded_corners::Vec3;

fn kind(s: &TensorSurface, c: Corner) -> Option<CornerKind> {
    corner_jet(s, c).ok().map(|j| classify_corner(&j, &CornerTolerances::default()).kind)
}

fn transposed(s: &TensorSurface) -> TensorSurface {
    let rows = s.rows();
    let (n1, n2) = s.dims();
    let net = (0..n2).map(|j| (0..n1).map(|i| rows[i][j]).collect()).collect();
    TensorSurface::new(s.kv().clone(), s.ku().clone(), net).unwrap()
}

fn rounded_net() -> impl Strategy<Value = TensorSurface> {
    any::<u64>().prop_map(|seed| random_rounded_net(&mut ChaCha8Rng::seed_from_u64(seed)))
}

fn rigid_scaled() -> impl Strategy<Value = (Matrix3<f64>, Vec3)> {
    (common::point(), -3.0..3.0f64, 0.1..10.0f64, common::point(), any::<bool>()).prop_filter_map("axis", |(axis, angle, scale, shift, mirror)| {
        let axis = Unit::try_new(axis, 1e-3)?;
        let mut m = Rotation3::from_axis_angle(&axis, angle).into_inner() * scale;
        if mirror {
            m.column_mut(0).neg_mut();
        }
        Some((m, shift))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn basis_is_a_partition_of_unity(k in knots(1..=5), f in 0.0..=1.0f64) {
        let u = at(&k, f);
        let b = k.basis(u, k.degree().min(2)).unwrap();
        let sum: f64 = b.values().iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-12, "sum {sum}");
        prop_assert!(b.values().iter().all(|&x| x >= -1e-15));
        for d in b.ders.iter().skip(1) {
            let scale = d.iter().map(|x| x.abs()).fold(1.0, f64::max);
            prop_assert!(d.iter().sum::<f64>().abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn partials_match_finite_differences(s in surface(2..=4), fu in 0.05..0.95f64, fv in 0.05..0.95f64) {
        let (u, v) = (at(s.ku(), fu), at(s.kv(), fv));
        let (hu, hv) = (1e-6 * s.ku().length(), 1e-6 * s.kv().length());
        prop_assume!(distance_to_breaks(s.ku(), u) > 1e3 * hu && distance_to_breaks(s.kv(), v) > 1e3 * hv);
        let d = s.partials(u, v, 2).unwrap();
        let p = |a: f64, b: f64| s.partials(a, b, 1).unwrap();
        let (pu0, pu1) = (p(u - hu, v), p(u + hu, v));
        let (pv0, pv1) = (p(u, v - hv), p(u, v + hv));
        let checks = [
            (d.get(1, 0), (pu1.get(0, 0) - pu0.get(0, 0)) / (2.0 * hu)),
            (d.get(0, 1), (pv1.get(0, 0) - pv0.get(0, 0)) / (2.0 * hv)),
            (d.get(2, 0), (pu1.get(1, 0) - pu0.get(1, 0)) / (2.0 * hu)),
            (d.get(1, 1), (pv1.get(1, 0) - pv0.get(1, 0)) / (2.0 * hv)),
            (d.get(0, 2), (pv1.get(0, 1) - pv0.get(0, 1)) / (2.0 * hv)),
        ];
        for (k, (exact, fd)) in checks.iter().enumerate() {
            let err = (exact - fd).norm() / exact.norm().max(1.0);
            prop_assert!(err <= 1e-5, "derivative {k}: {exact:?} vs {fd:?}");
        }
    }

    #[test]
    fn jet_routes_agree(s in surface(2..=5)) {
        for c in Corner::ALL {
            let local = s.oriented_at(c);
            let a = jet_by_evaluation(&local, c).unwrap();
            let b = jet_from_control_points(&local, c).unwrap();
            prop_assert!(jet_mismatch(&a, &b) <= 1e-10, "{c}: {}", jet_mismatch(&a, &b));
        }
    }

    #[test]
    fn generated_nets_are_rounded(s in rounded_net()) {
        let tol = CornerTolerances::default();
        let r = spline_corner_conditions(&s, Corner::U0V0, &tol).unwrap();
        prop_assert!(r.all_hold());
        prop_assert!(r.segment_residual <= 1e-9 && r.coplanarity_residual <= 1e-9);
        prop_assert_eq!(kind(&s, Corner::U0V0), Some(CornerKind::Rounded));
    }

    #[test]
    fn broken_conditions_are_not_rounded(s in rounded_net(), lift in 0.05..0.5f64, off in 0.05..0.5f64) {
        let jet = corner_jet(&s, Corner::U0V0).unwrap();
        let frame = classify_corner(&jet, &CornerTolerances::default()).frame.unwrap();

        let mut lifted = s.clone();
        *lifted.point_mut(2, 0) += frame.n * lift;
        prop_assert_eq!(kind(&lifted, Corner::U0V0), Some(CornerKind::DiscontinuousIndependent));

        let mut moved = s.clone();
        *moved.point_mut(0, 0) += frame.c * off;
        prop_assert_eq!(kind(&moved, Corner::U0V0), Some(CornerKind::Regular));
    }

    #[test]
    fn kinds_survive_similarities(s in rounded_net(), (m, shift) in rigid_scaled()) {
        let t = s.map_points(|p| m * p + shift);
        for c in Corner::ALL {
            prop_assert_eq!(kind(&s, c), kind(&t, c), "{}", c);
        }
        let j = corner_jet(&s, Corner::U0V0).unwrap().transformed(&m, shift);
        prop_assert_eq!(classify_corner(&j, &CornerTolerances::default()).kind, CornerKind::Rounded);
    }

    #[test]
    fn kinds_survive_parameter_swap(s in rounded_net()) {
        let t = transposed(&s);
        prop_assert_eq!(kind(&t, Corner::U0V0), Some(CornerKind::Rounded));
        prop_assert_eq!(kind(&s, Corner::U1V0), kind(&t, Corner::U0V1));
        prop_assert_eq!(kind(&s, Corner::U1V1), kind(&t, Corner::U1V1));
        let j = corner_jet(&s, Corner::U0V0).unwrap().swapped();
        prop_assert_eq!(classify_corner(&j, &CornerTolerances::default()).kind, CornerKind::Rounded);
    }

    #[test]
    fn shape_operator_invariants(s in surface(2..=4), fu in 0.0..=1.0f64, fv in 0.0..=1.0f64) {
        let (u, v) = (at(s.ku(), fu), at(s.kv(), fv));
        let d = s.partials(u, v, 2).unwrap();
        let (xu, xv) = (d.get(1, 0), d.get(0, 1));
        prop_assume!(xu.cross(&xv).norm() > 1e-3 * xu.norm() * xv.norm());
        let f = fundamental_forms(&s, u, v).unwrap();
        let n = xu.cross(&xv).normalize();
        let (e, ff, g) = (xu.dot(&xu), xu.dot(&xv), xv.dot(&xv));
        let (l, m, nn) = (d.get(2, 0).dot(&n), d.get(1, 1).dot(&n), d.get(0, 2).dot(&n));
        let det_g = e * g - ff * ff;
        let gauss = (l * nn - m * m) / det_g;
        let mean2 = (e * nn - 2.0 * ff * m + g * l) / det_g;
        prop_assert!(relative(f.shape_det(), gauss) <= 1e-9, "{} vs {gauss}", f.shape_det());
        prop_assert!(relative(f.shape_trace(), mean2) <= 1e-9, "{} vs {mean2}", f.shape_trace());
        prop_assert!(relative(f.kappa1 * f.kappa2, gauss) <= 1e-9);
        prop_assert!(relative(f.kappa1 + f.kappa2, mean2) <= 1e-9);
        prop_assert!(f.kappa1.abs() >= f.kappa2.abs());
    }

    #[test]
    fn curvatures_scale_inversely(s in surface(2..=3), fu in 0.1..0.9f64, fv in 0.1..0.9f64, k in 0.1..10.0f64) {
        let (u, v) = (at(s.ku(), fu), at(s.kv(), fv));
        let Ok(f) = fundamental_forms(&s, u, v) else { return Ok(()) };
        let d = s.partials(u, v, 1).unwrap();
        prop_assume!(d.get(1, 0).cross(&d.get(0, 1)).norm() > 1e-3 * d.get(1, 0).norm() * d.get(0, 1).norm());
        let g = fundamental_forms(&s.map_points(|p| p * k), u, v).unwrap();
        prop_assert!(relative(g.kappa1 * k, f.kappa1) <= 1e-8);
        prop_assert!(relative(g.kappa2 * k, f.kappa2) <= 1e-8);
    }
}

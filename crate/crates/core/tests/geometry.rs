use approx::assert_relative_eq;
use etcrb_core::geometry::*;
use etcrb_core::{Error, C64};
use nalgebra::{DMatrix, Point2};
use num_complex::Complex;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FC: f64 = 4.9e9;

// Evaluated with 50-digit arithmetic, N = 8 at 4.9 GHz.
const GOLDEN_P_3_10: [(f64, f64); 8] = [
    (-0.35269898966321107, 0.024564663452816371),
    (-0.23109119894237651, -0.26757589161091281),
    (0.072737577225467039, -0.34599023809837355),
    (0.31798300780968566, -0.15455357240874566),
    (0.31830860382444641, 0.15388187915193791),
    (0.07929835647977577, 0.34454574538021276),
    (-0.21665288927437103, 0.27939492760081942),
    (-0.35335007090313695, 0.011988635983634167),
];

const GOLDEN_USER_15_M25: [(f64, f64); 8] = [
    (-0.034518704920301316, -0.35186426219584331),
    (-0.34897185379824246, -0.056733105473066512),
    (-0.14249001335740787, 0.32356853384315003),
    (0.27861171349590882, 0.21765916728425114),
    (0.27832510633199881, -0.21802553791994542),
    (-0.1463112982635142, -0.32185867084862726),
    (-0.34691739897433348, 0.068178576465654673),
    (-0.011778933883488893, 0.35335712348354943),
];

const GOLDEN_USER_18_35: [(f64, f64); 8] = [
    (0.35318770961853734, -0.016076124359177762),
    (-0.068979074920632204, 0.34675911988452994),
    (-0.32067868651115826, -0.14887975019282605),
    (0.21937899943881744, -0.27725954375859335),
    (0.21962724050285671, 0.2770629445254279),
    (-0.3194681749080132, 0.15145984689330398),
    (-0.076725575800447427, -0.34512778215914435),
    (0.35355293891866091, 0.00056513890118271117),
];

fn assert_golden(v: &nalgebra::DVector<C64>, golden: &[(f64, f64)]) {
    assert_eq!(v.len(), golden.len());
    for (x, &(re, im)) in v.iter().zip(golden) {
        assert!((x - C64::new(re, im)).norm() < 1e-12, "{x} vs {re}+{im}i");
    }
}

fn user(range: f64, deg: f64) -> UserSpec<f64> {
    UserSpec { range, angle: deg.to_radians(), gain: C64::new(1.0, 0.0), sinr_target: 31.6 }
}

#[test]
fn single_element_at_origin_is_trivial() {
    let arr = ArrayGeometry::ula(1, FC).unwrap();
    assert_eq!(arr.positions()[0], Point2::origin());
    let (a, g) = steering_with_jacobian(&arr, &Point2::new(2.0, 7.0)).unwrap();
    assert_eq!(a[0], C64::new(1.0, 0.0));
    assert_eq!(g, DMatrix::zeros(1, 2));
}

#[test]
fn broadside_steering_is_symmetric_about_center() {
    let arr = ArrayGeometry::ula(64, FC).unwrap();
    let a = steering(&arr, &Point2::new(0.0, 20.0)).unwrap();
    assert_relative_eq!(a.norm(), 1.0, epsilon = 1e-12);
    for n in 0..32 {
        assert!((a[n] - a[63 - n]).norm() < 1e-13);
    }
}

#[test]
fn steering_matches_high_precision_golden() {
    let arr = ArrayGeometry::ula(8, FC).unwrap();
    assert_golden(&steering(&arr, &Point2::new(3.0, 10.0)).unwrap(), &GOLDEN_P_3_10);
    assert_golden(&user_channel(&arr, &user(15.0, -25.0)).unwrap(), &GOLDEN_USER_15_M25);
    assert_golden(&user_channel(&arr, &user(18.0, 35.0)).unwrap(), &GOLDEN_USER_18_35);
}

#[test]
fn degenerate_points_are_rejected() {
    let arr = ArrayGeometry::ula(4, FC).unwrap();
    assert!(matches!(steering(&arr, &Point2::origin()), Err(Error::ZeroReference)));
    let q = arr.positions()[3];
    assert!(matches!(steering_jacobian(&arr, &q), Err(Error::OnElement(3))));
    assert!(steering(&arr, &Point2::new(f64::NAN, 1.0)).is_err());
}

#[test]
fn jacobian_symmetry_on_the_axis() {
    let arr = ArrayGeometry::ula(16, FC).unwrap();
    let g = steering_jacobian(&arr, &Point2::new(0.0, 12.0)).unwrap();
    for n in 0..8 {
        assert!((g[(n, 0)] + g[(15 - n, 0)]).norm() < 1e-10 * g.column(0).norm());
        assert!((g[(n, 1)] - g[(15 - n, 1)]).norm() < 1e-10 * g.column(1).norm());
    }
}

#[test]
fn steering_jacobian_matches_central_differences() {
    let arr = ArrayGeometry::ula(64, FC).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    for _ in 0..128 {
        let p = Point2::new(rng.gen_range(-30.0..30.0), rng.gen_range(5.0..40.0));
        let g = steering_jacobian(&arr, &p).unwrap();
        let mut fd = DMatrix::zeros(64, 2);
        for c in 0..2 {
            let mut hi = p;
            let mut lo = p;
            hi[c] += h;
            lo[c] -= h;
            let diff = (steering(&arr, &hi).unwrap() - steering(&arr, &lo).unwrap()) / C64::new(2.0 * h, 0.0);
            fd.set_column(c, &diff);
        }
        worst = worst.max((&fd - &g).norm() / g.norm());
    }
    assert!(worst <= 1e-6, "worst relative error {worst:e}");
}

#[test]
fn polar_conversion_examples() {
    let p = polar_to_cart(20.0, 0.0).unwrap();
    assert_relative_eq!(p.x, 0.0);
    assert_relative_eq!(p.y, 20.0);
    let p = polar_to_cart(15.0, (-25.0f64).to_radians()).unwrap();
    assert_relative_eq!(p.x, -6.3393, epsilon = 5e-5);
    assert_relative_eq!(p.y, 13.5946, epsilon = 5e-5);
    let p = polar_to_cart(18.0, 35.0f64.to_radians()).unwrap();
    assert_relative_eq!(p.x, 10.3244, epsilon = 5e-5);
    assert_relative_eq!(p.y, 14.7447, epsilon = 5e-5);
    assert!(polar_to_cart(0.0, 0.3).is_err());
}

#[test]
fn user_channel_scales_with_gain() {
    let arr = ArrayGeometry::ula(32, FC).unwrap();
    let mut u = user(15.0, -25.0);
    let h1 = user_channel(&arr, &u).unwrap();
    assert_relative_eq!(h1.norm(), 1.0, epsilon = 1e-12);
    u.gain = C64::new(2.0, 0.0);
    let h2 = user_channel(&arr, &u).unwrap();
    assert!((h2 - &h1 * C64::new(2.0, 0.0)).norm() < 1e-14);
    u.sinr_target = 0.0;
    assert!(user_channel(&arr, &u).is_err());
}

fn reference_eta() -> EtParams<f64> {
    EtParams::new(0.0, 20.0, 30f64.to_radians(), 3.0, 0.8).unwrap()
}

#[test]
fn default_layout_has_76_points() {
    let cloud = ellipse_cloud(&reference_eta(), &EllipseLayout::default()).unwrap();
    assert_eq!(cloud.len(), 76);
    assert_eq!(cloud.param_dim(), 5);
    let center = cloud.jacobians()[75].clone();
    assert_eq!(center.column(0), nalgebra::Vector2::x());
    assert_eq!(center.column(1), nalgebra::Vector2::y());
    assert!(center.columns(2, 3).iter().all(|v| *v == 0.0));
}

#[test]
fn unrotated_first_point_closed_form() {
    let eta = EtParams::new(1.0, 12.0, 0.0, 2.0, 0.5).unwrap();
    let cloud = ellipse_cloud(&eta, &EllipseLayout::default()).unwrap();
    assert_eq!(cloud.positions()[0], Point2::new(3.0, 12.0));
    let d = &cloud.jacobians()[0];
    let expected = [(1.0, 0.0), (0.0, 1.0), (0.0, 2.0), (1.0, 0.0), (0.0, 0.0)];
    for (c, (x, y)) in expected.iter().enumerate() {
        assert_relative_eq!(d[(0, c)], *x, epsilon = 1e-15);
        assert_relative_eq!(d[(1, c)], *y, epsilon = 1e-15);
    }
}

#[test]
fn ellipse_jacobians_match_central_differences() {
    let layout = EllipseLayout::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for _ in 0..128 {
        let v = [
            rng.gen_range(-10.0..10.0),
            rng.gen_range(5.0..40.0),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(0.1..6.0),
            rng.gen_range(0.1..3.0),
        ];
        let cloud = ellipse_cloud(&EtParams::from_array(v), &layout).unwrap();
        for c in 0..5 {
            let mut hi = v;
            let mut lo = v;
            hi[c] += h;
            lo[c] -= h;
            let ph = ellipse_cloud(&EtParams::from_array(hi), &layout).unwrap();
            let pl = ellipse_cloud(&EtParams::from_array(lo), &layout).unwrap();
            for m in 0..cloud.len() {
                let fd = (ph.positions()[m] - pl.positions()[m]) / (2.0 * h);
                let d = cloud.jacobians()[m].column(c);
                worst = worst.max((fd - d).amax());
            }
        }
    }
    assert!(worst <= 1e-6, "worst abs error {worst:e}");
}

#[test]
fn invalid_ellipses_are_rejected() {
    assert!(EtParams::new(0.0, 20.0, 0.0, 0.0, 1.0).is_err());
    assert!(EtParams::new(0.0, 20.0, 0.0, 1.0, -1.0).is_err());
    let bad = EtParams::from_array([0.0, 20.0, 0.0, 1.0, 0.0]);
    assert!(ellipse_cloud(&bad, &EllipseLayout::default()).is_err());
    assert!(ellipse_cloud(&reference_eta(), &EllipseLayout { outer: 0, inner: 0, center: false }).is_err());
}

#[test]
fn orientation_is_wrapped() {
    let e = EtParams::new(0.0, 20.0, 3.0 * std::f64::consts::PI, 1.0, 1.0).unwrap();
    assert_relative_eq!(e.phi, std::f64::consts::PI, epsilon = 1e-12);
}

#[test]
fn response_matrix_traces() {
    let arr = ArrayGeometry::ula(16, FC).unwrap();
    let cloud = ellipse_cloud(&reference_eta(), &EllipseLayout::default()).unwrap();
    let g = response_matrix(&cloud, &arr).unwrap();
    assert_relative_eq!(g.trace().re, 76.0, epsilon = 1e-10);
    let zero = cloud.clone().with_profile(vec![C64::new(0.0, 0.0); 76]).unwrap();
    assert_eq!(response_matrix(&zero, &arr).unwrap(), DMatrix::zeros(16, 16));
    let one = EtPointCloud::point(Point2::new(1.0, 9.0), C64::new(1.0, 0.0));
    let g = response_matrix(&one, &arr).unwrap();
    assert_relative_eq!(g.trace().re, 1.0, epsilon = 1e-12);
    let rank = g.svd(false, false).singular_values.iter().filter(|s| **s > 1e-10).count();
    assert_eq!(rank, 1);
}

#[test]
fn single_precision_tracks_double() {
    let a64 = steering(&ArrayGeometry::<f64>::ula(32, FC).unwrap(), &Point2::new(3.0, 10.0)).unwrap();
    let a32 = steering(&ArrayGeometry::<f32>::ula(32, FC as f32).unwrap(), &Point2::new(3.0f32, 10.0)).unwrap();
    for (x, y) in a64.iter().zip(a32.iter()) {
        assert!((x - Complex::new(y.re as f64, y.im as f64)).norm() < 1e-4);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn steering_has_unit_norm(x in -30.0..30.0f64, y in 5.0..40.0f64, n in 1usize..80) {
        let arr = ArrayGeometry::ula(n, FC).unwrap();
        let a = steering(&arr, &Point2::new(x, y)).unwrap();
        prop_assert!((a.norm() - 1.0).abs() < 1e-12);
        for v in a.iter() {
            prop_assert!((v.norm() - 1.0 / (n as f64).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn common_phase_leaves_correlations_unchanged(
        x1 in -30.0..30.0f64, y1 in 5.0..40.0f64, x2 in -30.0..30.0f64, y2 in 5.0..40.0f64, psi in -3.2..3.2f64,
    ) {
        let arr = ArrayGeometry::ula(24, FC).unwrap();
        let a = steering(&arr, &Point2::new(x1, y1)).unwrap();
        let b = steering(&arr, &Point2::new(x2, y2)).unwrap();
        let rot = C64::from_polar(1.0, psi);
        let before = a.dotc(&b).norm();
        let after = (&a * rot).dotc(&(&b * rot)).norm();
        prop_assert!((before - after).abs() < 1e-13);
    }

    #[test]
    fn layout_counts_add_up(outer in 0usize..60, inner in 0usize..40, center: bool) {
        prop_assume!(outer + inner + usize::from(center) > 0);
        let layout = EllipseLayout { outer, inner, center };
        let cloud = ellipse_cloud(&reference_eta(), &layout).unwrap();
        prop_assert_eq!(cloud.len(), outer + inner + usize::from(center));
    }
}

use approx::assert_relative_eq;
use etcrb_core::fisher::*;
use etcrb_core::geometry::*;
use etcrb_core::subspace::*;
use etcrb_core::{Error, C64};
use nalgebra::{DMatrix, DVector, Matrix2xX, Point2};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FC: f64 = 4.9e9;

struct Scenario {
    channels: Vec<DVector<C64>>,
    resp: EtResponses<f64>,
    ops: FisherOperators<f64>,
}

fn scenario(n: usize) -> Scenario {
    let arr = ArrayGeometry::ula(n, FC).unwrap();
    let eta = EtParams::new(0.0, 20.0, 30f64.to_radians(), 3.0, 0.8).unwrap();
    let cloud = ellipse_cloud(&eta, &EllipseLayout::default()).unwrap();
    let resp = EtResponses::build(&cloud, &arr).unwrap();
    let ops = FisherOperators::build(&resp);
    let channels = [(15.0, -25.0f64), (18.0, 35.0f64)]
        .iter()
        .map(|&(r, t)| {
            let u = UserSpec { range: r, angle: t.to_radians(), gain: C64::new(1.0, 0.0), sinr_target: 31.6 };
            user_channel(&arr, &u).unwrap()
        })
        .collect();
    Scenario { channels, resp, ops }
}

fn random_psd(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
    let b = DMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    &b * b.adjoint()
}

fn random_vec(n: usize, rng: &mut ChaCha8Rng) -> DVector<C64> {
    DVector::from_fn(n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

#[test]
fn basis_is_orthonormal_and_spans_generators() {
    let s = scenario(32);
    let basis = SubspaceBasis::build(&s.channels, &s.resp, DEFAULT_RANK_TOL).unwrap();
    let u = basis.basis();
    let r = basis.rank();
    assert!((u.adjoint() * u - DMatrix::identity(r, r)).norm() <= 1e-10);
    let mut gens: Vec<DVector<C64>> = s.channels.clone();
    gens.extend(s.resp.steering().column_iter().map(|c| c.into_owned()));
    for m in 0..s.resp.num_points() {
        gens.extend(s.resp.deriv(m).column_iter().map(|c| c.into_owned()));
    }
    assert_eq!(basis.generator_count(), gens.len());
    for g in &gens {
        assert!(basis.residual(g) <= DEFAULT_RANK_TOL * 10.0);
    }
    assert!(r <= 32.min(2 + 76 * 6));
}

#[test]
fn collinear_generators_give_rank_one() {
    let arr = ArrayGeometry::ula(8, FC).unwrap();
    let p = Point2::new(1.0, 10.0);
    let cloud = EtPointCloud::new(vec![p], vec![Matrix2xX::zeros(5)], vec![C64::new(1.0, 0.0)]).unwrap();
    let resp = EtResponses::build(&cloud, &arr).unwrap();
    let h = steering(&arr, &p).unwrap() * C64::new(0.0, 3.0);
    let basis = SubspaceBasis::build(&[h], &resp, DEFAULT_RANK_TOL).unwrap();
    assert_eq!(basis.rank(), 1);
}

#[test]
fn canonical_generators_are_spanned_exactly() {
    let gens: Vec<DVector<C64>> = (0..5).map(|i| DVector::from_fn(9, |j, _| C64::new(f64::from(u8::from(i == j)), 0.0))).collect();
    let basis = SubspaceBasis::from_generators(&gens, DEFAULT_RANK_TOL).unwrap();
    assert_eq!(basis.rank(), 5);
    let pi = basis.projector();
    let mut expected = DMatrix::zeros(9, 9);
    for i in 0..5 {
        expected[(i, i)] = C64::new(1.0, 0.0);
    }
    assert!((pi - expected).norm() < 1e-12);
}

#[test]
fn empty_or_zero_generators_are_rejected() {
    assert!(matches!(SubspaceBasis::<f64>::from_generators(&[], 1e-8), Err(Error::EmptyGenerators)));
    let zero = vec![DVector::<C64>::zeros(4); 3];
    assert!(matches!(SubspaceBasis::from_generators(&zero, 1e-8), Err(Error::EmptyGenerators)));
}

#[test]
fn reference_scenario_rank() {
    let s = scenario(64);
    let basis = SubspaceBasis::build(&s.channels, &s.resp, 1e-6).unwrap();
    assert_eq!(basis.rank(), 21);
    let spectrum = basis.spectrum();
    assert_eq!(spectrum.iter().filter(|e| e.kept).count(), 21);
    assert!(spectrum.windows(2).all(|w| w[0].sigma >= w[1].sigma));
}

#[test]
fn reduction_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let s = scenario(16);
    let basis = SubspaceBasis::build(&s.channels, &s.resp, DEFAULT_RANK_TOL).unwrap();
    let r = basis.rank();
    // Pythagoras for reduce_vector.
    for _ in 0..10 {
        let h = random_vec(16, &mut rng);
        let hb = basis.reduce_vector(&h);
        let res = &h - basis.basis() * &hb;
        assert_relative_eq!(h.norm_squared(), hb.norm_squared() + res.norm_squared(), max_relative = 1e-10);
    }
    // A vector in the span keeps its norm; one orthogonal to it vanishes.
    let inside = basis.basis().column(0).into_owned() * C64::new(2.0, -1.0);
    assert_relative_eq!(basis.reduce_vector(&inside).norm(), inside.norm(), max_relative = 1e-12);
    if r < 16 {
        let v = random_vec(16, &mut rng);
        let perp = &v - basis.projector() * &v;
        assert!(basis.reduce_vector(&perp).norm() < 1e-12 * perp.norm());
    }
    // Reduced Q grid reproduces lifted traces.
    let qbar = basis.reduce_q(s.ops.q());
    for _ in 0..5 {
        let x = random_psd(r, &mut rng);
        let lifted = basis.lift(&x);
        for p in 0..5 {
            for q in 0..5 {
                let a = trace_product(qbar.get(p, q), &x);
                let b = trace_product(s.ops.q().get(p, q), &lifted);
                assert!((a - b).norm() <= 1e-10 * b.norm());
            }
        }
    }
    let eye = DMatrix::<C64>::identity(r, r);
    assert_relative_eq!(basis.lift(&eye).trace().re, r as f64, max_relative = 1e-12);
}

#[test]
fn lift_and_projection_preserve_psd_structure() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let s = scenario(16);
    let basis = SubspaceBasis::build(&s.channels, &s.resp, DEFAULT_RANK_TOL).unwrap();
    let r = basis.rank();
    let x = random_psd(r, &mut rng);
    let l = basis.lift(&x);
    assert!(l.symmetric_eigenvalues().min() >= -1e-10 * l.norm());
    assert_relative_eq!(l.trace().re, x.trace().re, max_relative = 1e-12);
    let b = DMatrix::from_fn(r, 2, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let low = &b * b.adjoint();
    let rank = basis.lift(&low).svd(false, false).singular_values.iter().filter(|v| **v > 1e-10).count();
    assert_eq!(rank, 2);
    assert!((basis.project_covariance(&l) - &l).norm() < 1e-12 * l.norm());
    let w = random_psd(16, &mut rng);
    let pw = basis.project_covariance(&w);
    assert!(pw.symmetric_eigenvalues().min() >= -1e-10 * w.norm());
    assert!(pw.trace().re <= w.trace().re + 1e-12);
    if r < 16 {
        let pi_perp = DMatrix::identity(16, 16) - basis.projector();
        let wp = &pi_perp * &w * &pi_perp;
        assert!(basis.project_covariance(&wp).norm() < 1e-10 * wp.norm());
    }
}

#[test]
fn reduce_of_zero_grid_is_zero() {
    let zero = FisherOperators::from_derivatives(vec![DMatrix::<C64>::zeros(6, 6); 2]).unwrap();
    let basis = SubspaceBasis::from_generators(&[DVector::from_element(6, C64::new(1.0, 0.0))], 1e-8).unwrap();
    let q = basis.reduce_q(zero.q());
    assert_eq!(q.get(0, 1).norm(), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    // Projection onto the subspace preserves every FIM entry and every
    // user's received power, and never increases transmit power.
    #[test]
    fn projection_invariances(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = scenario(24);
        let basis = SubspaceBasis::build(&s.channels, &s.resp, DEFAULT_RANK_TOL).unwrap();
        let w = random_psd(24, &mut rng);
        let pw = basis.project_covariance(&w);
        for p in 0..5 {
            for q in 0..5 {
                let a = trace_product(s.ops.q().get(p, q), &pw).re;
                let b = trace_product(s.ops.q().get(p, q), &w).re;
                let scale = trace_product(s.ops.q().get(p, p), &w).re.abs().max(trace_product(s.ops.q().get(q, q), &w).re.abs());
                prop_assert!((a - b).abs() <= 1e-9 * scale, "({p},{q}): {a} vs {b}");
            }
        }
        for h in &s.channels {
            let a = h.dotc(&(&pw * h)).re;
            let b = h.dotc(&(&w * h)).re;
            prop_assert!((a - b).abs() <= 1e-9 * b);
        }
        prop_assert!(pw.trace().re <= w.trace().re + 1e-12);
    }
}

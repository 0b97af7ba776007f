mod common;

use approx::assert_relative_eq;
use common::*;
use etcrb_core::baselines::*;
use etcrb_core::design::*;
use etcrb_core::fisher::{crb, FisherOperators};
use etcrb_core::geometry::EtPointCloud;
use etcrb_core::{Error, C64};
use nalgebra::{DMatrix, DVector};

fn unit(n: usize, i: usize) -> DVector<C64> {
    DVector::from_fn(n, |j, _| C64::new(f64::from(u8::from(i == j)), 0.0))
}

#[test]
fn focus_without_users_points_everything_at_the_center() {
    let s = setup(12, &[], 1.0, 2.0, 3.0, 0.8);
    let ac = center_steering(&s.array, &s.center()).unwrap();
    let sol = focus_design(&s.problem, &ac).unwrap();
    let a = &ac / C64::new(ac.norm(), 0.0);
    let expected = &a * a.adjoint() * C64::new(2.0, 0.0);
    assert!((&sol.rx - expected).norm() < 1e-12);
    assert_eq!(sol.diagnostics.status, "closed-form");
}

#[test]
fn focus_orthogonal_users_get_minimum_power() {
    // Users and target on disjoint coordinates: no interference, so each
    // user needs exactly Gamma sigma^2 / |h|^2.
    let s = setup(6, &[], 1.0, 1.0, 3.0, 0.8);
    let h = vec![unit(6, 0) * C64::new(2.0, 0.0), unit(6, 1) * C64::new(0.0, 0.5)];
    let gam = vec![10.0, 20.0];
    let problem = DesignProblem::new(h.clone(), gam.clone(), 0.01, 1.0, s.problem.sensing, s.problem.q.clone()).unwrap();
    let ac = unit(6, 4);
    let sol = focus_design(&problem, &ac).unwrap();
    for k in 0..2 {
        let expected = gam[k] * 0.01 / h[k].norm_squared();
        assert_relative_eq!(sol.w[k].trace().re, expected, max_relative = 1e-12);
    }
    assert_relative_eq!(sol.w0[(4, 4)].re, 1.0 - 0.1 / 4.0 - 0.2 / 0.25, max_relative = 1e-12);
}

#[test]
fn focus_scenario_is_sinr_and_power_tight() {
    let s = reference_setup(16);
    let ac = center_steering(&s.array, &s.center()).unwrap();
    let sol = focus_design(&s.problem, &ac).unwrap();
    let sinr = sinr_covariance(&s.problem.channels, &sol.w, &sol.w0, s.problem.comm_noise);
    for (v, g) in sinr.iter().zip(&s.problem.sinr_targets) {
        assert_relative_eq!(*v, *g, max_relative = 1e-8);
    }
    assert_relative_eq!(sol.rx.trace().re, 1.0, max_relative = 1e-8);
    assert_relative_eq!(sol.objective, sol.crb.value().unwrap(), max_relative = 1e-12);
    assert!(verify_solution(&s.problem, &sol, &Tolerances::default()).unwrap().passed());
}

#[test]
fn focus_reports_unreachable_targets() {
    let s = setup(8, &REFERENCE_USERS, db(60.0), 1.0, 3.0, 0.8);
    let ac = center_steering(&s.array, &s.center()).unwrap();
    assert!(matches!(focus_design(&s.problem, &ac), Err(Error::BaselineInfeasible(_))));
}

#[test]
fn point_design_matches_proposed_on_a_single_point() {
    let s = setup(10, &REFERENCE_USERS, db(10.0), 1.0, 3.0, 0.8);
    let point = point_target_problem(&s.problem, &s.array, s.center()).unwrap();
    let solver = Solver::default();
    let proposed = solve_full_sdr(&point, &solver).unwrap();
    let baseline = point_target_design(&point, &s.array, s.center(), &solver).unwrap();
    assert_eq!(baseline.method, Method::PointTarget);
    assert_relative_eq!(
        baseline.crb.value().unwrap(),
        proposed.crb.value().unwrap(),
        max_relative = 1e-8
    );
}

#[test]
fn point_design_is_scored_by_the_extended_crb() {
    let s = reference_setup(12);
    let sol = point_target_design(&s.problem, &s.array, s.center(), &Solver::default()).unwrap();
    let direct = CrbOutcome::evaluate(&s.problem.q, &sol.rx, &s.problem.sensing).unwrap();
    assert_eq!(sol.crb.value(), direct.value());
    assert!(sol.crb.value().unwrap() != sol.objective);
}

#[test]
fn singular_designs_are_reported_not_inverted() {
    let s = setup(8, &[], 1.0, 1.0, 3.0, 0.8);
    let ac = center_steering(&s.array, &s.center()).unwrap();
    let cloud = EtPointCloud::point(s.center(), C64::new(1.0, 0.0));
    let ops = FisherOperators::from_cloud(&cloud, &s.array).unwrap();
    let a = &ac / C64::new(ac.norm(), 0.0);
    let perp = DMatrix::<C64>::identity(8, 8) - &a * a.adjoint();
    let blind = &perp * unit(8, 3);
    let rx = &blind * blind.adjoint();
    let rx = &rx * C64::new(1.0 / rx.trace().re, 0.0);
    let outcome = CrbOutcome::evaluate(ops.q(), &rx, &s.problem.sensing).unwrap();
    // Power orthogonal to a leaves the center unexcited.
    let j = ops.q().fim(&rx, &s.problem.sensing).unwrap();
    assert!(matches!(outcome, CrbOutcome::Singular { .. }));
    assert!(crb(&j).is_err());
}

#[test]
fn trm_without_users_is_isotropic() {
    for (n, p) in [(4, 1.0), (4, 3.0), (8, 1.0)] {
        let s = setup(n, &[], 1.0, p, 3.0, 0.8);
        let sol = trm_et_design(&s.problem, &Solver::default()).unwrap();
        assert_relative_eq!(sol.objective, (n * n) as f64 / p, max_relative = 1e-6);
        let iso = DMatrix::<C64>::identity(n, n) * C64::new(p / n as f64, 0.0);
        assert!((&sol.rx - iso).norm() < 1e-5 * p);
    }
}

#[test]
fn trm_reduced_matches_dense_with_active_constraints() {
    // Loud noise and high targets so the SINR constraints bind.
    let mut s = setup(8, &REFERENCE_USERS, 300.0, 1.0, 3.0, 0.8);
    s.problem.comm_noise = 1e-3;
    let solver = Solver::default();
    let reduced = trm_et_design(&s.problem, &solver).unwrap();
    let dense = trm_et_design_dense(&s.problem, &solver).unwrap();
    assert_relative_eq!(reduced.objective, dense.objective, max_relative = 1e-5);
    let sinr = sinr_covariance(&s.problem.channels, &reduced.w, &reduced.w0, s.problem.comm_noise);
    assert!(sinr.iter().any(|v| (v / 300.0 - 1.0).abs() < 1e-4), "{sinr:?}");
    assert_relative_eq!(reduced.rx.trace().re, 1.0, max_relative = 1e-6);
    let inv_trace = reduced.rx.clone().try_inverse().unwrap().trace().re;
    assert_relative_eq!(inv_trace, reduced.objective, max_relative = 1e-5);
    assert_eq!(reduced.diagnostics.variable_dim, 2);
    assert!(verify_solution(&s.problem, &reduced, &Tolerances::default()).unwrap().passed());
}

#[test]
fn proposed_dominates_baselines() {
    let s = reference_setup(16);
    let solver = Solver::default();
    let proposed = solve_full_sdr(&s.problem, &solver).unwrap().crb.value().unwrap();
    let ac = center_steering(&s.array, &s.center()).unwrap();
    let others = [
        focus_design(&s.problem, &ac).unwrap(),
        point_target_design(&s.problem, &s.array, s.center(), &solver).unwrap(),
        trm_et_design(&s.problem, &solver).unwrap(),
    ];
    for o in &others {
        let c = o.crb.value().unwrap_or(f64::INFINITY);
        assert!(proposed <= c * (1.0 + 1e-6), "{}: {c} vs {proposed}", o.method);
    }
}

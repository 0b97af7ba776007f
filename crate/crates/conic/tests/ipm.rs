use approx::assert_relative_eq;
use etcrb_conic::{BlockKind, Coeff, ConicBackend, InteriorPoint, SdpProblem, SolveStatus};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    (&a + a.transpose()) * 0.5
}

#[test]
fn min_eigenvalue_via_trace_constraint() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in [2, 5, 12] {
        let c = random_symmetric(n, &mut rng);
        let mut p = SdpProblem::new();
        let x = p.add_block(BlockKind::Psd(n));
        p.add_objective(x, Coeff::Dense(c.clone()));
        p.add_constraint(vec![(x, Coeff::Identity(1.0))], 1.0);
        let sol = InteriorPoint::default().solve(&p).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        let lmin = c.symmetric_eigenvalues().min();
        assert_relative_eq!(sol.primal_objective, lmin, epsilon = 1e-6);
        assert_relative_eq!(sol.dual_objective, lmin, epsilon = 1e-6);
    }
}

#[test]
fn linear_program_block() {
    // min x0 + 2 x1 + 3 x2  s.t. x0 + x1 + x2 = 1, x1 - x2 = 0.2
    let mut p = SdpProblem::new();
    let x = p.add_block(BlockKind::NonNeg(3));
    p.add_objective(x, Coeff::Entries(vec![(0, 0, 1.0), (1, 1, 2.0), (2, 2, 3.0)]));
    p.add_constraint(vec![(x, Coeff::Identity(1.0))], 1.0);
    p.add_constraint(vec![(x, Coeff::Entries(vec![(1, 1, 1.0), (2, 2, -1.0)]))], 0.2);
    let sol = InteriorPoint::default().solve(&p).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert_relative_eq!(sol.primal_objective, 0.8 + 0.4, epsilon = 1e-6);
}

#[test]
fn schur_complement_gives_inverse() {
    // [a 1; 1 t] >= 0 with a fixed: min t = 1/a.
    for a in [0.25, 4.0, 1e3] {
        let mut p = SdpProblem::new();
        let s = p.add_block(BlockKind::Psd(2));
        p.add_objective(s, Coeff::Entries(vec![(1, 1, 1.0)]));
        p.add_constraint(vec![(s, Coeff::Entries(vec![(0, 0, 1.0)]))], a);
        p.add_constraint(vec![(s, Coeff::Entries(vec![(0, 1, 0.5)]))], 1.0);
        let sol = InteriorPoint::default().solve(&p).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_relative_eq!(sol.primal_objective, 1.0 / a, epsilon = 1e-6 * (1.0 + 1.0 / a));
    }
}

#[test]
fn matrix_inverse_trace_mixed_blocks() {
    // min tr(Phi) s.t. [R I; I Phi] >= 0, R = diag(d) fixed: optimum sum 1/d.
    let d = [0.5, 2.0, 8.0];
    let n = d.len();
    let mut p = SdpProblem::new();
    let s = p.add_block(BlockKind::Psd(2 * n));
    let slack = p.add_block(BlockKind::NonNeg(1));
    p.add_objective(s, Coeff::Entries((0..n).map(|i| (n + i, n + i, 1.0)).collect()));
    for i in 0..n {
        for j in i..n {
            let rhs = if i == j { d[i] } else { 0.0 };
            let v = if i == j { 1.0 } else { 0.5 };
            p.add_constraint(vec![(s, Coeff::Entries(vec![(i, j, v)]))], rhs);
        }
        for j in 0..n {
            p.add_constraint(vec![(s, Coeff::Entries(vec![(i, n + j, 0.5)]))], if i == j { 1.0 } else { 0.0 });
        }
    }
    // An inactive inequality through a slack: tr(Phi) + s = 100.
    p.add_constraint(
        vec![
            (s, Coeff::Entries((0..n).map(|i| (n + i, n + i, 1.0)).collect())),
            (slack, Coeff::Identity(1.0)),
        ],
        100.0,
    );
    let sol = InteriorPoint::default().solve(&p).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    let expected: f64 = d.iter().map(|v| 1.0 / v).sum();
    assert_relative_eq!(sol.primal_objective, expected, max_relative = 1e-6);
    assert!(sol.primal_residual < 1e-7);
    assert!(sol.dual_residual < 1e-7);
}

#[test]
fn low_rank_and_dense_terms_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 6;
    let u = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
    let c = random_symmetric(n, &mut rng) + DMatrix::identity(n, n) * 3.0;
    let solve = |coeff: Coeff| {
        let mut p = SdpProblem::new();
        let x = p.add_block(BlockKind::Psd(n));
        p.add_objective(x, Coeff::Dense(c.clone()));
        p.add_constraint(vec![(x, coeff)], 1.0);
        InteriorPoint::default().solve(&p).unwrap()
    };
    let a = solve(Coeff::LowRank(vec![(1.0, u.clone())]));
    let b = solve(Coeff::Dense(&u * u.transpose()));
    assert_eq!(a.status, SolveStatus::Optimal);
    assert_relative_eq!(a.primal_objective, b.primal_objective, max_relative = 1e-6);
    // min <C,X> s.t. u'Xu = 1 has value 1 / (u' C^-1 u).
    let expected = 1.0 / u.dot(&(c.clone().try_inverse().unwrap() * &u));
    assert_relative_eq!(a.primal_objective, expected, max_relative = 1e-6);
}

#[test]
fn detects_primal_infeasibility() {
    let mut p = SdpProblem::new();
    let x = p.add_block(BlockKind::Psd(3));
    p.add_objective(x, Coeff::Identity(1.0));
    p.add_constraint(vec![(x, Coeff::Identity(1.0))], -1.0);
    let sol = InteriorPoint::default().solve(&p).unwrap();
    assert_eq!(sol.status, SolveStatus::PrimalInfeasible);
}

#[test]
fn rejects_malformed_input() {
    let mut p = SdpProblem::new();
    let x = p.add_block(BlockKind::Psd(3));
    p.add_constraint(vec![(x, Coeff::Dense(DMatrix::zeros(2, 2)))], 1.0);
    assert!(InteriorPoint::default().solve(&p).is_err());

    let mut p = SdpProblem::new();
    p.add_block(BlockKind::Psd(3));
    p.add_constraint(vec![(4, Coeff::Identity(1.0))], 1.0);
    assert!(InteriorPoint::default().solve(&p).is_err());

    assert!(InteriorPoint::default().solve(&SdpProblem::new()).is_err());
}

#[test]
fn identical_input_gives_identical_output() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let c = random_symmetric(8, &mut rng);
    let mut p = SdpProblem::new();
    let x = p.add_block(BlockKind::Psd(8));
    p.add_objective(x, Coeff::Dense(c));
    p.add_constraint(vec![(x, Coeff::Identity(1.0))], 2.0);
    let a = InteriorPoint::default().solve(&p).unwrap();
    let b = InteriorPoint::default().solve(&p).unwrap();
    assert_eq!(a.x, b.x);
    assert_eq!(a.y, b.y);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // Weak duality plus the residuals reported by the backend bound the
    // distance between primal and dual objective values.
    #[test]
    fn reported_solution_is_consistent(seed in 0u64..10_000, n in 2usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_symmetric(n, &mut rng);
        let a = random_symmetric(n, &mut rng);
        let mut p = SdpProblem::new();
        let x = p.add_block(BlockKind::Psd(n));
        p.add_objective(x, Coeff::Dense(c));
        p.add_constraint(vec![(x, Coeff::Identity(1.0))], 1.0);
        p.add_constraint(vec![(x, Coeff::Dense(a.clone()))], 0.0);
        let sol = InteriorPoint::default().solve(&p).unwrap();
        match sol.status {
            SolveStatus::Optimal => {
                prop_assert!(sol.relative_gap < 1e-6);
                prop_assert!(sol.primal_residual < 1e-6);
                let xm = sol.x[0].as_matrix().unwrap();
                prop_assert!(xm.symmetric_eigenvalues().min() > -1e-8);
            }
            // <A, X> = 0 with tr X = 1 is infeasible when A is definite.
            SolveStatus::PrimalInfeasible => {
                let ev = a.symmetric_eigenvalues();
                prop_assert!(ev.min() > 0.0 || ev.max() < 0.0);
            }
            other => prop_assert!(false, "unexpected status {other}"),
        }
    }
}

//! Comparison designs, all scored by the same five-parameter CRB.

use std::time::Instant;

use etcrb_conic::{BlockKind, Coeff, SdpProblem};
use nalgebra::{DMatrix, DVector, Point2};
use num_complex::Complex;

use crate::design::{solve_full_sdr, CrbOutcome, DesignProblem, DesignSolution, Diagnostics, Method, Solver};
use crate::embed::{embed_outer, extract, im_terms, re_terms};
use crate::error::{Error, Result};
use crate::fisher::FisherOperators;
use crate::geometry::{steering, ArrayGeometry, EtPointCloud};
use crate::C64;

/// MRT beams with SINR-tight powers; leftover power is focused on the
/// target center through `a_c a_c^H`.
///
/// Tight SINRs with `p_0 = P - sum p_k` give one K x K linear system:
/// `p_k g_kk - G sum_{j!=k} p_j (g_kj - c_k) + G c_k p_k = G (sigma^2 + P c_k)`
/// with `g_kj = |h_k^H w_j|^2` and `c_k = |h_k^H a_c|^2`.
pub fn focus_design(problem: &DesignProblem, center_steering: &DVector<C64>) -> Result<DesignSolution> {
    problem.validate()?;
    let started = Instant::now();
    let n = problem.num_elements();
    if center_steering.len() != n {
        return Err(Error::DimensionMismatch { context: "center steering", got: center_steering.len(), expected: n });
    }
    let k = problem.num_users();
    let p = problem.power_budget;
    let dirs: Vec<DVector<C64>> = problem
        .channels
        .iter()
        .map(|h| {
            let norm = h.norm();
            if norm > 0.0 {
                Ok(h / C64::new(norm, 0.0))
            } else {
                Err(Error::BaselineInfeasible("zero user channel".into()))
            }
        })
        .collect::<Result<_>>()?;
    let ac = center_steering / C64::new(center_steering.norm(), 0.0);
    let g = DMatrix::from_fn(k, k, |i, j| problem.channels[i].dotc(&dirs[j]).norm_sqr());
    let c: Vec<f64> = problem.channels.iter().map(|h| h.dotc(&ac).norm_sqr()).collect();
    let mut a = DMatrix::zeros(k, k);
    let mut rhs = DVector::zeros(k);
    for i in 0..k {
        let gam = problem.sinr_targets[i];
        for j in 0..k {
            a[(i, j)] = if i == j { g[(i, i)] + gam * c[i] } else { -gam * (g[(i, j)] - c[i]) };
        }
        rhs[i] = gam * (problem.comm_noise + p * c[i]);
    }
    let powers = if k == 0 {
        DVector::zeros(0)
    } else {
        a.lu().solve(&rhs).ok_or_else(|| Error::BaselineInfeasible("singular power system".into()))?
    };
    if powers.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::BaselineInfeasible("negative user power".into()));
    }
    let p0 = p - powers.sum();
    if p0 < 0.0 {
        return Err(Error::BaselineInfeasible("SINR targets exceed the power budget".into()));
    }
    let w: Vec<DMatrix<C64>> = dirs.iter().zip(powers.iter()).map(|(d, &pk)| d * d.adjoint() * C64::new(pk, 0.0)).collect();
    let w0 = &ac * ac.adjoint() * C64::new(p0, 0.0);
    let diagnostics = Diagnostics::closed_form(n, started.elapsed());
    let mut sol = DesignSolution::from_covariances(Method::Focus, w, w0, f64::NAN, problem, diagnostics)?;
    sol.objective = sol.crb.value().unwrap_or(f64::INFINITY);
    Ok(sol)
}

/// The design problem of a single scatterer at `center` with parameters
/// `(x_c, y_c)` and unit coefficient.
pub fn point_target_problem(problem: &DesignProblem, array: &ArrayGeometry<f64>, center: Point2<f64>) -> Result<DesignProblem> {
    let cloud = EtPointCloud::point(center, Complex::new(1.0, 0.0));
    let ops = FisherOperators::from_cloud(&cloud, array)?;
    problem.with_q(ops.q().clone())
}

/// Point-target SDR; the returned CRB is the five-parameter one, and is
/// reported as singular when the point design leaves target directions
/// unexcited.
pub fn point_target_design(
    problem: &DesignProblem,
    array: &ArrayGeometry<f64>,
    center: Point2<f64>,
    solver: &Solver,
) -> Result<DesignSolution> {
    let point = point_target_problem(problem, array, center)?;
    let mut sol = solve_full_sdr(&point, solver)?;
    sol.method = Method::PointTarget;
    sol.crb = CrbOutcome::evaluate(&problem.q, &sol.rx, &problem.sensing)?;
    Ok(sol)
}

/// Orthonormal basis of the user-channel span.
fn channel_basis(channels: &[DVector<C64>], n: usize) -> DMatrix<C64> {
    if channels.is_empty() {
        return DMatrix::zeros(n, 0);
    }
    let h = DMatrix::from_columns(channels);
    let svd = h.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.max();
    let cols: Vec<_> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > 1e-10 * smax)
        .map(|i| u.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Target-response-matrix design: minimizes `tr(R_x^-1)` under the same
/// SINR and power constraints.
///
/// The objective and constraints are invariant under unitaries fixing the
/// user span `H` pointwise, and the objective is strictly convex, so the
/// optimum has the form `W_k = U A_k U^H + c_k (I - U U^H)`. The SDP is
/// solved over the small blocks `A_k` and scalars `c_k`.
pub fn trm_et_design(problem: &DesignProblem, solver: &Solver) -> Result<DesignSolution> {
    problem.validate()?;
    let assembly = Instant::now();
    let n = problem.num_elements();
    let k = problem.num_users();
    let uh = channel_basis(&problem.channels, n);
    let kr = uh.ncols();
    let rest = (n - kr) as f64;
    let g: Vec<DVector<C64>> = problem.channels.iter().map(|h| uh.ad_mul(h)).collect();
    let noise = problem.comm_noise / problem.power_budget;

    let mut sdp = SdpProblem::new();
    let a: Vec<usize> = if kr > 0 { (0..=k).map(|_| sdp.add_block(BlockKind::Psd(2 * kr))).collect() } else { Vec::new() };
    let schur = (kr > 0).then(|| sdp.add_block(BlockKind::Psd(4 * kr)));
    let tail = (rest > 0.0).then(|| (sdp.add_block(BlockKind::NonNeg(k + 1)), sdp.add_block(BlockKind::Psd(2))));
    let slack = sdp.add_block(BlockKind::NonNeg(k + 1));

    if let Some(s) = schur {
        // [sum A, I; I, Phi] as a complex block of order 2 kr.
        let m = 2 * kr;
        sdp.add_objective(s, Coeff::Entries((kr..m).flat_map(|i| re_terms(m, i, i, 1.0)).collect()));
        for i in 0..kr {
            for j in i..kr {
                let mut terms = vec![(s, Coeff::Entries(re_terms(m, i, j, 1.0)))];
                terms.extend(a.iter().map(|&b| (b, Coeff::Entries(re_terms(kr, i, j, -1.0)))));
                sdp.add_constraint(terms, 0.0);
                if i != j {
                    let mut terms = vec![(s, Coeff::Entries(im_terms(m, i, j, 1.0)))];
                    terms.extend(a.iter().map(|&b| (b, Coeff::Entries(im_terms(kr, i, j, -1.0)))));
                    sdp.add_constraint(terms, 0.0);
                }
            }
            for j in 0..kr {
                sdp.add_constraint(vec![(s, Coeff::Entries(re_terms(m, i, kr + j, 1.0)))], if i == j { 1.0 } else { 0.0 });
                sdp.add_constraint(vec![(s, Coeff::Entries(im_terms(m, i, kr + j, 1.0)))], 0.0);
            }
        }
    }
    if let Some((c, t)) = tail {
        // [sum c, 1; 1, t] >= 0 bounds the complement term (N - kr) / sum c.
        sdp.add_objective(t, Coeff::Entries(vec![(1, 1, rest)]));
        sdp.add_constraint(vec![(t, Coeff::Entries(vec![(0, 0, 1.0)])), (c, Coeff::Identity(-1.0))], 0.0);
        sdp.add_constraint(vec![(t, Coeff::Entries(vec![(0, 1, 0.5)]))], 1.0);
    }
    for (i, (gi, &gam)) in g.iter().zip(&problem.sinr_targets).enumerate() {
        let (u, v) = embed_outer(gi);
        let mut terms: Vec<_> = a
            .iter()
            .enumerate()
            .map(|(j, &b)| {
                let s = if j == i + 1 { 0.5 } else { -0.5 * gam };
                (b, Coeff::LowRank(vec![(s, u.clone()), (s, v.clone())]))
            })
            .collect();
        terms.push((slack, Coeff::Entries(vec![(i, i, -1.0)])));
        sdp.add_constraint(terms, gam * noise);
    }
    let mut terms: Vec<_> = a.iter().map(|&b| (b, Coeff::Identity(0.5))).collect();
    if let Some((c, _)) = tail {
        terms.push((c, Coeff::Identity(rest)));
    }
    terms.push((slack, Coeff::Entries(vec![(k, k, 1.0)])));
    sdp.add_constraint(terms, 1.0);

    let assembly_time = assembly.elapsed();
    let (sol, solve_time, retried) = solver.run(&sdp)?;

    let p = problem.power_budget;
    let scale = C64::new(p, 0.0);
    let perp = DMatrix::<C64>::identity(n, n) - &uh * uh.adjoint();
    let mut ws: Vec<DMatrix<C64>> = (0..=k)
        .map(|j| {
            let mut w = DMatrix::zeros(n, n);
            if kr > 0 {
                let aj = extract(sol.x[a[j]].as_matrix().expect("psd block")) * scale;
                w += &uh * aj * uh.adjoint();
            }
            if let Some((c, _)) = tail {
                let cj = sol.x[c].as_vector().expect("lp block")[j] * p;
                w += &perp * C64::new(cj, 0.0);
            }
            w
        })
        .collect();
    let w0 = ws.remove(0);
    let diagnostics = Diagnostics::from_solution(&sol, solve_time, assembly_time, kr, retried);
    DesignSolution::from_covariances(Method::TrmEt, ws, w0, sol.primal_objective / p, problem, diagnostics)
}

/// Dense formulation of [`trm_et_design`] over full N x N blocks with the
/// Schur constraint `[R, I; I, Phi] >= 0`. Used as a cross-check at small N.
pub fn trm_et_design_dense(problem: &DesignProblem, solver: &Solver) -> Result<DesignSolution> {
    problem.validate()?;
    let assembly = Instant::now();
    let n = problem.num_elements();
    let k = problem.num_users();
    let noise = problem.comm_noise / problem.power_budget;
    let mut sdp = SdpProblem::new();
    let w: Vec<usize> = (0..=k).map(|_| sdp.add_block(BlockKind::Psd(2 * n))).collect();
    let s = sdp.add_block(BlockKind::Psd(4 * n));
    let slack = sdp.add_block(BlockKind::NonNeg(k + 1));
    let m = 2 * n;
    sdp.add_objective(s, Coeff::Entries((n..m).flat_map(|i| re_terms(m, i, i, 1.0)).collect()));
    for i in 0..n {
        for j in i..n {
            let mut terms = vec![(s, Coeff::Entries(re_terms(m, i, j, 1.0)))];
            terms.extend(w.iter().map(|&b| (b, Coeff::Entries(re_terms(n, i, j, -1.0)))));
            sdp.add_constraint(terms, 0.0);
            if i != j {
                let mut terms = vec![(s, Coeff::Entries(im_terms(m, i, j, 1.0)))];
                terms.extend(w.iter().map(|&b| (b, Coeff::Entries(im_terms(n, i, j, -1.0)))));
                sdp.add_constraint(terms, 0.0);
            }
        }
        for j in 0..n {
            sdp.add_constraint(vec![(s, Coeff::Entries(re_terms(m, i, n + j, 1.0)))], if i == j { 1.0 } else { 0.0 });
            sdp.add_constraint(vec![(s, Coeff::Entries(im_terms(m, i, n + j, 1.0)))], 0.0);
        }
    }
    for (i, (h, &gam)) in problem.channels.iter().zip(&problem.sinr_targets).enumerate() {
        let (u, v) = embed_outer(h);
        let mut terms: Vec<_> = w
            .iter()
            .enumerate()
            .map(|(j, &b)| {
                let sc = if j == i + 1 { 0.5 } else { -0.5 * gam };
                (b, Coeff::LowRank(vec![(sc, u.clone()), (sc, v.clone())]))
            })
            .collect();
        terms.push((slack, Coeff::Entries(vec![(i, i, -1.0)])));
        sdp.add_constraint(terms, gam * noise);
    }
    let mut terms: Vec<_> = w.iter().map(|&b| (b, Coeff::Identity(0.5))).collect();
    terms.push((slack, Coeff::Entries(vec![(k, k, 1.0)])));
    sdp.add_constraint(terms, 1.0);

    let assembly_time = assembly.elapsed();
    let (sol, solve_time, retried) = solver.run(&sdp)?;
    let p = problem.power_budget;
    let mut ws: Vec<DMatrix<C64>> =
        w.iter().map(|&b| extract(sol.x[b].as_matrix().expect("psd block")) * C64::new(p, 0.0)).collect();
    let w0 = ws.remove(0);
    let diagnostics = Diagnostics::from_solution(&sol, solve_time, assembly_time, n, retried);
    DesignSolution::from_covariances(Method::TrmEt, ws, w0, sol.primal_objective / p, problem, diagnostics)
}

/// Steering vector toward the target center, for [`focus_design`].
pub fn center_steering(array: &ArrayGeometry<f64>, center: &Point2<f64>) -> Result<DVector<C64>> {
    steering(array, center)
}

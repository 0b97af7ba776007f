//! CRB-minimizing transmit covariance design by semidefinite relaxation.
//!
//! Internally the power budget is normalized to one and the Q grid to unit
//! largest Frobenius norm; the Schur block is optionally whitened by the
//! FIM of the isotropic covariance. All three are exact reformulations and
//! every reported quantity is mapped back to physical units.

use std::fmt;
use std::time::{Duration, Instant};

use etcrb_conic::{BlockKind, Coeff, ConicBackend, InteriorPoint, IpmSettings, SdpProblem, SdpSolution, SolveStatus};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::embed::{embed, embed_outer, extract};
use crate::error::{Error, Result};
use crate::fisher::{crb, QGrid, SensingConfig};
use crate::subspace::SubspaceBasis;
use crate::C64;

/// Design methods reported in results.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ProposedFull,
    ProposedReduced,
    Focus,
    PointTarget,
    TrmEt,
}

impl Method {
    pub const ALL: [Method; 5] =
        [Method::ProposedFull, Method::ProposedReduced, Method::Focus, Method::PointTarget, Method::TrmEt];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ProposedFull => "proposed-full",
            Method::ProposedReduced => "proposed-reduced",
            Method::Focus => "focus",
            Method::PointTarget => "point-target",
            Method::TrmEt => "trm-et",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method '{s}'")))
    }
}

/// Everything the SDR needs: channels, targets, budgets and the ambient Q grid.
#[derive(Clone, Debug)]
pub struct DesignProblem {
    pub channels: Vec<DVector<C64>>,
    /// Linear SINR targets.
    pub sinr_targets: Vec<f64>,
    /// Communication noise power (W).
    pub comm_noise: f64,
    /// Total transmit power budget (W).
    pub power_budget: f64,
    pub sensing: SensingConfig<f64>,
    pub q: QGrid<f64>,
}

impl DesignProblem {
    pub fn new(
        channels: Vec<DVector<C64>>,
        sinr_targets: Vec<f64>,
        comm_noise: f64,
        power_budget: f64,
        sensing: SensingConfig<f64>,
        q: QGrid<f64>,
    ) -> Result<Self> {
        let p = Self { channels, sinr_targets, comm_noise, power_budget, sensing, q };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.q.size();
        if self.sinr_targets.len() != self.channels.len() {
            return Err(Error::DimensionMismatch {
                context: "SINR targets",
                got: self.sinr_targets.len(),
                expected: self.channels.len(),
            });
        }
        if let Some(h) = self.channels.iter().find(|h| h.len() != n) {
            return Err(Error::DimensionMismatch { context: "user channel", got: h.len(), expected: n });
        }
        if self.sinr_targets.iter().any(|g| !(*g > 0.0) || !g.is_finite()) {
            return Err(Error::InvalidParameter("SINR targets must be positive".into()));
        }
        if !(self.power_budget > 0.0) || !self.power_budget.is_finite() {
            return Err(Error::InvalidParameter("power budget must be positive".into()));
        }
        if !(self.comm_noise > 0.0) || !self.comm_noise.is_finite() {
            return Err(Error::InvalidParameter("communication noise must be positive".into()));
        }
        Ok(())
    }

    pub fn num_users(&self) -> usize {
        self.channels.len()
    }

    pub fn num_elements(&self) -> usize {
        self.q.size()
    }

    pub fn param_dim(&self) -> usize {
        self.q.param_dim()
    }

    /// Same scenario with a different Q grid (e.g. another target model).
    pub fn with_q(&self, q: QGrid<f64>) -> Result<Self> {
        Self::new(self.channels.clone(), self.sinr_targets.clone(), self.comm_noise, self.power_budget, self.sensing, q)
    }
}

/// Solver settings for the design layer.
#[derive(Clone, Debug)]
pub struct Solver {
    pub settings: IpmSettings,
    /// Whiten the Schur block by the isotropic FIM.
    pub whiten: bool,
    /// Retry once with 10x looser tolerances on non-convergence.
    pub retry: bool,
}

impl Default for Solver {
    fn default() -> Self {
        Self { settings: IpmSettings::default(), whiten: true, retry: true }
    }
}

impl Solver {
    pub(crate) fn run(&self, sdp: &SdpProblem) -> Result<(SdpSolution, Duration, bool)> {
        let started = Instant::now();
        let sol = InteriorPoint::new(self.settings.clone()).solve(sdp)?;
        let mut retried = false;
        let sol = match sol.status {
            SolveStatus::MaxIterations | SolveStatus::NumericalError if self.retry => {
                retried = true;
                let mut loose = self.settings.clone();
                loose.feas_tol *= 10.0;
                loose.gap_tol *= 10.0;
                InteriorPoint::new(loose).solve(sdp)?
            }
            _ => sol,
        };
        let elapsed = started.elapsed();
        match sol.status {
            SolveStatus::Optimal => Ok((sol, elapsed, retried)),
            SolveStatus::PrimalInfeasible => Err(Error::Infeasible { status: sol.status }),
            status => Err(Error::SolverFailure {
                status,
                primal_residual: sol.primal_residual,
                dual_residual: sol.dual_residual,
                relative_gap: sol.relative_gap,
            }),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Diagnostics {
    pub status: String,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub relative_gap: f64,
    pub solve_time: Duration,
    pub assembly_time: Duration,
    /// Order of each covariance variable in the solved problem.
    pub variable_dim: usize,
    pub retried: bool,
}

impl Diagnostics {
    pub(crate) fn closed_form(variable_dim: usize, assembly_time: Duration) -> Self {
        Self {
            status: "closed-form".into(),
            iterations: 0,
            primal_residual: 0.0,
            dual_residual: 0.0,
            relative_gap: 0.0,
            solve_time: Duration::ZERO,
            assembly_time,
            variable_dim,
            retried: false,
        }
    }

    pub(crate) fn from_solution(sol: &SdpSolution, solve_time: Duration, assembly_time: Duration, dim: usize, retried: bool) -> Self {
        Self {
            status: sol.status.to_string(),
            iterations: sol.iterations,
            primal_residual: sol.primal_residual,
            dual_residual: sol.dual_residual,
            relative_gap: sol.relative_gap,
            solve_time,
            assembly_time,
            variable_dim: dim,
            retried,
        }
    }

    /// Per-matrix variable entries, `dim^2`.
    pub fn variable_entries(&self) -> usize {
        self.variable_dim * self.variable_dim
    }
}

/// CRB of a covariance, or the reason it does not exist.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CrbOutcome {
    Finite { value: f64 },
    Singular { min_eigenvalue: f64, condition: f64 },
}

impl CrbOutcome {
    pub fn evaluate(q: &QGrid<f64>, rx: &DMatrix<C64>, sensing: &SensingConfig<f64>) -> Result<Self> {
        let j = q.fim(rx, sensing)?;
        match crb(&j) {
            Ok(c) => Ok(CrbOutcome::Finite { value: c.value }),
            Err(Error::SingularFim { min_eigenvalue, condition }) => Ok(CrbOutcome::Singular { min_eigenvalue, condition }),
            Err(e) => Err(e),
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            CrbOutcome::Finite { value } => Some(*value),
            CrbOutcome::Singular { .. } => None,
        }
    }
}

/// Beamformers and the sensing covariance after rank-one recovery.
#[derive(Clone, Debug)]
pub struct Recovery {
    pub beams: Vec<DVector<C64>>,
    pub w0: DMatrix<C64>,
}

impl Recovery {
    pub fn covariance(&self) -> DMatrix<C64> {
        self.beams.iter().fold(self.w0.clone(), |acc, w| acc + w * w.adjoint())
    }
}

#[derive(Clone, Debug)]
pub struct DesignSolution {
    pub method: Method,
    /// Communication covariances `W_1..W_K`.
    pub w: Vec<DMatrix<C64>>,
    /// Dedicated sensing covariance.
    pub w0: DMatrix<C64>,
    pub rx: DMatrix<C64>,
    /// Schur variable in physical units, when the method has one.
    pub phi: Option<DMatrix<f64>>,
    /// Optimal value of the method's own objective, physical units.
    pub objective: f64,
    /// CRB of `rx` under the five-parameter target model.
    pub crb: CrbOutcome,
    pub recovery: Option<Recovery>,
    pub diagnostics: Diagnostics,
}

impl DesignSolution {
    pub(crate) fn from_covariances(
        method: Method,
        w: Vec<DMatrix<C64>>,
        w0: DMatrix<C64>,
        objective: f64,
        problem: &DesignProblem,
        diagnostics: Diagnostics,
    ) -> Result<Self> {
        let rx = w.iter().fold(w0.clone(), |acc, wk| acc + wk);
        let crb = CrbOutcome::evaluate(&problem.q, &rx, &problem.sensing)?;
        Ok(Self { method, w, w0, rx, phi: None, objective, crb, recovery: None, diagnostics })
    }

    /// Runs rank-one recovery and stores the result.
    pub fn recover(&mut self, channels: &[DVector<C64>]) -> Result<&Recovery> {
        let rec = rank_one_recovery(&self.w, &self.w0, channels)?;
        Ok(self.recovery.insert(rec))
    }

    /// JSON document with covariances as row-major interleaved re/im.
    pub fn to_json(&self, scenario_hash: &str) -> serde_json::Value {
        let mat = |m: &DMatrix<C64>| {
            let mut v = Vec::with_capacity(2 * m.len());
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    v.push(m[(i, j)].re);
                    v.push(m[(i, j)].im);
                }
            }
            json!({ "rows": m.nrows(), "cols": m.ncols(), "data": v })
        };
        let vec = |x: &DVector<C64>| x.iter().flat_map(|c| [c.re, c.im]).collect::<Vec<_>>();
        json!({
            "scenario_hash": scenario_hash,
            "method": self.method,
            "objective": self.objective,
            "crb": self.crb,
            "w": self.w.iter().map(mat).collect::<Vec<_>>(),
            "w0": mat(&self.w0),
            "rx": mat(&self.rx),
            "phi": self.phi.as_ref().map(|p| json!({ "rows": p.nrows(), "cols": p.ncols(), "data": p.transpose().as_slice() })),
            "beams": self.recovery.as_ref().map(|r| r.beams.iter().map(vec).collect::<Vec<_>>()),
            "recovered_w0": self.recovery.as_ref().map(|r| mat(&r.w0)),
            "diagnostics": self.diagnostics,
        })
    }
}

/// The relaxed problem in a given coordinate space, normalized.
struct SdrInstance {
    dim: usize,
    channels: Vec<DVector<C64>>,
    gammas: Vec<f64>,
    /// `sigma_c^2 / P`.
    noise: f64,
    /// Normalized (and possibly whitened) Q grid.
    q: QGrid<f64>,
    /// Weight on the Schur variable in the objective.
    weight: DMatrix<f64>,
    /// Maps the solver's Schur variable back: `Phi = t Phi' t / c`.
    t: DMatrix<f64>,
    c: f64,
}

impl SdrInstance {
    fn new(problem: &DesignProblem, channels: Vec<DVector<C64>>, q: QGrid<f64>, whiten: bool) -> Self {
        let dim = q.size();
        let d = q.param_dim();
        let qmax = q.max_norm();
        let qmax = if qmax > 0.0 { qmax } else { 1.0 };
        let unit = q.map(|b| b.map(|v| v / qmax));
        let c = problem.sensing.scale() * problem.power_budget * qmax;
        let (q, weight, t) = match whiten.then(|| whitening(&unit, dim)).flatten() {
            Some((t, weight)) => (unit.congruence(&t), weight, t),
            None => (unit, DMatrix::identity(d, d), DMatrix::identity(d, d)),
        };
        Self {
            dim,
            channels,
            gammas: problem.sinr_targets.clone(),
            noise: problem.comm_noise / problem.power_budget,
            q,
            weight,
            t,
            c,
        }
    }

    fn build(&self) -> (SdpProblem, Layout) {
        let k = self.channels.len();
        let d = self.q.param_dim();
        let n2 = 2 * self.dim;
        let mut sdp = SdpProblem::new();
        let w: Vec<usize> = (0..=k).map(|_| sdp.add_block(BlockKind::Psd(n2))).collect();
        let schur = sdp.add_block(BlockKind::Psd(2 * d));
        let slack = sdp.add_block(BlockKind::NonNeg(k + 1));

        let mut obj = Vec::new();
        for p in 0..d {
            for q in p..d {
                let v = self.weight[(p, q)];
                if v != 0.0 {
                    obj.push((d + p, d + q, v));
                }
            }
        }
        sdp.add_objective(schur, Coeff::Entries(obj));

        // Top-left Schur block equals the normalized FIM.
        for p in 0..d {
            for q in p..d {
                let qhat = embed(self.q.get(p, q)) * -0.5;
                let mut terms: Vec<_> = w.iter().map(|&b| (b, Coeff::Dense(qhat.clone()))).collect();
                let v = if p == q { 1.0 } else { 0.5 };
                terms.push((schur, Coeff::Entries(vec![(p, q, v)])));
                sdp.add_constraint(terms, 0.0);
            }
        }
        // Off-diagonal Schur block is the identity.
        for p in 0..d {
            for q in 0..d {
                sdp.add_constraint(vec![(schur, Coeff::Entries(vec![(p, d + q, 0.5)]))], if p == q { 1.0 } else { 0.0 });
            }
        }
        // h^H W_k h - Gamma sum_{j != k} h^H W_j h - s_k = Gamma sigma^2.
        for (i, (h, &g)) in self.channels.iter().zip(&self.gammas).enumerate() {
            let (u, v) = embed_outer(h);
            let mut terms = Vec::with_capacity(k + 2);
            for (j, &b) in w.iter().enumerate() {
                let s = if j == i + 1 { 0.5 } else { -0.5 * g };
                terms.push((b, Coeff::LowRank(vec![(s, u.clone()), (s, v.clone())])));
            }
            terms.push((slack, Coeff::Entries(vec![(i, i, -1.0)])));
            sdp.add_constraint(terms, g * self.noise);
        }
        // sum_k tr(W_k) + s = 1.
        let mut terms: Vec<_> = w.iter().map(|&b| (b, Coeff::Identity(0.5))).collect();
        terms.push((slack, Coeff::Entries(vec![(k, k, 1.0)])));
        sdp.add_constraint(terms, 1.0);

        (sdp, Layout { w, schur })
    }
}

struct Layout {
    w: Vec<usize>,
    schur: usize,
}

/// `J0^{-1/2}` and `J0^{-1}` for the isotropic FIM `J0`, if well posed.
fn whitening(q: &QGrid<f64>, dim: usize) -> Option<(DMatrix<f64>, DMatrix<f64>)> {
    let iso = DMatrix::<C64>::identity(dim, dim) / C64::new(dim as f64, 0.0);
    let unit = SensingConfig { snapshots: 1, noise_power: 2.0 };
    let j0 = q.fim_unchecked(&iso, &unit);
    let eig = j0.symmetric_eigen();
    let max = eig.eigenvalues.max();
    if !(max > 0.0) || eig.eigenvalues.min() <= 1e-12 * max {
        return None;
    }
    let v = &eig.eigenvectors;
    let inv_sqrt = v * DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt())) * v.transpose();
    let inv = v * DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l)) * v.transpose();
    Some(((&inv_sqrt + inv_sqrt.transpose()) * 0.5, (&inv + inv.transpose()) * 0.5))
}

/// Solves the relaxation in the coordinates of `basis` (ambient if `None`).
fn solve_sdr(problem: &DesignProblem, basis: Option<&SubspaceBasis<f64>>, solver: &Solver, method: Method) -> Result<DesignSolution> {
    problem.validate()?;
    let assembly = Instant::now();
    let (channels, q) = match basis {
        Some(b) => {
            if b.ambient_dim() != problem.num_elements() {
                return Err(Error::DimensionMismatch {
                    context: "subspace basis",
                    got: b.ambient_dim(),
                    expected: problem.num_elements(),
                });
            }
            (problem.channels.iter().map(|h| b.reduce_vector(h)).collect(), b.reduce_q(&problem.q))
        }
        None => (problem.channels.clone(), problem.q.clone()),
    };
    let inst = SdrInstance::new(problem, channels, q, solver.whiten);
    let (sdp, layout) = inst.build();
    let assembly_time = assembly.elapsed();
    let (sol, solve_time, retried) = solver.run(&sdp)?;

    let scale = C64::new(problem.power_budget, 0.0);
    let lift = |x: DMatrix<C64>| match basis {
        Some(b) => b.lift(&x),
        None => x,
    };
    let mut ws: Vec<DMatrix<C64>> = layout
        .w
        .iter()
        .map(|&b| lift(extract(sol.x[b].as_matrix().expect("psd block")) * scale))
        .collect();
    let w0 = ws.remove(0);
    let d = inst.q.param_dim();
    let s = sol.x[layout.schur].as_matrix().expect("psd block");
    let phi_w = s.view((d, d), (d, d)).into_owned();
    let phi_w = (&phi_w + phi_w.transpose()) * 0.5;
    let phi = &inst.t * &phi_w * &inst.t / inst.c;
    let objective = inst.weight.dot(&phi_w) / inst.c;
    let diagnostics = Diagnostics::from_solution(&sol, solve_time, assembly_time, inst.dim, retried);
    let mut out = DesignSolution::from_covariances(method, ws, w0, objective, problem, diagnostics)?;
    out.phi = Some(phi);
    Ok(out)
}

/// Relaxed design over N x N covariances.
pub fn solve_full_sdr(problem: &DesignProblem, solver: &Solver) -> Result<DesignSolution> {
    solve_sdr(problem, None, solver, Method::ProposedFull)
}

/// Relaxed design over r x r covariances in the reduced subspace, lifted back.
pub fn solve_reduced_sdr(problem: &DesignProblem, basis: &SubspaceBasis<f64>, solver: &Solver) -> Result<DesignSolution> {
    solve_sdr(problem, Some(basis), solver, Method::ProposedReduced)
}

/// `w_k = W_k h_k / sqrt(h_k^H W_k h_k)`, `W0' = W0 + sum_k (W_k - w_k w_k^H)`.
pub fn rank_one_recovery(w: &[DMatrix<C64>], w0: &DMatrix<C64>, channels: &[DVector<C64>]) -> Result<Recovery> {
    if w.len() != channels.len() {
        return Err(Error::DimensionMismatch { context: "recovery channels", got: channels.len(), expected: w.len() });
    }
    let mut beams = Vec::with_capacity(w.len());
    let mut new_w0 = w0.clone();
    for (k, (wk, h)) in w.iter().zip(channels).enumerate() {
        let wh = wk * h;
        let useful = h.dotc(&wh).re;
        if !(useful > 0.0) {
            return Err(Error::DegenerateUser(k));
        }
        let beam = wh / C64::new(useful.sqrt(), 0.0);
        new_w0 += wk - &beam * beam.adjoint();
        beams.push(beam);
    }
    Ok(Recovery { beams, w0: new_w0 })
}

fn quad(h: &DVector<C64>, w: &DMatrix<C64>) -> f64 {
    h.dotc(&(w * h)).re
}

/// Per-user SINR with communication covariances.
pub fn sinr_covariance(channels: &[DVector<C64>], w: &[DMatrix<C64>], w0: &DMatrix<C64>, noise: f64) -> Vec<f64> {
    channels
        .iter()
        .enumerate()
        .map(|(k, h)| {
            let interference: f64 = w.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, wj)| quad(h, wj)).sum();
            quad(h, &w[k]) / (interference + quad(h, w0) + noise)
        })
        .collect()
}

/// Per-user SINR with beamformers.
pub fn sinr_beams(channels: &[DVector<C64>], beams: &[DVector<C64>], w0: &DMatrix<C64>, noise: f64) -> Vec<f64> {
    channels
        .iter()
        .enumerate()
        .map(|(k, h)| {
            let gain = |b: &DVector<C64>| h.dotc(b).norm_sqr();
            let interference: f64 = beams.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, b)| gain(b)).sum();
            gain(&beams[k]) / (interference + quad(h, w0) + noise)
        })
        .collect()
}

/// Acceptance margins for [`verify_solution`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Relative SINR shortfall allowed.
    pub sinr: f64,
    /// Power overshoot allowed, relative to the budget.
    pub power: f64,
    /// Negative eigenvalue allowed, relative to the budget.
    pub psd: f64,
    /// Mismatch between `rx` and the sum of its parts, relative to the budget.
    pub consistency: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { sinr: 1e-6, power: 1e-6, psd: 1e-7, consistency: 1e-10 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub limit: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
    /// CRB recomputed from `rx`.
    pub crb: CrbOutcome,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn min_eig(m: &DMatrix<C64>) -> f64 {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    h.symmetric_eigenvalues().min()
}

/// Recomputes SINRs, power, PSD margins and the CRB from the covariances.
pub fn verify_solution(problem: &DesignProblem, sol: &DesignSolution, tol: &Tolerances) -> Result<VerificationReport> {
    let p = problem.power_budget;
    let mut checks = Vec::new();
    let mut check = |name: String, value: f64, limit: f64, passed: bool| checks.push(Check { name, passed, value, limit });

    let parts = sol.w.iter().fold(sol.w0.clone(), |acc, w| acc + w);
    let mismatch = (&parts - &sol.rx).norm();
    check("rx-consistency".into(), mismatch, tol.consistency * p, mismatch <= tol.consistency * p);

    let power = sol.rx.trace().re;
    check("power".into(), power, p * (1.0 + tol.power), power <= p * (1.0 + tol.power));

    for (k, w) in std::iter::once(&sol.w0).chain(&sol.w).enumerate() {
        let e = min_eig(w);
        check(format!("psd-w{k}"), e, -tol.psd * p, e >= -tol.psd * p);
    }
    let sinr = sinr_covariance(&problem.channels, &sol.w, &sol.w0, problem.comm_noise);
    for (k, (s, g)) in sinr.iter().zip(&problem.sinr_targets).enumerate() {
        let limit = g * (1.0 - tol.sinr);
        check(format!("sinr-user{}", k + 1), *s, limit, *s >= limit);
    }
    if let Some(rec) = &sol.recovery {
        let e = min_eig(&rec.w0);
        check("psd-recovered-w0".into(), e, -tol.psd * p, e >= -tol.psd * p);
        let drift = (rec.covariance() - &sol.rx).norm();
        check("recovery-rx".into(), drift, tol.consistency * p, drift <= tol.consistency * p);
        let sinr = sinr_beams(&problem.channels, &rec.beams, &rec.w0, problem.comm_noise);
        for (k, (s, g)) in sinr.iter().zip(&problem.sinr_targets).enumerate() {
            let limit = g * (1.0 - tol.sinr);
            check(format!("sinr-recovered-user{}", k + 1), *s, limit, *s >= limit);
        }
    }
    let crb = CrbOutcome::evaluate(&problem.q, &sol.rx, &problem.sensing)?;
    Ok(VerificationReport { checks, crb })
}

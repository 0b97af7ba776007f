//! Infeasible primal-dual path-following method with the HKM search
//! direction and a Mehrotra predictor-corrector.

use std::time::{Duration, Instant};

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::problem::{BlockKind, BlockValue, Coeff, LinearConstraint, SdpProblem, SdpSolution, SolveStatus};
use crate::{ConicBackend, ConicError};

/// Environment variable holding the backend verbosity level (0 = silent,
/// 1 = summary, 2 = per-iteration log on stderr).
pub const VERBOSITY_ENV: &str = "ETCRB_SOLVER_VERBOSE";

const INFEASIBILITY_TOL: f64 = 1e-8;
const STALL_STEP: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct IpmSettings {
    /// Relative primal and dual feasibility tolerance.
    pub feas_tol: f64,
    /// Relative duality gap tolerance.
    pub gap_tol: f64,
    pub max_iter: usize,
    pub time_limit: Option<Duration>,
    pub verbose: u8,
}

impl Default for IpmSettings {
    fn default() -> Self {
        let verbose = std::env::var(VERBOSITY_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(0);
        Self { feas_tol: 1e-7, gap_tol: 1e-7, max_iter: 500, time_limit: None, verbose }
    }
}

#[derive(Debug, Clone, Default)]
pub struct InteriorPoint {
    pub settings: IpmSettings,
}

impl InteriorPoint {
    pub fn new(settings: IpmSettings) -> Self {
        Self { settings }
    }
}

impl ConicBackend for InteriorPoint {
    fn solve(&self, problem: &SdpProblem) -> Result<SdpSolution, ConicError> {
        problem.validate()?;
        let scaled = ScaledProblem::new(problem);
        let mut state = Solver::new(&scaled, problem, &self.settings);
        let status = state.run();
        Ok(scaled.unscale(problem, state.x, state.y, state.z, status, state.iterations))
    }
}

/// Row-normalized copy of the caller's problem with `b` and `C` scaled to
/// unit-order norms.
struct ScaledProblem {
    inner: SdpProblem,
    row_scale: Vec<f64>,
    b_scale: f64,
    c_scale: f64,
}

impl ScaledProblem {
    fn new(problem: &SdpProblem) -> Self {
        let mut inner = problem.clone();
        let mut row_scale = Vec::with_capacity(inner.constraints.len());
        for con in inner.constraints.iter_mut() {
            let norm = con
                .terms
                .iter()
                .map(|(b, c)| c.norm_sq(problem.blocks[*b]))
                .sum::<f64>()
                .sqrt();
            let d = if norm > 0.0 { 1.0 / norm } else { 1.0 };
            for (_, c) in con.terms.iter_mut() {
                c.scale(d);
            }
            con.rhs *= d;
            row_scale.push(d);
        }
        let b_norm = inner.constraints.iter().map(|c| c.rhs * c.rhs).sum::<f64>().sqrt();
        let b_scale = b_norm.max(1.0);
        for con in inner.constraints.iter_mut() {
            con.rhs /= b_scale;
        }
        let c_norm = objective_norm(&inner);
        let c_scale = c_norm.max(1.0);
        for (_, c) in inner.objective.iter_mut() {
            c.scale(1.0 / c_scale);
        }
        Self { inner, row_scale, b_scale, c_scale }
    }

    fn unscale(
        &self,
        original: &SdpProblem,
        x: Vec<BlockValue>,
        y: DVector<f64>,
        z: Vec<BlockValue>,
        status: SolveStatus,
        iterations: usize,
    ) -> SdpSolution {
        let x: Vec<BlockValue> = x.iter().map(|v| v.scaled(self.b_scale)).collect();
        let z: Vec<BlockValue> = z.iter().map(|v| v.scaled(self.c_scale)).collect();
        let y = DVector::from_iterator(y.len(), y.iter().zip(&self.row_scale).map(|(v, d)| v * d * self.c_scale));

        let pobj = original.objective_value(&x);
        let dobj: f64 = original.constraints.iter().zip(y.iter()).map(|(c, v)| c.rhs * v).sum();
        let b_norm = original.constraints.iter().map(|c| c.rhs * c.rhs).sum::<f64>().sqrt();
        let primal_residual = original.primal_residual(&x).norm() / (1.0 + b_norm);
        let mut rd = original.dual_slack(&y);
        for (r, zb) in rd.iter_mut().zip(&z) {
            r.axpy(-1.0, zb);
        }
        let dual_residual = rd.iter().map(|r| r.norm_sq()).sum::<f64>().sqrt() / (1.0 + objective_norm(original));
        SdpSolution {
            status,
            x,
            y,
            z,
            primal_objective: pobj,
            dual_objective: dobj,
            primal_residual,
            dual_residual,
            relative_gap: (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs()),
            iterations,
        }
    }
}

fn objective_norm(p: &SdpProblem) -> f64 {
    let mut c: Vec<BlockValue> = p.blocks.iter().map(|k| BlockValue::zeros(*k)).collect();
    for (b, coeff) in &p.objective {
        c[*b].add_coeff(1.0, coeff);
    }
    c.iter().map(|v| v.norm_sq()).sum::<f64>().sqrt()
}

/// Per-block factorizations reused within one iteration.
enum Factor {
    Psd { lx: DMatrix<f64>, lz: DMatrix<f64>, zinv: DMatrix<f64>, xz: DMatrix<f64> },
    Lp { ratio: DVector<f64> },
}

struct Direction {
    dx: Vec<BlockValue>,
    dy: DVector<f64>,
    dz: Vec<BlockValue>,
}

struct Solver<'a> {
    p: &'a SdpProblem,
    settings: &'a IpmSettings,
    /// Terms grouped by block: `(constraint index, coefficient)`.
    by_block: Vec<Vec<(usize, &'a Coeff)>>,
    /// Dense coefficient vectors for nonnegative blocks.
    lp_coeffs: Vec<Vec<(usize, DVector<f64>)>>,
    b: DVector<f64>,
    c: Vec<BlockValue>,
    /// Maps scaled residual entries back to the caller's units.
    rp_unscale: DVector<f64>,
    b_scale: f64,
    c_scale: f64,
    b_norm: f64,
    c_norm: f64,
    nu: f64,
    x: Vec<BlockValue>,
    y: DVector<f64>,
    z: Vec<BlockValue>,
    iterations: usize,
}

impl<'a> Solver<'a> {
    fn new(scaled: &'a ScaledProblem, original: &SdpProblem, settings: &'a IpmSettings) -> Self {
        let p = &scaled.inner;
        let nb = p.blocks.len();
        let mut by_block: Vec<Vec<(usize, &Coeff)>> = vec![Vec::new(); nb];
        for (i, LinearConstraint { terms, .. }) in p.constraints.iter().enumerate() {
            for (b, c) in terms {
                by_block[*b].push((i, c));
            }
        }
        let lp_coeffs = by_block
            .iter()
            .zip(&p.blocks)
            .map(|(terms, kind)| match kind {
                BlockKind::NonNeg(n) => terms
                    .iter()
                    .map(|(i, c)| {
                        let mut v = DVector::zeros(*n);
                        c.add_to_vec(1.0, &mut v);
                        (*i, v)
                    })
                    .collect(),
                BlockKind::Psd(_) => Vec::new(),
            })
            .collect();
        let b = DVector::from_iterator(p.constraints.len(), p.constraints.iter().map(|c| c.rhs));
        let mut c: Vec<BlockValue> = p.blocks.iter().map(|k| BlockValue::zeros(*k)).collect();
        for (blk, coeff) in &p.objective {
            c[*blk].add_coeff(1.0, coeff);
        }
        let b_norm = original.constraints.iter().map(|c| c.rhs * c.rhs).sum::<f64>().sqrt();
        let c_norm = objective_norm(original);
        let rp_unscale = DVector::from_iterator(b.len(), scaled.row_scale.iter().map(|d| scaled.b_scale / d));
        let nu = p.blocks.iter().map(|k| k.degree() as f64).sum();

        // Starting point in the spirit of SDPT3's infeasible start.
        let mut x = Vec::with_capacity(nb);
        let mut z = Vec::with_capacity(nb);
        for (blk, kind) in p.blocks.iter().enumerate() {
            let n = kind.dim() as f64;
            let mut xi: f64 = 10f64.max(n.sqrt());
            let mut eta: f64 = 10f64.max(n.sqrt()).max(c[blk].norm_sq().sqrt());
            for (i, coeff) in &by_block[blk] {
                let a = coeff.norm_sq(*kind).sqrt();
                xi = xi.max(n * (1.0 + b[*i].abs()) / (1.0 + a));
                eta = eta.max(a);
            }
            x.push(BlockValue::identity(*kind, xi));
            z.push(BlockValue::identity(*kind, eta));
        }
        let y = DVector::zeros(p.constraints.len());
        Self {
            p,
            settings,
            by_block,
            lp_coeffs,
            b,
            c,
            rp_unscale,
            b_scale: scaled.b_scale,
            c_scale: scaled.c_scale,
            b_norm,
            c_norm,
            nu,
            x,
            y,
            z,
            iterations: 0,
        }
    }

    fn apply_a(&self, v: &[BlockValue]) -> DVector<f64> {
        DVector::from_iterator(
            self.p.constraints.len(),
            self.p.constraints.iter().map(|con| con.terms.iter().map(|(b, c)| v[*b].inner(c)).sum::<f64>()),
        )
    }

    fn apply_at(&self, y: &DVector<f64>) -> Vec<BlockValue> {
        let mut out: Vec<BlockValue> = self.p.blocks.iter().map(|k| BlockValue::zeros(*k)).collect();
        for (i, con) in self.p.constraints.iter().enumerate() {
            for (b, c) in &con.terms {
                out[*b].add_coeff(y[i], c);
            }
        }
        out
    }

    fn dot(a: &[BlockValue], b: &[BlockValue]) -> f64 {
        a.iter().zip(b).map(|(u, v)| u.dot(v)).sum()
    }

    fn factorize(&self) -> Option<Vec<Factor>> {
        let mut out = Vec::with_capacity(self.x.len());
        for (xb, zb) in self.x.iter().zip(&self.z) {
            match (xb, zb) {
                (BlockValue::Matrix(x), BlockValue::Matrix(z)) => {
                    let cx = Cholesky::new(x.clone())?;
                    let cz = Cholesky::new(z.clone())?;
                    let zinv = cz.inverse();
                    let xz = x * &zinv;
                    out.push(Factor::Psd { lx: cx.unpack(), lz: cz.unpack(), zinv, xz });
                }
                (BlockValue::Vector(x), BlockValue::Vector(z)) => {
                    if x.iter().chain(z.iter()).any(|v| *v <= 0.0 || !v.is_finite()) {
                        return None;
                    }
                    out.push(Factor::Lp { ratio: x.component_div(z) });
                }
                _ => unreachable!(),
            }
        }
        Some(out)
    }

    /// `X A Z^{-1}` for one coefficient.
    fn x_a_zinv(x: &DMatrix<f64>, a: &Coeff, zinv: &DMatrix<f64>, xz: &DMatrix<f64>) -> DMatrix<f64> {
        let n = x.nrows();
        match a {
            Coeff::Dense(a) => (x * a) * zinv,
            Coeff::Identity(s) => xz * *s,
            Coeff::LowRank(terms) => {
                let mut g = DMatrix::zeros(n, n);
                for (w, u) in terms {
                    let xu = x * u;
                    let zu = zinv * u;
                    g.ger(*w, &xu, &zu, 1.0);
                }
                g
            }
            Coeff::Entries(entries) => {
                let mut g = DMatrix::zeros(n, n);
                for &(i, j, v) in entries {
                    g.ger(v, &x.column(i), &zinv.column(j), 1.0);
                    if i != j {
                        g.ger(v, &x.column(j), &zinv.column(i), 1.0);
                    }
                }
                g
            }
        }
    }

    fn schur_matrix(&self, factors: &[Factor]) -> DMatrix<f64> {
        let m = self.p.constraints.len();
        let mut mat = DMatrix::zeros(m, m);
        for (blk, factor) in factors.iter().enumerate() {
            match factor {
                Factor::Psd { zinv, xz, .. } => {
                    let x = self.x[blk].as_matrix().unwrap();
                    let terms = &self.by_block[blk];
                    for (a, &(i, ai)) in terms.iter().enumerate() {
                        let g = Self::x_a_zinv(x, ai, zinv, xz);
                        for (b, &(j, aj)) in terms.iter().enumerate().skip(a) {
                            let v = aj.inner(&g);
                            mat[(i, j)] += v;
                            if a != b {
                                mat[(j, i)] += v;
                            }
                        }
                    }
                }
                Factor::Lp { ratio } => {
                    let terms = &self.lp_coeffs[blk];
                    for (a, (i, ai)) in terms.iter().enumerate() {
                        let weighted = ai.component_mul(ratio);
                        for (b, (j, aj)) in terms.iter().enumerate().skip(a) {
                            let v = weighted.dot(aj);
                            mat[(*i, *j)] += v;
                            if a != b {
                                mat[(*j, *i)] += v;
                            }
                        }
                    }
                }
            }
        }
        let sym = (&mat + mat.transpose()) * 0.5;
        sym
    }

    fn run(&mut self) -> SolveStatus {
        let start = Instant::now();
        let verbose = self.settings.verbose;
        let mut gamma_prev = 0.9;
        let mut stalls = 0;
        if verbose >= 2 {
            eprintln!(
                "ipm: {} blocks, {} constraints, {} unknowns",
                self.p.blocks.len(),
                self.p.constraints.len(),
                self.p.num_unknowns()
            );
            eprintln!("{:>4} {:>13} {:>13} {:>9} {:>9} {:>9} {:>7} {:>7}", "it", "pobj", "dobj", "pinf", "dinf", "gap", "ap", "ad");
        }
        loop {
            let rp = &self.b - self.apply_a(&self.x);
            let aty = self.apply_at(&self.y);
            let rd: Vec<BlockValue> = self
                .c
                .iter()
                .zip(&aty)
                .zip(&self.z)
                .map(|((c, a), z)| {
                    let mut r = c.clone();
                    r.axpy(-1.0, a);
                    r.axpy(-1.0, z);
                    r
                })
                .collect();
            let pobj = Self::dot(&self.c, &self.x);
            let dobj = self.b.dot(&self.y);
            let xz = Self::dot(&self.x, &self.z);
            let mu = xz / self.nu;
            // Stopping measures in the caller's units.
            let bc = self.b_scale * self.c_scale;
            let rd_norm = rd.iter().map(|r| r.norm_sq()).sum::<f64>().sqrt();
            let pinf = rp.component_mul(&self.rp_unscale).norm() / (1.0 + self.b_norm);
            let dinf = self.c_scale * rd_norm / (1.0 + self.c_norm);
            let denom = 1.0 + bc * (pobj.abs() + dobj.abs());
            let gap = (bc * (pobj - dobj).abs() / denom).max(bc * xz.max(0.0) / denom);

            if pinf <= self.settings.feas_tol && dinf <= self.settings.feas_tol && gap <= self.settings.gap_tol {
                if verbose >= 1 {
                    eprintln!("ipm: optimal after {} iterations, pobj {:.9e}", self.iterations, bc * pobj);
                }
                return SolveStatus::Optimal;
            }
            // Farkas-type certificates on the current iterate.
            if dobj > 0.0 {
                let mut c_minus_rd = self.c.clone();
                for (a, r) in c_minus_rd.iter_mut().zip(&rd) {
                    a.axpy(-1.0, r);
                }
                let measure = c_minus_rd.iter().map(|v| v.norm_sq()).sum::<f64>().sqrt() / dobj;
                if measure < INFEASIBILITY_TOL {
                    return SolveStatus::PrimalInfeasible;
                }
            }
            if pobj < 0.0 {
                let measure = (&self.b - &rp).norm() / (-pobj);
                if measure < INFEASIBILITY_TOL {
                    return SolveStatus::DualInfeasible;
                }
            }
            if self.iterations >= self.settings.max_iter {
                return SolveStatus::MaxIterations;
            }
            if let Some(limit) = self.settings.time_limit {
                if start.elapsed() > limit {
                    return SolveStatus::TimeLimit;
                }
            }

            let Some(factors) = self.factorize() else {
                return SolveStatus::NumericalError;
            };
            let schur = self.schur_matrix(&factors);
            let Some(schur_solver) = SchurSolver::new(schur) else {
                return SolveStatus::NumericalError;
            };

            // X Rd Z^{-1} is shared by predictor and corrector.
            let x_rd_zinv: Vec<BlockValue> = factors
                .iter()
                .zip(&rd)
                .zip(&self.x)
                .map(|((f, r), x)| match (f, r, x) {
                    (Factor::Psd { zinv, .. }, BlockValue::Matrix(r), BlockValue::Matrix(x)) => {
                        BlockValue::Matrix((x * r) * zinv)
                    }
                    (Factor::Lp { ratio }, BlockValue::Vector(r), _) => BlockValue::Vector(r.component_mul(ratio)),
                    _ => unreachable!(),
                })
                .collect();

            // Predictor.
            let h_pred: Vec<BlockValue> = self.x.iter().map(|x| x.scaled(-1.0)).collect();
            let pred = self.direction(&factors, &schur_solver, &rp, &rd, &x_rd_zinv, h_pred);
            let ap = self.max_step_primal(&factors, &pred.dx).min(1.0);
            let ad = self.max_step_dual(&factors, &pred.dz).min(1.0);
            let mut xs = self.x.clone();
            let mut zs = self.z.clone();
            for (v, d) in xs.iter_mut().zip(&pred.dx) {
                v.axpy(ap, d);
            }
            for (v, d) in zs.iter_mut().zip(&pred.dz) {
                v.axpy(ad, d);
            }
            let mu_aff = Self::dot(&xs, &zs) / self.nu;
            let expon = if mu > 1e-6 { (3.0 * ap.min(ad).powi(2)).max(1.0) } else { 1.0 };
            let sigma = (mu_aff / mu).max(0.0).powf(expon).min(1.0);

            // Corrector.
            let sigma_mu = sigma * mu;
            let h_corr: Vec<BlockValue> = (0..factors.len())
                .map(|blk| match (&factors[blk], &self.x[blk], &self.z[blk], &pred.dx[blk], &pred.dz[blk]) {
                    (
                        Factor::Psd { zinv, .. },
                        BlockValue::Matrix(x),
                        _,
                        BlockValue::Matrix(dx),
                        BlockValue::Matrix(dz),
                    ) => {
                        let second = (dx * dz) * zinv;
                        let mut h = zinv * sigma_mu - x;
                        h -= (&second + second.transpose()) * 0.5;
                        BlockValue::Matrix(h)
                    }
                    (
                        Factor::Lp { .. },
                        BlockValue::Vector(x),
                        BlockValue::Vector(z),
                        BlockValue::Vector(dx),
                        BlockValue::Vector(dz),
                    ) => BlockValue::Vector(DVector::from_fn(x.len(), |i, _| {
                        (sigma_mu - dx[i] * dz[i]) / z[i] - x[i]
                    })),
                    _ => unreachable!(),
                })
                .collect();
            let corr = self.direction(&factors, &schur_solver, &rp, &rd, &x_rd_zinv, h_corr);

            let gamma = gamma_prev;
            let ap = (gamma * self.max_step_primal(&factors, &corr.dx)).min(1.0);
            let ad = (gamma * self.max_step_dual(&factors, &corr.dz)).min(1.0);
            for (v, d) in self.x.iter_mut().zip(&corr.dx) {
                v.axpy(ap, d);
            }
            for (v, d) in self.z.iter_mut().zip(&corr.dz) {
                v.axpy(ad, d);
            }
            self.y.axpy(ad, &corr.dy, 1.0);
            gamma_prev = 0.9 + 0.09 * ap.min(ad);
            self.iterations += 1;

            if verbose >= 2 {
                eprintln!(
                    "{:>4} {:>13.6e} {:>13.6e} {:>9.2e} {:>9.2e} {:>9.2e} {:>7.4} {:>7.4}",
                    self.iterations,
                    bc * pobj,
                    bc * dobj,
                    pinf,
                    dinf,
                    gap,
                    ap,
                    ad
                );
            }
            if ap < STALL_STEP && ad < STALL_STEP {
                stalls += 1;
                if stalls >= 3 {
                    return SolveStatus::NumericalError;
                }
            } else {
                stalls = 0;
            }
        }
    }

    /// Solves the HKM Newton system for a given `H = sigma mu Z^{-1} - X - corr`.
    fn direction(
        &self,
        factors: &[Factor],
        schur: &SchurSolver,
        rp: &DVector<f64>,
        rd: &[BlockValue],
        x_rd_zinv: &[BlockValue],
        h: Vec<BlockValue>,
    ) -> Direction {
        let mut t = x_rd_zinv.to_vec();
        for (tb, hb) in t.iter_mut().zip(&h) {
            tb.axpy(-1.0, hb);
        }
        let rhs = rp + self.apply_a(&t);
        let dy = schur.solve(&rhs);
        let aty = self.apply_at(&dy);
        let dz: Vec<BlockValue> = rd
            .iter()
            .zip(&aty)
            .map(|(r, a)| {
                let mut d = r.clone();
                d.axpy(-1.0, a);
                d
            })
            .collect();
        let dx: Vec<BlockValue> = factors
            .iter()
            .zip(&self.x)
            .zip(dz.iter().zip(h))
            .map(|((f, x), (dzb, hb))| match (f, x, dzb, hb) {
                (Factor::Psd { zinv, .. }, BlockValue::Matrix(x), BlockValue::Matrix(dzm), BlockValue::Matrix(hm)) => {
                    let g = (x * dzm) * zinv;
                    let mut d = hm;
                    d -= (&g + g.transpose()) * 0.5;
                    d = (&d + d.transpose()) * 0.5;
                    BlockValue::Matrix(d)
                }
                (Factor::Lp { ratio }, _, BlockValue::Vector(dzv), BlockValue::Vector(hv)) => {
                    BlockValue::Vector(hv - ratio.component_mul(dzv))
                }
                _ => unreachable!(),
            })
            .collect();
        Direction { dx, dy, dz }
    }

    fn max_step_primal(&self, factors: &[Factor], dx: &[BlockValue]) -> f64 {
        factors
            .iter()
            .zip(dx)
            .zip(&self.x)
            .map(|((f, d), x)| match (f, d, x) {
                (Factor::Psd { lx, .. }, BlockValue::Matrix(d), _) => max_step_psd(lx, d),
                (Factor::Lp { .. }, BlockValue::Vector(d), BlockValue::Vector(x)) => max_step_lp(x, d),
                _ => unreachable!(),
            })
            .fold(f64::INFINITY, f64::min)
    }

    fn max_step_dual(&self, factors: &[Factor], dz: &[BlockValue]) -> f64 {
        factors
            .iter()
            .zip(dz)
            .zip(&self.z)
            .map(|((f, d), z)| match (f, d, z) {
                (Factor::Psd { lz, .. }, BlockValue::Matrix(d), _) => max_step_psd(lz, d),
                (Factor::Lp { .. }, BlockValue::Vector(d), BlockValue::Vector(z)) => max_step_lp(z, d),
                _ => unreachable!(),
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Largest `a` with `L L' + a D >= 0`, via the extreme eigenvalue of `L^-1 D L^-T`.
fn max_step_psd(l: &DMatrix<f64>, d: &DMatrix<f64>) -> f64 {
    let Some(y) = l.solve_lower_triangular(d) else {
        return 0.0;
    };
    let Some(m) = l.solve_lower_triangular(&y.transpose()) else {
        return 0.0;
    };
    let m = (&m + m.transpose()) * 0.5;
    let lmin = m.symmetric_eigenvalues().min();
    if !lmin.is_finite() {
        0.0
    } else if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}

fn max_step_lp(x: &DVector<f64>, d: &DVector<f64>) -> f64 {
    x.iter()
        .zip(d.iter())
        .filter(|(_, dv)| **dv < 0.0)
        .map(|(xv, dv)| -xv / dv)
        .fold(f64::INFINITY, f64::min)
}

/// Factorization of the Schur complement matrix with a regularized
/// Cholesky first and LU as the fallback.
enum SchurSolver {
    Chol(Cholesky<f64, Dyn>),
    Lu(nalgebra::LU<f64, Dyn, Dyn>),
}

impl SchurSolver {
    fn new(m: DMatrix<f64>) -> Option<Self> {
        if m.iter().any(|v| !v.is_finite()) {
            return None;
        }
        if let Some(c) = Cholesky::new(m.clone()) {
            return Some(SchurSolver::Chol(c));
        }
        let max_diag = m.diagonal().iter().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
        let mut shift = 1e-14 * max_diag;
        for _ in 0..4 {
            let mut reg = m.clone();
            for i in 0..reg.nrows() {
                reg[(i, i)] += shift;
            }
            if let Some(c) = Cholesky::new(reg) {
                return Some(SchurSolver::Chol(c));
            }
            shift *= 100.0;
        }
        let lu = m.lu();
        if lu.is_invertible() {
            Some(SchurSolver::Lu(lu))
        } else {
            None
        }
    }

    fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        match self {
            SchurSolver::Chol(c) => c.solve(rhs),
            SchurSolver::Lu(lu) => lu.solve(rhs).unwrap_or_else(|| DVector::zeros(rhs.len())),
        }
    }
}

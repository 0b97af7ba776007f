use nalgebra::{DMatrix, DVector};

use crate::ConicError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    /// Symmetric positive semidefinite `n x n` block.
    Psd(usize),
    /// Elementwise nonnegative vector of length `n`.
    NonNeg(usize),
}

impl BlockKind {
    pub fn dim(&self) -> usize {
        match *self {
            BlockKind::Psd(n) | BlockKind::NonNeg(n) => n,
        }
    }

    /// Contribution to the barrier parameter (matrix order or vector length).
    pub(crate) fn degree(&self) -> usize {
        self.dim()
    }
}

/// Symmetric coefficient matrix of a linear functional restricted to one block.
///
/// On nonnegative blocks only [`Coeff::Entries`] with `i == j` and
/// [`Coeff::Identity`] are meaningful; they act as a coefficient vector.
#[derive(Debug, Clone)]
pub enum Coeff {
    Dense(DMatrix<f64>),
    /// `sum_k w_k u_k u_k'`.
    LowRank(Vec<(f64, DVector<f64>)>),
    /// Symmetric entries: `(i, j, v)` with `i != j` sets both `(i,j)` and `(j,i)` to `v`.
    Entries(Vec<(usize, usize, f64)>),
    /// `s * I`.
    Identity(f64),
}

impl Coeff {
    /// `<A, Y>` for a square matrix `Y` (only the symmetric part of `Y` matters).
    pub fn inner(&self, y: &DMatrix<f64>) -> f64 {
        match self {
            Coeff::Dense(a) => a.dot(y),
            Coeff::LowRank(terms) => terms.iter().map(|(w, u)| w * u.dot(&(y * u))).sum(),
            Coeff::Entries(entries) => entries
                .iter()
                .map(|&(i, j, v)| if i == j { v * y[(i, i)] } else { v * (y[(i, j)] + y[(j, i)]) })
                .sum(),
            Coeff::Identity(s) => s * y.trace(),
        }
    }

    pub fn inner_vec(&self, y: &DVector<f64>) -> f64 {
        match self {
            Coeff::Entries(entries) => entries.iter().map(|&(i, _, v)| v * y[i]).sum(),
            Coeff::Identity(s) => s * y.sum(),
            Coeff::Dense(a) => a.diagonal().dot(y),
            Coeff::LowRank(terms) => terms.iter().map(|(w, u)| w * u.component_mul(u).dot(y)).sum(),
        }
    }

    /// `target += alpha * A`.
    pub fn add_to(&self, alpha: f64, target: &mut DMatrix<f64>) {
        match self {
            Coeff::Dense(a) => target.zip_apply(a, |t, v| *t += alpha * v),
            Coeff::LowRank(terms) => {
                for (w, u) in terms {
                    target.ger(alpha * w, u, u, 1.0);
                }
            }
            Coeff::Entries(entries) => {
                for &(i, j, v) in entries {
                    target[(i, j)] += alpha * v;
                    if i != j {
                        target[(j, i)] += alpha * v;
                    }
                }
            }
            Coeff::Identity(s) => {
                for i in 0..target.nrows() {
                    target[(i, i)] += alpha * s;
                }
            }
        }
    }

    pub fn add_to_vec(&self, alpha: f64, target: &mut DVector<f64>) {
        match self {
            Coeff::Entries(entries) => {
                for &(i, _, v) in entries {
                    target[i] += alpha * v;
                }
            }
            Coeff::Identity(s) => target.add_scalar_mut(alpha * s),
            Coeff::Dense(a) => target.axpy(alpha, &a.diagonal(), 1.0),
            Coeff::LowRank(terms) => {
                for (w, u) in terms {
                    target.axpy(alpha * w, &u.component_mul(u), 1.0);
                }
            }
        }
    }

    pub fn scale(&mut self, s: f64) {
        match self {
            Coeff::Dense(a) => *a *= s,
            Coeff::LowRank(terms) => terms.iter_mut().for_each(|(w, _)| *w *= s),
            Coeff::Entries(entries) => entries.iter_mut().for_each(|(_, _, v)| *v *= s),
            Coeff::Identity(v) => *v *= s,
        }
    }

    /// Squared Frobenius norm as a matrix of order `n`.
    pub(crate) fn norm_sq(&self, kind: BlockKind) -> f64 {
        let n = kind.dim();
        match (self, kind) {
            (Coeff::Identity(s), _) => s * s * n as f64,
            (Coeff::Entries(entries), BlockKind::NonNeg(_)) => {
                entries.iter().map(|&(_, _, v)| v * v).sum()
            }
            (Coeff::Dense(a), BlockKind::NonNeg(_)) => a.diagonal().norm_squared(),
            (Coeff::Dense(a), BlockKind::Psd(_)) => a.norm_squared(),
            _ => {
                let mut m = DMatrix::zeros(n, n);
                self.add_to(1.0, &mut m);
                if matches!(kind, BlockKind::NonNeg(_)) {
                    m.diagonal().norm_squared()
                } else {
                    m.norm_squared()
                }
            }
        }
    }

    fn validate(&self, block: usize, kind: BlockKind) -> Result<(), ConicError> {
        let n = kind.dim();
        let shape_err = |got: String| ConicError::ShapeMismatch { block, got, expected: format!("order {n}") };
        match (self, kind) {
            (Coeff::Dense(a), BlockKind::Psd(_)) => {
                if a.nrows() != n || a.ncols() != n {
                    return Err(shape_err(format!("{}x{}", a.nrows(), a.ncols())));
                }
                if a.iter().any(|v| !v.is_finite()) {
                    return Err(ConicError::NonFinite("dense coefficient"));
                }
            }
            (Coeff::Dense(_), BlockKind::NonNeg(_)) => return Err(ConicError::UnsupportedCoeff("dense")),
            (Coeff::LowRank(_), BlockKind::NonNeg(_)) => return Err(ConicError::UnsupportedCoeff("low-rank")),
            (Coeff::LowRank(terms), BlockKind::Psd(_)) => {
                for (w, u) in terms {
                    if u.len() != n {
                        return Err(shape_err(format!("vector of length {}", u.len())));
                    }
                    if !w.is_finite() || u.iter().any(|v| !v.is_finite()) {
                        return Err(ConicError::NonFinite("low-rank coefficient"));
                    }
                }
            }
            (Coeff::Entries(entries), _) => {
                for &(i, j, v) in entries {
                    if i >= n || j >= n {
                        return Err(shape_err(format!("entry ({i},{j})")));
                    }
                    if matches!(kind, BlockKind::NonNeg(_)) && i != j {
                        return Err(ConicError::UnsupportedCoeff("off-diagonal entry"));
                    }
                    if !v.is_finite() {
                        return Err(ConicError::NonFinite("entry coefficient"));
                    }
                }
            }
            (Coeff::Identity(s), _) => {
                if !s.is_finite() {
                    return Err(ConicError::NonFinite("identity coefficient"));
                }
            }
        }
        Ok(())
    }
}

/// `sum_terms <A_j, X_j> = rhs`.
#[derive(Debug, Clone)]
pub struct LinearConstraint {
    pub terms: Vec<(usize, Coeff)>,
    pub rhs: f64,
}

#[derive(Debug, Clone, Default)]
pub struct SdpProblem {
    pub(crate) blocks: Vec<BlockKind>,
    pub(crate) objective: Vec<(usize, Coeff)>,
    pub(crate) constraints: Vec<LinearConstraint>,
}

impl SdpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_block(&mut self, kind: BlockKind) -> usize {
        self.blocks.push(kind);
        self.blocks.len() - 1
    }

    pub fn add_objective(&mut self, block: usize, coeff: Coeff) {
        self.objective.push((block, coeff));
    }

    pub fn add_constraint(&mut self, terms: Vec<(usize, Coeff)>, rhs: f64) -> usize {
        self.constraints.push(LinearConstraint { terms, rhs });
        self.constraints.len() - 1
    }

    pub fn blocks(&self) -> &[BlockKind] {
        &self.blocks
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Number of scalar unknowns in the symmetric primal variable.
    pub fn num_unknowns(&self) -> usize {
        self.blocks
            .iter()
            .map(|b| match *b {
                BlockKind::Psd(n) => n * (n + 1) / 2,
                BlockKind::NonNeg(n) => n,
            })
            .sum()
    }

    pub fn validate(&self) -> Result<(), ConicError> {
        if self.blocks.is_empty() {
            return Err(ConicError::Empty);
        }
        let check = |block: usize, coeff: &Coeff| -> Result<(), ConicError> {
            let kind = *self
                .blocks
                .get(block)
                .ok_or(ConicError::UnknownBlock { block, count: self.blocks.len() })?;
            coeff.validate(block, kind)
        };
        for (b, c) in &self.objective {
            check(*b, c)?;
        }
        for con in &self.constraints {
            if !con.rhs.is_finite() {
                return Err(ConicError::NonFinite("constraint right-hand side"));
            }
            for (b, c) in &con.terms {
                check(*b, c)?;
            }
        }
        Ok(())
    }

    /// `<C, X>` for a primal point.
    pub fn objective_value(&self, x: &[BlockValue]) -> f64 {
        self.objective.iter().map(|(b, c)| x[*b].inner(c)).sum()
    }

    /// `b - A(X)`.
    pub fn primal_residual(&self, x: &[BlockValue]) -> DVector<f64> {
        DVector::from_iterator(
            self.constraints.len(),
            self.constraints
                .iter()
                .map(|con| con.rhs - con.terms.iter().map(|(b, c)| x[*b].inner(c)).sum::<f64>()),
        )
    }

    /// `C - A'y` as block values.
    pub fn dual_slack(&self, y: &DVector<f64>) -> Vec<BlockValue> {
        let mut out: Vec<BlockValue> = self.blocks.iter().map(|k| BlockValue::zeros(*k)).collect();
        for (b, c) in &self.objective {
            out[*b].add_coeff(1.0, c);
        }
        for (i, con) in self.constraints.iter().enumerate() {
            for (b, c) in &con.terms {
                out[*b].add_coeff(-y[i], c);
            }
        }
        out
    }
}

/// Value of one block of a primal or dual variable.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockValue {
    Matrix(DMatrix<f64>),
    Vector(DVector<f64>),
}

impl BlockValue {
    pub fn zeros(kind: BlockKind) -> Self {
        match kind {
            BlockKind::Psd(n) => BlockValue::Matrix(DMatrix::zeros(n, n)),
            BlockKind::NonNeg(n) => BlockValue::Vector(DVector::zeros(n)),
        }
    }

    pub fn identity(kind: BlockKind, scale: f64) -> Self {
        match kind {
            BlockKind::Psd(n) => BlockValue::Matrix(DMatrix::identity(n, n) * scale),
            BlockKind::NonNeg(n) => BlockValue::Vector(DVector::from_element(n, scale)),
        }
    }

    pub fn as_matrix(&self) -> Option<&DMatrix<f64>> {
        match self {
            BlockValue::Matrix(m) => Some(m),
            BlockValue::Vector(_) => None,
        }
    }

    pub fn as_vector(&self) -> Option<&DVector<f64>> {
        match self {
            BlockValue::Vector(v) => Some(v),
            BlockValue::Matrix(_) => None,
        }
    }

    pub fn inner(&self, coeff: &Coeff) -> f64 {
        match self {
            BlockValue::Matrix(m) => coeff.inner(m),
            BlockValue::Vector(v) => coeff.inner_vec(v),
        }
    }

    pub(crate) fn add_coeff(&mut self, alpha: f64, coeff: &Coeff) {
        match self {
            BlockValue::Matrix(m) => coeff.add_to(alpha, m),
            BlockValue::Vector(v) => coeff.add_to_vec(alpha, v),
        }
    }

    pub(crate) fn dot(&self, other: &BlockValue) -> f64 {
        match (self, other) {
            (BlockValue::Matrix(a), BlockValue::Matrix(b)) => a.dot(b),
            (BlockValue::Vector(a), BlockValue::Vector(b)) => a.dot(b),
            _ => panic!("block kind mismatch"),
        }
    }

    pub(crate) fn norm_sq(&self) -> f64 {
        match self {
            BlockValue::Matrix(m) => m.norm_squared(),
            BlockValue::Vector(v) => v.norm_squared(),
        }
    }

    /// `self += alpha * other`.
    pub(crate) fn axpy(&mut self, alpha: f64, other: &BlockValue) {
        match (self, other) {
            (BlockValue::Matrix(a), BlockValue::Matrix(b)) => a.zip_apply(b, |t, v| *t += alpha * v),
            (BlockValue::Vector(a), BlockValue::Vector(b)) => a.axpy(alpha, b, 1.0),
            _ => panic!("block kind mismatch"),
        }
    }

    pub(crate) fn scaled(&self, s: f64) -> BlockValue {
        match self {
            BlockValue::Matrix(m) => BlockValue::Matrix(m * s),
            BlockValue::Vector(v) => BlockValue::Vector(v * s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    MaxIterations,
    TimeLimit,
    NumericalError,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::PrimalInfeasible => "primal-infeasible",
            SolveStatus::DualInfeasible => "dual-infeasible",
            SolveStatus::MaxIterations => "max-iterations",
            SolveStatus::TimeLimit => "time-limit",
            SolveStatus::NumericalError => "numerical-error",
        }
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Primal/dual pair returned by a backend. Residuals are measured on the
/// caller's (unscaled) data.
#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SolveStatus,
    pub x: Vec<BlockValue>,
    pub y: DVector<f64>,
    pub z: Vec<BlockValue>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// `||b - A(X)|| / (1 + ||b||)`.
    pub primal_residual: f64,
    /// `||C - A'y - Z||_F / (1 + ||C||_F)`.
    pub dual_residual: f64,
    /// `|pobj - dobj| / (1 + |pobj| + |dobj|)`.
    pub relative_gap: f64,
    pub iterations: usize,
}

//! Derivative operators, the Fisher information of the target parameters and
//! its scalar bound.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{steering_with_jacobian, ArrayGeometry, EtPointCloud};
use crate::scalar::Real;

/// Condition number beyond which the FIM is declared singular.
pub const MAX_FIM_CONDITION: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensingConfig<T> {
    pub snapshots: usize,
    /// Sensing noise power (W).
    pub noise_power: T,
}

impl<T: Real> SensingConfig<T> {
    pub fn new(snapshots: usize, noise_power: T) -> Result<Self> {
        if snapshots == 0 {
            return Err(Error::InvalidParameter("need at least one snapshot".into()));
        }
        if !(noise_power > T::zero()) || !noise_power.is_finite() {
            return Err(Error::InvalidParameter("sensing noise power must be positive".into()));
        }
        Ok(Self { snapshots, noise_power })
    }

    /// `2 T / sigma_s^2`.
    pub fn scale(&self) -> T {
        T::lit(2.0 * self.snapshots as f64) / self.noise_power
    }
}

/// Per-point steering vectors and parameter derivatives `A_m = G_m D_m`.
#[derive(Clone, Debug)]
pub struct EtResponses<T: Real> {
    steering: DMatrix<Complex<T>>,
    derivs: Vec<DMatrix<Complex<T>>>,
    profile: Vec<Complex<T>>,
}

impl<T: Real> EtResponses<T> {
    pub fn build(cloud: &EtPointCloud<T>, array: &ArrayGeometry<T>) -> Result<Self> {
        let n = array.num_elements();
        let mut steering = DMatrix::zeros(n, cloud.len());
        let mut derivs = Vec::with_capacity(cloud.len());
        for (m, (p, d)) in cloud.positions().iter().zip(cloud.jacobians()).enumerate() {
            let (a, g) = steering_with_jacobian(array, p)?;
            steering.set_column(m, &a);
            derivs.push(g * d.map(|v| Complex::new(v, T::zero())));
        }
        Ok(Self { steering, derivs, profile: cloud.profile().to_vec() })
    }

    pub fn num_points(&self) -> usize {
        self.derivs.len()
    }

    pub fn num_elements(&self) -> usize {
        self.steering.nrows()
    }

    pub fn param_dim(&self) -> usize {
        self.derivs[0].ncols()
    }

    /// Steering vectors as columns (N x M).
    pub fn steering(&self) -> &DMatrix<Complex<T>> {
        &self.steering
    }

    /// Parameter derivative of point `m` (N x D).
    pub fn deriv(&self, m: usize) -> &DMatrix<Complex<T>> {
        &self.derivs[m]
    }

    pub fn profile(&self) -> &[Complex<T>] {
        &self.profile
    }
}

/// Packed symmetric grid of Hermitian matrices `Q_pq`, `p <= q`.
#[derive(Clone, Debug, PartialEq)]
pub struct QGrid<T: Real> {
    dim: usize,
    n: usize,
    blocks: Vec<DMatrix<Complex<T>>>,
}

fn packed(dim: usize, p: usize, q: usize) -> usize {
    let (p, q) = if p <= q { (p, q) } else { (q, p) };
    // Rows before p hold dim, dim - 1, .. entries.
    p * dim + q - p * (p + 1) / 2
}

impl<T: Real> QGrid<T> {
    fn from_derivatives(f: &[DMatrix<Complex<T>>]) -> Self {
        let dim = f.len();
        let n = f[0].nrows();
        let mut blocks = Vec::with_capacity(dim * (dim + 1) / 2);
        let half = Complex::new(T::lit(0.5), T::zero());
        for p in 0..dim {
            let fp_h = f[p].adjoint();
            for q in p..dim {
                let a = &fp_h * &f[q];
                let q_pq = (&a + a.adjoint()) * half;
                blocks.push(q_pq);
            }
        }
        Self { dim, n, blocks }
    }

    pub fn param_dim(&self) -> usize {
        self.dim
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, p: usize, q: usize) -> &DMatrix<Complex<T>> {
        &self.blocks[packed(self.dim, p, q)]
    }

    /// Largest Frobenius norm over the grid.
    pub fn max_norm(&self) -> T {
        self.blocks.iter().map(|b| b.norm()).fold(T::zero(), |a, b| a.max(b))
    }

    /// Applies `f` to every block.
    pub fn map(&self, f: impl Fn(&DMatrix<Complex<T>>) -> DMatrix<Complex<T>>) -> Self {
        let blocks: Vec<_> = self.blocks.iter().map(f).collect();
        let n = blocks[0].nrows();
        Self { dim: self.dim, n, blocks }
    }

    /// Real linear recombination `Q'_pq = sum_ab t_pa t_qb Q_ab`.
    pub fn congruence(&self, t: &DMatrix<T>) -> Self {
        let dim = self.dim;
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for p in 0..dim {
            for q in p..dim {
                let mut acc = DMatrix::zeros(self.n, self.n);
                for a in 0..dim {
                    for b in 0..dim {
                        let w = t[(p, a)] * t[(q, b)];
                        if w != T::zero() {
                            acc += self.get(a, b) * Complex::new(w, T::zero());
                        }
                    }
                }
                blocks.push(acc);
            }
        }
        Self { dim, n: self.n, blocks }
    }

    /// `J_pq = (2T / sigma_s^2) Re tr(Q_pq R)`, after checking that `R` is
    /// Hermitian positive semidefinite.
    pub fn fim(&self, r: &DMatrix<Complex<T>>, cfg: &SensingConfig<T>) -> Result<DMatrix<T>> {
        check_covariance(r, self.n)?;
        Ok(self.fim_unchecked(r, cfg))
    }

    pub fn fim_unchecked(&self, r: &DMatrix<Complex<T>>, cfg: &SensingConfig<T>) -> DMatrix<T> {
        let mut j = DMatrix::zeros(self.dim, self.dim);
        let s = cfg.scale();
        for p in 0..self.dim {
            for q in p..self.dim {
                let v = trace_product(self.get(p, q), r).re * s;
                j[(p, q)] = v;
                j[(q, p)] = v;
            }
        }
        j
    }
}

fn check_tol<T: Real>() -> T {
    T::lit(1e-9).max(T::default_epsilon() * T::lit(1e4))
}

/// Rejects non-Hermitian or indefinite covariance inputs.
pub fn check_covariance<T: Real>(r: &DMatrix<Complex<T>>, n: usize) -> Result<()> {
    if r.nrows() != n || r.ncols() != n {
        return Err(Error::DimensionMismatch { context: "covariance", got: r.nrows(), expected: n });
    }
    if r.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::NonFinite("covariance"));
    }
    let scale = T::one().max(r.norm());
    let asym = (r - r.adjoint()).norm() / scale;
    let tol = check_tol::<T>();
    if asym > tol {
        return Err(Error::NotHermitian(asym.to_f64_lossy()));
    }
    let herm = (r + r.adjoint()) * Complex::new(T::lit(0.5), T::zero());
    let min_eig = herm.symmetric_eigenvalues().min();
    if min_eig < -tol * scale {
        return Err(Error::NotPsd(min_eig.to_f64_lossy()));
    }
    Ok(())
}

/// `tr(A B)` without forming the product.
pub fn trace_product<T: Real>(a: &DMatrix<Complex<T>>, b: &DMatrix<Complex<T>>) -> Complex<T> {
    let n = a.nrows();
    let mut acc = Complex::new(T::zero(), T::zero());
    for i in 0..n {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Derivative operators `F_p` and the Hermitian grid `Q_pq`.
#[derive(Clone, Debug)]
pub struct FisherOperators<T: Real> {
    f: Vec<DMatrix<Complex<T>>>,
    q: QGrid<T>,
}

impl<T: Real> FisherOperators<T> {
    /// `F_p = sum_m beta_m (a_m [A_m]_p^H + [A_m]_p a_m^H)`.
    pub fn build(resp: &EtResponses<T>) -> Self {
        let n = resp.num_elements();
        let dim = resp.param_dim();
        let mut f = vec![DMatrix::zeros(n, n); dim];
        for m in 0..resp.num_points() {
            let a = resp.steering.column(m);
            let beta = resp.profile[m];
            for (p, fp) in f.iter_mut().enumerate() {
                let d = resp.derivs[m].column(p);
                let t = &a * d.adjoint() + d * a.adjoint();
                *fp += t * beta;
            }
        }
        Self::from_derivatives(f).expect("responses have consistent shapes")
    }

    pub fn from_derivatives(f: Vec<DMatrix<Complex<T>>>) -> Result<Self> {
        if f.is_empty() {
            return Err(Error::InvalidParameter("no derivative operators".into()));
        }
        let n = f[0].nrows();
        if let Some(bad) = f.iter().find(|m| m.nrows() != n || m.ncols() != n) {
            return Err(Error::DimensionMismatch { context: "derivative operator", got: bad.nrows(), expected: n });
        }
        let q = QGrid::from_derivatives(&f);
        Ok(Self { f, q })
    }

    pub fn from_cloud(cloud: &EtPointCloud<T>, array: &ArrayGeometry<T>) -> Result<Self> {
        Ok(Self::build(&EtResponses::build(cloud, array)?))
    }

    pub fn param_dim(&self) -> usize {
        self.f.len()
    }

    pub fn num_elements(&self) -> usize {
        self.q.n
    }

    pub fn f(&self, p: usize) -> &DMatrix<Complex<T>> {
        &self.f[p]
    }

    pub fn q(&self) -> &QGrid<T> {
        &self.q
    }

    pub fn fim(&self, r: &DMatrix<Complex<T>>, cfg: &SensingConfig<T>) -> Result<DMatrix<T>> {
        self.q.fim(r, cfg)
    }

    /// Test hook: negates `F_p` and rebuilds the grid, emulating an
    /// assembly bug that validation must catch.
    #[doc(hidden)]
    pub fn inject_sign_flip(&mut self, p: usize) {
        self.f[p] = -&self.f[p];
        self.q = QGrid::from_derivatives(&self.f);
    }
}

/// `tr(J^-1)` together with the full inverse.
#[derive(Clone, Debug, PartialEq)]
pub struct Crb<T: Real> {
    pub value: T,
    pub covariance: DMatrix<T>,
}

impl<T: Real> Crb<T> {
    /// Per-parameter bounds (diagonal of the inverse).
    pub fn variances(&self) -> DVector<T> {
        self.covariance.diagonal()
    }
}

/// Inverts a symmetric FIM, refusing singular or badly conditioned input.
pub fn crb<T: Real>(j: &DMatrix<T>) -> Result<Crb<T>> {
    if j.nrows() != j.ncols() || j.nrows() == 0 {
        return Err(Error::DimensionMismatch { context: "FIM", got: j.ncols(), expected: j.nrows() });
    }
    if j.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("FIM"));
    }
    // Power-of-two scaling is exact, so J and 2^k J give bitwise-related
    // inverses (doubling T halves the CRB exactly).
    let peak = j.diagonal().iter().fold(0.0f64, |m, v| m.max(v.to_f64_lossy().abs()));
    let scale = if peak > 0.0 && peak.is_finite() { 2f64.powi(-(peak.log2().floor() as i32)) } else { 1.0 };
    let scale = T::lit(scale);
    let sym = (j + j.transpose()) * (T::lit(0.5) * scale);
    let eig = sym.clone().symmetric_eigenvalues();
    let (lo, hi) = (eig.min(), eig.max());
    let condition = if lo > T::zero() { hi / lo } else { T::max_value().unwrap_or(T::one() / T::default_epsilon()) };
    if !(lo > T::zero()) || condition > T::lit(MAX_FIM_CONDITION) {
        return Err(Error::SingularFim { min_eigenvalue: (lo / scale).to_f64_lossy(), condition: condition.to_f64_lossy() });
    }
    let chol = sym.cholesky().ok_or(Error::SingularFim {
        min_eigenvalue: (lo / scale).to_f64_lossy(),
        condition: condition.to_f64_lossy(),
    })?;
    let inv = chol.inverse();
    let covariance = (&inv + inv.transpose()) * (T::lit(0.5) * scale);
    Ok(Crb { value: covariance.trace(), covariance })
}

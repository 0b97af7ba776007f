//! Target-aware reduced subspace and the maps between ambient and reduced
//! coordinates.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::fisher::{EtResponses, QGrid};
use crate::scalar::Real;

pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Orthonormal basis `U` (N x r) of the span of user channels, target
/// steering vectors and target derivative directions.
#[derive(Clone, Debug)]
pub struct SubspaceBasis<T: Real> {
    u: DMatrix<Complex<T>>,
    rank_tolerance: T,
    generator_count: usize,
    singular_values: Vec<T>,
}

/// One row of the generator spectrum dump.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct SpectrumEntry<T> {
    pub index: usize,
    pub sigma: T,
    pub kept: bool,
}

impl<T: Real> SubspaceBasis<T> {
    /// Builds the basis from arbitrary generator columns. Columns are
    /// normalized first and exactly-zero columns are dropped, so the
    /// threshold `tol * sigma_max` is scale free.
    pub fn from_generators(generators: &[DVector<Complex<T>>], tol: T) -> Result<Self> {
        if !(tol >= T::zero()) || !tol.is_finite() {
            return Err(Error::InvalidParameter("rank tolerance must be nonnegative".into()));
        }
        let n = match generators.first() {
            Some(g) => g.len(),
            None => return Err(Error::EmptyGenerators),
        };
        if let Some(g) = generators.iter().find(|g| g.len() != n) {
            return Err(Error::DimensionMismatch { context: "subspace generator", got: g.len(), expected: n });
        }
        let cols: Vec<_> = generators
            .iter()
            .filter_map(|g| {
                let norm = g.norm();
                (norm > T::zero() && norm.is_finite()).then(|| g / Complex::new(norm, T::zero()))
            })
            .collect();
        if cols.is_empty() {
            return Err(Error::EmptyGenerators);
        }
        let stack = DMatrix::from_columns(&cols);
        let svd = stack.svd(true, false);
        let u_full = svd.u.expect("left singular vectors requested");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].partial_cmp(&svd.singular_values[a]).expect("finite sigma"));
        let singular_values: Vec<T> = order.iter().map(|&i| svd.singular_values[i]).collect();
        let smax = singular_values[0];
        let kept: Vec<_> = order
            .iter()
            .zip(&singular_values)
            .filter(|(_, &s)| s > tol * smax)
            .map(|(&i, _)| u_full.column(i).into_owned())
            .collect();
        Ok(Self { u: DMatrix::from_columns(&kept), rank_tolerance: tol, generator_count: generators.len(), singular_values })
    }

    /// Stacks `[h_1..h_K | a_1..a_M | all derivative columns]`.
    pub fn build(channels: &[DVector<Complex<T>>], resp: &EtResponses<T>, tol: T) -> Result<Self> {
        let n = resp.num_elements();
        if let Some(h) = channels.iter().find(|h| h.len() != n) {
            return Err(Error::DimensionMismatch { context: "user channel", got: h.len(), expected: n });
        }
        let mut gens: Vec<DVector<Complex<T>>> = channels.to_vec();
        gens.extend(resp.steering().column_iter().map(|c| c.into_owned()));
        for m in 0..resp.num_points() {
            gens.extend(resp.deriv(m).column_iter().map(|c| c.into_owned()));
        }
        Self::from_generators(&gens, tol)
    }

    /// The identity basis (no reduction).
    pub fn identity(n: usize) -> Self {
        Self {
            u: DMatrix::identity(n, n),
            rank_tolerance: T::zero(),
            generator_count: n,
            singular_values: vec![T::one(); n],
        }
    }

    pub fn basis(&self) -> &DMatrix<Complex<T>> {
        &self.u
    }

    pub fn rank(&self) -> usize {
        self.u.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.u.nrows()
    }

    pub fn rank_tolerance(&self) -> T {
        self.rank_tolerance
    }

    pub fn generator_count(&self) -> usize {
        self.generator_count
    }

    /// Singular values of the normalized generator stack, descending.
    pub fn singular_values(&self) -> &[T] {
        &self.singular_values
    }

    pub fn spectrum(&self) -> Vec<SpectrumEntry<T>> {
        let r = self.rank();
        self.singular_values
            .iter()
            .enumerate()
            .map(|(index, &sigma)| SpectrumEntry { index, sigma, kept: index < r })
            .collect()
    }

    /// Orthogonal projector `U U^H`.
    pub fn projector(&self) -> DMatrix<Complex<T>> {
        &self.u * self.u.adjoint()
    }

    /// `U^H h`.
    pub fn reduce_vector(&self, h: &DVector<Complex<T>>) -> DVector<Complex<T>> {
        self.u.ad_mul(h)
    }

    /// `U^H A U`.
    pub fn reduce_matrix(&self, a: &DMatrix<Complex<T>>) -> DMatrix<Complex<T>> {
        self.u.ad_mul(&(a * &self.u))
    }

    pub fn reduce_q(&self, grid: &QGrid<T>) -> QGrid<T> {
        grid.map(|q| self.reduce_matrix(q))
    }

    /// `U X U^H`.
    pub fn lift(&self, x: &DMatrix<Complex<T>>) -> DMatrix<Complex<T>> {
        &self.u * x * self.u.adjoint()
    }

    /// `Pi W Pi` with `Pi = U U^H`.
    pub fn project_covariance(&self, w: &DMatrix<Complex<T>>) -> DMatrix<Complex<T>> {
        self.lift(&self.reduce_matrix(w))
    }

    /// `||v - U U^H v|| / ||v||`, or zero for a zero vector.
    pub fn residual(&self, v: &DVector<Complex<T>>) -> T {
        let norm = v.norm();
        if norm == T::zero() {
            return T::zero();
        }
        (v - &self.u * self.reduce_vector(v)).norm() / norm
    }
}

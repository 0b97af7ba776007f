//! Real symmetric encoding of complex Hermitian matrices.
//!
//! A Hermitian `X = A + jB` maps to `[[A, -B], [B, A]]`. For Hermitian `Q`
//! and `X`, `tr(Q X) = 1/2 tr(embed(Q) embed(X))`, and `X` is PSD iff its
//! embedding is. The solver returns arbitrary symmetric PSD blocks, so
//! [`extract`] takes the Hermitian part, which stays PSD.

use nalgebra::{DMatrix, DVector};

use crate::C64;

pub fn embed(x: &DMatrix<C64>) -> DMatrix<f64> {
    let n = x.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let v = x[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => v.re,
            (true, false) => -v.im,
            (false, true) => v.im,
        }
    })
}

/// `W = 1/2 (X11 + X22) + j/2 (X21 - X12)`.
pub fn extract(x: &DMatrix<f64>) -> DMatrix<C64> {
    let n = x.nrows() / 2;
    DMatrix::from_fn(n, n, |i, j| {
        let re = 0.5 * (x[(i, j)] + x[(n + i, n + j)]);
        let im = 0.5 * (x[(n + i, j)] - x[(i, n + j)]);
        C64::new(re, im)
    })
}

/// Real vectors `u, v` with `embed(h h^H) = u u' + v v'`.
pub fn embed_outer(h: &DVector<C64>) -> (DVector<f64>, DVector<f64>) {
    let n = h.len();
    let u = DVector::from_fn(2 * n, |i, _| if i < n { h[i].re } else { h[i - n].im });
    let v = DVector::from_fn(2 * n, |i, _| if i < n { -h[i].im } else { h[i - n].re });
    (u, v)
}

/// Symmetric-entry terms whose inner product with a real block of order
/// `2n` equals `w * Re extract(X)[i, j]`.
pub fn re_terms(n: usize, i: usize, j: usize, w: f64) -> Vec<(usize, usize, f64)> {
    // Off-diagonal entries count twice in the symmetric inner product.
    let v = if i == j { 0.5 * w } else { 0.25 * w };
    vec![(i, j, v), (n + i, n + j, v)]
}

/// Terms giving `w * Im extract(X)[i, j]`; empty on the diagonal.
pub fn im_terms(n: usize, i: usize, j: usize, w: f64) -> Vec<(usize, usize, f64)> {
    if i == j {
        return Vec::new();
    }
    vec![(n + i, j, 0.25 * w), (i, n + j, -0.25 * w)]
}

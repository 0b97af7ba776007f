//! Uniform linear array, spherical-wave responses and the parametric
//! elliptical target.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix2xX, Point2, Vector2};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cis, Real};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Scale of the inner ellipse ring relative to the outer contour.
pub const INNER_RING_SCALE: f64 = 0.5;

/// A ULA on the x-axis centered at the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct ArrayGeometry<T: Real> {
    num_elements: usize,
    carrier_freq: T,
    wavelength: T,
    spacing: T,
    positions: Vec<Point2<T>>,
}

impl<T: Real> ArrayGeometry<T> {
    /// Half-wavelength ULA.
    pub fn ula(num_elements: usize, carrier_freq: T) -> Result<Self> {
        let wavelength = T::lit(SPEED_OF_LIGHT) / carrier_freq;
        Self::with_spacing(num_elements, carrier_freq, wavelength / T::lit(2.0))
    }

    pub fn with_spacing(num_elements: usize, carrier_freq: T, spacing: T) -> Result<Self> {
        if num_elements == 0 {
            return Err(Error::InvalidParameter("array needs at least one element".into()));
        }
        if !(carrier_freq > T::zero()) || !carrier_freq.is_finite() {
            return Err(Error::InvalidParameter("carrier frequency must be positive".into()));
        }
        if !(spacing > T::zero()) || !spacing.is_finite() {
            return Err(Error::InvalidParameter("element spacing must be positive".into()));
        }
        let wavelength = T::lit(SPEED_OF_LIGHT) / carrier_freq;
        let mid = T::lit((num_elements as f64 - 1.0) / 2.0);
        let positions = (0..num_elements)
            .map(|n| Point2::new((T::lit(n as f64) - mid) * spacing, T::zero()))
            .collect();
        Ok(Self { num_elements, carrier_freq, wavelength, spacing, positions })
    }

    pub fn num_elements(&self) -> usize {
        self.num_elements
    }

    pub fn carrier_freq(&self) -> T {
        self.carrier_freq
    }

    pub fn wavelength(&self) -> T {
        self.wavelength
    }

    pub fn spacing(&self) -> T {
        self.spacing
    }

    pub fn positions(&self) -> &[Point2<T>] {
        &self.positions
    }

    /// Aperture `(N - 1) d`.
    pub fn aperture(&self) -> T {
        T::lit(self.num_elements as f64 - 1.0) * self.spacing
    }

    /// Fresnel distance `2 D^2 / lambda`.
    pub fn fresnel_distance(&self) -> T {
        let d = self.aperture();
        T::lit(2.0) * d * d / self.wavelength
    }

    pub fn wavenumber(&self) -> T {
        T::two_pi() / self.wavelength
    }

    /// Range difference `|p - q_n| - |p|`, evaluated without cancellation.
    fn range_offset(&self, n: usize, p: &Point2<T>, dist: T, r: T) -> T {
        let q = &self.positions[n];
        (q.coords.norm_squared() - T::lit(2.0) * p.coords.dot(&q.coords)) / (dist + r)
    }

    fn check_point(p: &Point2<T>) -> Result<T> {
        if !p.x.is_finite() || !p.y.is_finite() {
            return Err(Error::NonFinite("point coordinates"));
        }
        let r = p.coords.norm();
        if r == T::zero() {
            return Err(Error::ZeroReference);
        }
        Ok(r)
    }
}

/// Unit-norm near-field steering vector toward `p`, phase-referenced to the
/// array center.
pub fn steering<T: Real>(array: &ArrayGeometry<T>, p: &Point2<T>) -> Result<DVector<Complex<T>>> {
    let r = ArrayGeometry::check_point(p)?;
    let k = array.wavenumber();
    let amp = T::one() / T::lit(array.num_elements as f64).sqrt();
    Ok(DVector::from_iterator(
        array.num_elements,
        (0..array.num_elements).map(|n| {
            let dist = (p - array.positions[n]).norm();
            cis(-k * array.range_offset(n, p, dist, r)) * amp
        }),
    ))
}

/// Steering vector and its N x 2 Jacobian with respect to `(p_x, p_y)`.
pub fn steering_with_jacobian<T: Real>(
    array: &ArrayGeometry<T>,
    p: &Point2<T>,
) -> Result<(DVector<Complex<T>>, DMatrix<Complex<T>>)> {
    let r = ArrayGeometry::check_point(p)?;
    let n_el = array.num_elements;
    let k = array.wavenumber();
    let amp = T::one() / T::lit(n_el as f64).sqrt();
    let mut a = DVector::zeros(n_el);
    let mut g = DMatrix::zeros(n_el, 2);
    for n in 0..n_el {
        let diff = p - array.positions[n];
        let dist = diff.norm();
        if dist == T::zero() {
            return Err(Error::OnElement(n));
        }
        let an = cis(-k * array.range_offset(n, p, dist, r)) * amp;
        a[n] = an;
        for c in 0..2 {
            let d = diff[c] / dist - p.coords[c] / r;
            g[(n, c)] = an * Complex::new(T::zero(), -k * d);
        }
    }
    Ok((a, g))
}

pub fn steering_jacobian<T: Real>(array: &ArrayGeometry<T>, p: &Point2<T>) -> Result<DMatrix<Complex<T>>> {
    steering_with_jacobian(array, p).map(|(_, g)| g)
}

/// `(r sin theta, r cos theta)`: theta is measured from broadside (+y).
pub fn polar_to_cart<T: Real>(r: T, theta: T) -> Result<Point2<T>> {
    if !(r > T::zero()) || !r.is_finite() || !theta.is_finite() {
        return Err(Error::InvalidParameter("polar range must be positive and finite".into()));
    }
    Ok(Point2::new(r * theta.sin(), r * theta.cos()))
}

/// Elliptical target parameters `[x_c, y_c, phi, L, b]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtParams<T> {
    pub xc: T,
    pub yc: T,
    /// Orientation (rad), wrapped to (-pi, pi].
    pub phi: T,
    /// Semi-axis along the rotated x direction (m).
    pub l: T,
    /// Semi-axis along the rotated y direction (m).
    pub b: T,
}

impl<T: Real> EtParams<T> {
    pub const DIM: usize = 5;

    pub fn new(xc: T, yc: T, phi: T, l: T, b: T) -> Result<Self> {
        let p = Self { xc, yc, phi: wrap_angle(phi), l, b };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if [self.xc, self.yc, self.phi, self.l, self.b].iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("target parameters"));
        }
        if !(self.l > T::zero()) || !(self.b > T::zero()) {
            return Err(Error::InvalidParameter("ellipse semi-axes must be positive".into()));
        }
        Ok(())
    }

    pub fn center(&self) -> Point2<T> {
        Point2::new(self.xc, self.yc)
    }

    pub fn to_array(&self) -> [T; 5] {
        [self.xc, self.yc, self.phi, self.l, self.b]
    }

    /// No validation or wrapping, so finite differences can step freely.
    pub fn from_array(v: [T; 5]) -> Self {
        Self { xc: v[0], yc: v[1], phi: v[2], l: v[3], b: v[4] }
    }
}

fn wrap_angle<T: Real>(phi: T) -> T {
    let two_pi = T::two_pi();
    let mut w = phi - two_pi * ((phi + T::pi()) / two_pi).floor();
    if w <= -T::pi() {
        w += two_pi;
    }
    w
}

/// Ring counts of the elliptical point cloud.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EllipseLayout {
    pub outer: usize,
    pub inner: usize,
    pub center: bool,
}

impl Default for EllipseLayout {
    fn default() -> Self {
        Self { outer: 50, inner: 25, center: true }
    }
}

impl EllipseLayout {
    pub fn num_points(&self) -> usize {
        self.outer + self.inner + usize::from(self.center)
    }
}

/// Representative scattering points with their parameter Jacobians.
#[derive(Clone, Debug, PartialEq)]
pub struct EtPointCloud<T: Real> {
    positions: Vec<Point2<T>>,
    jacobians: Vec<Matrix2xX<T>>,
    profile: Vec<Complex<T>>,
}

impl<T: Real> EtPointCloud<T> {
    pub fn new(positions: Vec<Point2<T>>, jacobians: Vec<Matrix2xX<T>>, profile: Vec<Complex<T>>) -> Result<Self> {
        let m = positions.len();
        if m == 0 {
            return Err(Error::InvalidParameter("point cloud is empty".into()));
        }
        if jacobians.len() != m {
            return Err(Error::DimensionMismatch { context: "cloud jacobians", got: jacobians.len(), expected: m });
        }
        if profile.len() != m {
            return Err(Error::DimensionMismatch { context: "cloud profile", got: profile.len(), expected: m });
        }
        let dim = jacobians[0].ncols();
        if dim == 0 {
            return Err(Error::InvalidParameter("jacobians have no parameter columns".into()));
        }
        if let Some(j) = jacobians.iter().find(|j| j.ncols() != dim) {
            return Err(Error::DimensionMismatch { context: "jacobian columns", got: j.ncols(), expected: dim });
        }
        Ok(Self { positions, jacobians, profile })
    }

    /// A single scatterer at `center` parameterized by its own position.
    pub fn point(center: Point2<T>, beta: Complex<T>) -> Self {
        let jac = Matrix2xX::from_column_slice(&[T::one(), T::zero(), T::zero(), T::one()]);
        Self { positions: vec![center], jacobians: vec![jac], profile: vec![beta] }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn param_dim(&self) -> usize {
        self.jacobians[0].ncols()
    }

    pub fn positions(&self) -> &[Point2<T>] {
        &self.positions
    }

    pub fn jacobians(&self) -> &[Matrix2xX<T>] {
        &self.jacobians
    }

    pub fn profile(&self) -> &[Complex<T>] {
        &self.profile
    }

    pub fn with_profile(mut self, profile: Vec<Complex<T>>) -> Result<Self> {
        if profile.len() != self.len() {
            return Err(Error::DimensionMismatch { context: "cloud profile", got: profile.len(), expected: self.len() });
        }
        self.profile = profile;
        Ok(self)
    }
}

fn rotation<T: Real>(phi: T) -> Matrix2<T> {
    let (s, c) = phi.sin_cos();
    Matrix2::new(c, -s, s, c)
}

fn rotation_derivative<T: Real>(phi: T) -> Matrix2<T> {
    let (s, c) = phi.sin_cos();
    Matrix2::new(-s, -c, c, -s)
}

/// Samples the elliptical target: outer ring, inner ring at half scale and
/// optionally the center, all with unit scattering coefficients.
pub fn ellipse_cloud<T: Real>(eta: &EtParams<T>, layout: &EllipseLayout) -> Result<EtPointCloud<T>> {
    eta.validate()?;
    if layout.num_points() == 0 {
        return Err(Error::InvalidParameter("layout has no points".into()));
    }
    let c = Vector2::new(eta.xc, eta.yc);
    let rot = rotation(eta.phi);
    let drot = rotation_derivative(eta.phi);
    let m = layout.num_points();
    let mut positions = Vec::with_capacity(m);
    let mut jacobians = Vec::with_capacity(m);
    for (count, scale) in [(layout.outer, T::one()), (layout.inner, T::lit(INNER_RING_SCALE))] {
        for i in 0..count {
            let theta = T::two_pi() * T::lit(i as f64) / T::lit(count as f64);
            let (st, ct) = theta.sin_cos();
            let local = Vector2::new(scale * eta.l * ct, scale * eta.b * st);
            positions.push(Point2::from(c + rot * local));
            let d_phi = drot * local;
            let d_l = rot * Vector2::new(scale * ct, T::zero());
            let d_b = rot * Vector2::new(T::zero(), scale * st);
            jacobians.push(Matrix2xX::from_columns(&[Vector2::x(), Vector2::y(), d_phi, d_l, d_b]));
        }
    }
    if layout.center {
        positions.push(Point2::from(c));
        let mut jac = Matrix2xX::zeros(EtParams::<T>::DIM);
        jac[(0, 0)] = T::one();
        jac[(1, 1)] = T::one();
        jacobians.push(jac);
    }
    let profile = vec![Complex::new(T::one(), T::zero()); m];
    EtPointCloud::new(positions, jacobians, profile)
}

/// A communication user in polar coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UserSpec<T> {
    /// Range (m).
    pub range: T,
    /// Angle from broadside (rad).
    pub angle: T,
    pub gain: Complex<T>,
    /// Linear SINR target.
    pub sinr_target: T,
}

impl<T: Real> UserSpec<T> {
    pub fn position(&self) -> Result<Point2<T>> {
        polar_to_cart(self.range, self.angle)
    }
}

pub fn user_channel<T: Real>(array: &ArrayGeometry<T>, user: &UserSpec<T>) -> Result<DVector<Complex<T>>> {
    if !(user.sinr_target > T::zero()) {
        return Err(Error::InvalidParameter("SINR target must be positive".into()));
    }
    Ok(steering(array, &user.position()?)? * user.gain)
}

/// `sum_m beta_m a_m a_m^H`.
pub fn response_matrix<T: Real>(cloud: &EtPointCloud<T>, array: &ArrayGeometry<T>) -> Result<DMatrix<Complex<T>>> {
    let n = array.num_elements();
    let mut g = DMatrix::zeros(n, n);
    for (p, beta) in cloud.positions().iter().zip(cloud.profile()) {
        let a = steering(array, p)?;
        g += (&a * a.adjoint()) * *beta;
    }
    Ok(g)
}

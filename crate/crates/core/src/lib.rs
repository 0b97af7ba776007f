//! Geometry-aware Cramer-Rao bound transmit design for near-field
//! integrated sensing and communication with a parametric extended target.
//!
//! The model layers ([`geometry`], [`fisher`], [`subspace`]) are generic over
//! the real scalar; the optimization layers work in `f64`.

pub mod baselines;
pub mod design;
pub mod embed;
pub mod error;
pub mod fisher;
pub mod geometry;
pub mod scalar;
pub mod subspace;

pub use error::{Error, Result};
pub use scalar::Real;

pub type C64 = num_complex::Complex<f64>;

pub type Array = geometry::ArrayGeometry<f64>;
pub type Array32 = geometry::ArrayGeometry<f32>;
pub type PointCloud = geometry::EtPointCloud<f64>;
pub type PointCloud32 = geometry::EtPointCloud<f32>;
pub type Operators = fisher::FisherOperators<f64>;
pub type Operators32 = fisher::FisherOperators<f32>;
pub type Basis = subspace::SubspaceBasis<f64>;
pub type Basis32 = subspace::SubspaceBasis<f32>;

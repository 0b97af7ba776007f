//! Scalar abstraction for the geometry, Fisher and subspace layers.

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::ToPrimitive;

/// Real scalar usable by the model layers (`f32` or `f64`).
pub trait Real: RealField + Copy + ToPrimitive {
    /// Converts an `f64` literal.
    fn lit(v: f64) -> Self {
        nalgebra::convert(v)
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Relative tolerance that is meaningful at this precision.
    fn loose_eps() -> Self {
        Self::default_epsilon().sqrt()
    }
}

impl<T: RealField + Copy + ToPrimitive> Real for T {}

pub(crate) fn cis<T: Real>(phase: T) -> Complex<T> {
    Complex::new(phase.cos(), phase.sin())
}

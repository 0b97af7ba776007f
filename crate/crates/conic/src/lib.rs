//! Block-diagonal semidefinite programming backend.
//!
//! Problems are stated in primal standard form
//!
//! ```text
//! minimize    <C, X>
//! subject to  <A_i, X> = b_i,   i = 1..m
//!             X = diag(X_1, .., X_B),  X_j PSD or elementwise nonnegative
//! ```
//!
//! with the dual `maximize b'y  s.t.  C - sum_i y_i A_i = Z >= 0`. Everything
//! here is real; complex Hermitian variables are encoded by the caller.

mod error;
mod ipm;
mod problem;

pub use error::ConicError;
pub use ipm::{InteriorPoint, IpmSettings, VERBOSITY_ENV};
pub use problem::{BlockKind, BlockValue, Coeff, LinearConstraint, SdpProblem, SdpSolution, SolveStatus};

/// A conic solver that accepts block-diagonal SDPs.
///
/// Implementations must be deterministic for identical input and hold no
/// state shared between calls, so one instance per worker is always safe.
pub trait ConicBackend: Send + Sync {
    fn solve(&self, problem: &SdpProblem) -> Result<SdpSolution, ConicError>;
}

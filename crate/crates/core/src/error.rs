use etcrb_conic::{ConicError, SolveStatus};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("reference point has zero norm; distance to the array center is undefined")]
    ZeroReference,
    #[error("point coincides with array element {0}; distance derivative is singular")]
    OnElement(usize),
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch in {context}: got {got}, expected {expected}")]
    DimensionMismatch { context: &'static str, got: usize, expected: usize },
    #[error("matrix is not Hermitian (relative asymmetry {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),
    #[error("Fisher information is singular or ill-conditioned (min eigenvalue {min_eigenvalue:.3e}, condition {condition:.3e})")]
    SingularFim { min_eigenvalue: f64, condition: f64 },
    #[error("subspace generator stack is empty or all zero")]
    EmptyGenerators,
    #[error("user {0} receives no useful power; rank-one recovery undefined")]
    DegenerateUser(usize),
    #[error("baseline is infeasible: {0}")]
    BaselineInfeasible(String),
    #[error("design is infeasible ({status})")]
    Infeasible { status: SolveStatus },
    #[error("solver did not converge ({status}): primal residual {primal_residual:.3e}, dual residual {dual_residual:.3e}, gap {relative_gap:.3e}")]
    SolverFailure { status: SolveStatus, primal_residual: f64, dual_residual: f64, relative_gap: f64 },
    #[error(transparent)]
    Conic(#[from] ConicError),
}

pub type Result<T> = std::result::Result<T, Error>;

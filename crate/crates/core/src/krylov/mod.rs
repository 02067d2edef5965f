//! Restarted GMRES with left preconditioning, and the preconditioners used
//! with it: identity, ILU(0) and a reordered skyline LU factorization.

mod direct;
mod gmres;
mod ilu;

use num_complex::Complex64;
use thiserror::Error;

use crate::fem::ComplexCsrMatrix;

pub use direct::{reverse_cuthill_mckee, SkylineLu, MAX_DIRECT_DOFS, MAX_PROFILE_ENTRIES};
pub use gmres::{gmres, GmresOptions, SolveReport};
pub use ilu::Ilu0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KrylovError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid solver parameter: {0}")]
    InvalidParameter(String),
    #[error("Arnoldi breakdown at iteration {iteration} without convergence (residual {residual:e})")]
    Breakdown { iteration: usize, residual: f64 },
    #[error("zero pivot in row {row}")]
    ZeroPivot { row: usize },
    #[error("matrix too large for the direct solver: {what} = {size} exceeds {limit}")]
    TooLarge { what: &'static str, size: usize, limit: usize },
}

/// A square linear map on complex vectors.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    /// `y = A x`.
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]);
}

impl LinearOperator for ComplexCsrMatrix {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        self.matvec(x, y);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PreconditionerKind {
    Identity,
    Ilu0,
    Direct,
}

#[derive(Debug, Clone)]
pub enum Preconditioner {
    Identity,
    Ilu0(Ilu0),
    Direct(SkylineLu),
}

impl Preconditioner {
    pub fn build(kind: PreconditionerKind, matrix: &ComplexCsrMatrix) -> Result<Self, KrylovError> {
        Ok(match kind {
            PreconditionerKind::Identity => Preconditioner::Identity,
            PreconditionerKind::Ilu0 => Preconditioner::Ilu0(Ilu0::new(matrix)?),
            PreconditionerKind::Direct => Preconditioner::Direct(SkylineLu::new(matrix)?),
        })
    }

    pub fn kind(&self) -> PreconditionerKind {
        match self {
            Preconditioner::Identity => PreconditionerKind::Identity,
            Preconditioner::Ilu0(_) => PreconditionerKind::Ilu0,
            Preconditioner::Direct(_) => PreconditionerKind::Direct,
        }
    }

    /// `z = P^-1 r`.
    pub fn apply(&self, r: &[Complex64], z: &mut [Complex64]) {
        match self {
            Preconditioner::Identity => z.copy_from_slice(r),
            Preconditioner::Ilu0(f) => f.solve(r, z),
            Preconditioner::Direct(f) => f.solve(r, z),
        }
    }
}

pub fn build_ilu0(matrix: &ComplexCsrMatrix) -> Result<Preconditioner, KrylovError> {
    Preconditioner::build(PreconditionerKind::Ilu0, matrix)
}

pub fn build_direct(matrix: &ComplexCsrMatrix) -> Result<Preconditioner, KrylovError> {
    Preconditioner::build(PreconditionerKind::Direct, matrix)
}

fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

//! Dense linear algebra for the small real matrices that describe plants and
//! certificates: eigenvalues, Lyapunov and Riccati solvers.

mod eigen;
mod lu;
mod lyapunov;
mod matrix;
mod riccati;
mod symmetric;

pub use eigen::{eigenvalues, is_schur, spectral_radius};
pub use lu::LuDecomposition;
pub use lyapunov::solve_discrete_lyapunov;
pub use matrix::Matrix;
pub use riccati::{solve_dare, solve_dare_lqr, DareSolution, RiccatiOptions};
pub use symmetric::{
    cholesky, max_generalized_eigenvalue, symmetric_eigenvalues, symmetric_spectrum,
    SymmetricSpectrum,
};

use thiserror::Error;

/// Absolute tolerance on `max |M - Mᵀ|` before a matrix is treated as non-symmetric.
pub const SYMMETRY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("invalid shape: {rows}x{cols} with {len} entries")]
    InvalidShape { rows: usize, cols: usize, len: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("linear system is singular to working precision")]
    Singular,

    #[error("eigenvalue iteration did not converge")]
    NoConvergence,

    #[error("matrix is not Schur stable (spectral radius {radius})")]
    NotSchurStable { radius: f64 },

    #[error("Riccati iteration diverged after {iterations} steps (pair likely not stabilizable)")]
    RiccatiDiverged { iterations: usize },

    #[error("Riccati iteration hit the cap of {iterations} steps without converging")]
    RiccatiMaxIterations { iterations: usize },
}

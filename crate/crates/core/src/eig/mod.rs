//! Eigenvalues of the assembled tridiagonal matrices.
//!
//! [`eigen_dense`] finds every eigenvalue by QR, [`refine`] polishes one by
//! inverse iteration, and [`spurious_filter`] keeps only eigenvalues that
//! survive halving the mesh.

mod filter;
pub(crate) mod lu;
mod qr;
mod refine;

use num_complex::Complex64;
use thiserror::Error;

use crate::operator::OperatorError;

pub use filter::{match_two_grid, solve, spurious_filter, SolveOptions, Spectrum, SpectrumEntry, Window};
pub use qr::{eigen_dense, sort_spectrum, DENSE_LIMIT};
pub use refine::{refine, Eigenpair};

#[derive(Debug, Clone, PartialEq)]
pub struct EigOptions {
    /// Relative size below which a subdiagonal entry is deflated.
    pub qr_tol: f64,
    /// QR sweeps allowed per deflated eigenvalue.
    pub max_qr_sweeps: usize,
    /// Refinement stops once `‖Aψ - λψ‖ <= residual_tol ‖A‖∞`.
    pub residual_tol: f64,
    pub max_refine_iter: usize,
    /// Relative agreement between coarse and fine eigenvalues for trust.
    pub two_grid_tol: f64,
    /// Largest grid handed to the dense solver; finer grids get their
    /// candidates from a dense solve on this many points.
    pub dense_cap: usize,
}

impl Default for EigOptions {
    fn default() -> Self {
        EigOptions {
            qr_tol: 1e-12,
            max_qr_sweeps: 60,
            residual_tol: 1e-10,
            max_refine_iter: 40,
            two_grid_tol: 1e-3,
            dense_cap: 320,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EigError {
    #[error("matrix of size {0} exceeds the dense limit of 5000")]
    TooLarge(usize),
    #[error("QR did not converge on block {lo}..={hi} after {sweeps} sweeps")]
    NoConvergence { lo: usize, hi: usize, sweeps: usize },
    #[error("shift {0} is singular even after perturbation")]
    SingularShift(Complex64),
    #[error("refinement near {lambda} stalled at residual {residual:e}")]
    RefineNoConvergence { lambda: Complex64, residual: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Eig(#[from] EigError),
}

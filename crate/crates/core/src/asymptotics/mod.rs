//! Predicted curves for the eigenvalues that diverge as a truncation grows
//! or a coupling constant increases.
//!
//! Every prediction has the shape `scale(p) · ν + shift(p)` where `ν` is the
//! eigenvalue of a model operator (a rotated Airy zero, a rotated oscillator
//! level, or an eigenvalue of `-d²/dx² + i|x|^κ`), possibly conjugated.

mod branch;
mod coupling;
mod model;
mod profile;

use thiserror::Error;

use crate::airy::AiryError;
use crate::eig::SolveError;
use crate::expr::ExprError;

pub use branch::{AsymptoticBranch, ScaleFn, ShiftFn};
pub use coupling::{
    branch_pt1, branch_pt2, branch_schenker, branch_strong_coupling, strong_coupling_remainder_exponent,
    Pt1Point, Pt2Point,
};
pub use model::{harmonic_nu, model_nu_kappa, model_nu_odd};
pub use profile::{
    branch_1d, branch_1d_perturbed, branch_cone, branch_cone_expr, branch_radial, corner_correction,
    corner_perturbation, first_correction, Orientation, Profile, CORRECTION_LENGTH,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AsymptoticsError {
    #[error("U'({at}) = {value} is not positive")]
    NonPositiveDerivative { at: f64, value: f64 },
    #[error("gradient of the potential vanishes at parameter {at}")]
    ZeroGradient { at: f64 },
    #[error("kappa must be positive, got {0}")]
    InvalidKappa(f64),
    #[error("no branch for M = {m} at stationary point {point}")]
    Unsupported { m: u32, point: String },
    #[error("quadrature did not settle under step halving (last change {0:e})")]
    Quadrature(f64),
    #[error("model eigenvalue {k} not found for kappa = {kappa}")]
    ModelEigenvalue { kappa: f64, k: usize },
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Airy(#[from] AiryError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

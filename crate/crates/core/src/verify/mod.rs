//! Hypothesis checkers, spectral diagnostics, and the matching of computed
//! eigenvalues to predicted branches across a sweep.
//!
//! Checks are advisory: they report sampled constants and flags and never
//! refuse to run a computation.

mod assumptions;
mod diagnostics;
mod sweep;

use thiserror::Error;

use crate::asymptotics::AsymptoticsError;
use crate::eig::SolveError;
use crate::expr::ExprError;

pub use assumptions::{
    check_gradient_condition, check_u_conditions, graph_norm_constant, AssumptionReport, GradientReport,
    CRITICAL_GRADIENT_EPS,
};
pub use diagnostics::{
    decay_fit, l2_norm, pt_symmetry_defect, resolvent_gap, tau_kappa, trace_sum, DecayFit, TauKappa,
};
pub use sweep::{
    fit_tail, match_and_fit, BranchFit, MatchRecord, ParameterRecord, SweepPoint, SweepReport,
    DEFAULT_WINDOW_FACTOR,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("gradient constant {eps_nabla} leaves no positive graph-norm constant (needs < 2 - √2 and a positive result)")]
    GraphNorm { eps_nabla: f64 },
    #[error("eigenvalue {index} sits on the pole at -z0")]
    Pole { index: usize },
    #[error("only {usable} usable nodes in the fit window, need at least 10")]
    WindowTooSmall { usable: usize },
    #[error("|Q| vanishes at x = {x} outside the ball")]
    VanishingPotential { x: f64 },
    #[error("resolvent shift {0} is singular")]
    SingularShift(num_complex::Complex64),
    #[error("grids are not nested: {0}")]
    GridsNotNested(String),
    #[error("no samples in window ({0}, {1})")]
    EmptyWindow(f64, f64),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Asymptotics(#[from] AsymptoticsError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

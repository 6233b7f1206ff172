//! Spectra of domain truncations of non-self-adjoint Schrödinger operators
//! `-d²/dx² + Q` with complex potentials, together with the asymptotic
//! formulas for the eigenvalues that escape to infinity as the domain grows.
//!
//! The crate is layered bottom-up:
//!
//! * [`expr`] parses and differentiates potentials such as `i*x^3`.
//! * [`airy`] evaluates `Ai`, `Ai'` and their zeros, which seed every
//!   asymptotic branch.
//! * [`operator`] turns a potential and an interval into a tridiagonal
//!   finite-difference matrix.
//! * [`eig`] computes and refines eigenvalues and discards discretisation
//!   artefacts by comparing two grids.
//! * [`asymptotics`] predicts the diverging eigenvalues.
//! * [`verify`] checks hypotheses, fits remainder rates and writes reports.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod airy;
pub mod asymptotics;
pub mod eig;
pub mod expr;
pub mod operator;
pub mod verify;

pub use num_complex::Complex64 as C64;

use serde::{Deserialize, Serialize};

/// Boundary condition at an end of the computational interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Boundary {
    Dirichlet,
    Neumann,
}

impl std::str::FromStr for Boundary {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "d" | "dirichlet" => Ok(Boundary::Dirichlet),
            "n" | "neumann" => Ok(Boundary::Neumann),
            other => Err(format!("unknown boundary condition `{other}`")),
        }
    }
}

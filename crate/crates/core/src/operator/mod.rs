//! Finite-difference discretisation of `-d²/dx² + Q` on an interval.
//!
//! Dirichlet ends drop the boundary node; a Neumann end keeps it as an
//! unknown and eliminates the ghost value, which doubles the coupling to its
//! neighbour.

mod truncation;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{Bindings, ExprError, Node, PotentialExpr};
use crate::Boundary;

pub use truncation::{grid_for, truncation_family, TruncationRule, DEFAULT_PPW};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OperatorError {
    #[error("interval ({0}, {1}) is empty or not finite")]
    InvalidInterval(f64, f64),
    #[error("a grid needs at least 3 interior points, got {0}")]
    GridTooSmall(usize),
    #[error("radial operators need a positive inner radius, got {0}")]
    RadialInnerRadius(f64),
    #[error("potential failed at x = {x}: {source}")]
    Potential { x: f64, source: ExprError },
    #[error("potential is not finite at x = {0}")]
    NonFinitePotential(f64),
    #[error("grid does not cover the operator's interval")]
    GridMismatch,
    #[error("truncation schedule must be positive and strictly increasing (entry {index}: {value})")]
    BadSchedule { index: usize, value: f64 },
    #[error("truncation parameter {0} does not exceed the inner radius {1}")]
    ParameterBelowInner(f64, f64),
}

/// Dimension and angular momentum of a radially reduced operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Radial {
    pub dimension: u32,
    pub angular: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpec {
    pub potential: PotentialExpr,
    pub variable: String,
    pub interval: (f64, f64),
    pub bc_left: Boundary,
    pub bc_right: Boundary,
    pub radial: Option<Radial>,
    pub bindings: Bindings,
}

impl OperatorSpec {
    /// Dirichlet problem for `potential` in the variable `x`.
    pub fn new(potential: PotentialExpr, interval: (f64, f64)) -> Result<Self, OperatorError> {
        let spec = OperatorSpec {
            potential,
            variable: "x".to_string(),
            interval,
            bc_left: Boundary::Dirichlet,
            bc_right: Boundary::Dirichlet,
            radial: None,
            bindings: Bindings::new(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_variable(mut self, variable: &str) -> Self {
        self.variable = variable.to_string();
        self
    }

    pub fn with_boundaries(mut self, left: Boundary, right: Boundary) -> Self {
        self.bc_left = left;
        self.bc_right = right;
        self
    }

    pub fn with_bindings(mut self, bindings: Bindings) -> Self {
        self.bindings = bindings;
        self
    }

    pub fn with_radial(mut self, radial: Radial) -> Result<Self, OperatorError> {
        self.radial = Some(radial);
        self.validate()?;
        Ok(self)
    }

    pub fn with_interval(mut self, interval: (f64, f64)) -> Result<Self, OperatorError> {
        self.interval = interval;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<(), OperatorError> {
        let (a, b) = self.interval;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(OperatorError::InvalidInterval(a, b));
        }
        if self.radial.is_some() && a <= 0.0 {
            return Err(OperatorError::RadialInnerRadius(a));
        }
        Ok(())
    }

    /// `Q(x)` plus the centrifugal term of a radial reduction.
    pub fn potential_at(&self, x: f64) -> Result<Complex64, OperatorError> {
        let mut v = self
            .potential
            .eval_at(&self.variable, x, &self.bindings)
            .map_err(|source| OperatorError::Potential { x, source })?;
        if let Some(r) = self.radial {
            v += radial_coefficient(r.dimension, r.angular) / (x * x);
        }
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(OperatorError::NonFinitePotential(x));
        }
        Ok(v)
    }
}

/// Uniform grid with `n` interior nodes `x_j = a + j h`, `j = 1..=n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    pub a: f64,
    pub b: f64,
    pub n: usize,
}

impl Grid1D {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self, OperatorError> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(OperatorError::InvalidInterval(a, b));
        }
        if n < 3 {
            return Err(OperatorError::GridTooSmall(n));
        }
        Ok(Grid1D { a, b, n })
    }

    pub fn h(&self) -> f64 {
        (self.b - self.a) / (self.n + 1) as f64
    }

    /// Node `j` for `0 <= j <= n + 1`; written so that grids on symmetric
    /// intervals are exactly symmetric.
    pub fn node(&self, j: usize) -> f64 {
        let m = (self.n + 1) as f64;
        let j = j as f64;
        (self.a * (m - j) + self.b * j) / m
    }

    /// The grid with half the spacing; every node of `self` is a node of it.
    pub fn halved(&self) -> Grid1D {
        Grid1D { a: self.a, b: self.b, n: 2 * self.n + 1 }
    }
}

/// Complex tridiagonal matrix; `sub[i]` couples row `i + 1` to column `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagComplex {
    pub sub: Vec<Complex64>,
    pub diag: Vec<Complex64>,
    pub sup: Vec<Complex64>,
}

impl TridiagComplex {
    pub fn new(sub: Vec<Complex64>, diag: Vec<Complex64>, sup: Vec<Complex64>) -> Self {
        assert!(!diag.is_empty() && sub.len() + 1 == diag.len() && sup.len() == sub.len());
        TridiagComplex { sub, diag, sup }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn norm_inf(&self) -> f64 {
        (0..self.len())
            .map(|i| {
                let mut s = self.diag[i].norm();
                if i > 0 {
                    s += self.sub[i - 1].norm();
                }
                if i + 1 < self.len() {
                    s += self.sup[i].norm();
                }
                s
            })
            .fold(0.0, f64::max)
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.sub[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.sup[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    pub fn transpose(&self) -> TridiagComplex {
        TridiagComplex { sub: self.sup.clone(), diag: self.diag.clone(), sup: self.sub.clone() }
    }

    pub fn scaled(&self, factor: f64) -> TridiagComplex {
        let s = |v: &[Complex64]| v.iter().map(|z| z * factor).collect();
        TridiagComplex { sub: s(&self.sub), diag: s(&self.diag), sup: s(&self.sup) }
    }

    /// Reverses the ordering of the unknowns.
    pub fn reversed(&self) -> TridiagComplex {
        let rev = |v: &[Complex64]| v.iter().rev().copied().collect();
        TridiagComplex { sub: rev(&self.sup), diag: rev(&self.diag), sup: rev(&self.sub) }
    }

    pub fn conj(&self) -> TridiagComplex {
        let c = |v: &[Complex64]| v.iter().map(|z| z.conj()).collect();
        TridiagComplex { sub: c(&self.sub), diag: c(&self.diag), sup: c(&self.sup) }
    }
}

/// Positions of the unknowns: the interior nodes plus any Neumann end.
pub fn unknown_nodes(spec: &OperatorSpec, grid: &Grid1D) -> Vec<f64> {
    let first = if spec.bc_left == Boundary::Neumann { 0 } else { 1 };
    let last = if spec.bc_right == Boundary::Neumann { grid.n + 1 } else { grid.n };
    (first..=last).map(|j| grid.node(j)).collect()
}

pub fn assemble(spec: &OperatorSpec, grid: &Grid1D) -> Result<TridiagComplex, OperatorError> {
    if (grid.a, grid.b) != spec.interval {
        return Err(OperatorError::GridMismatch);
    }
    let h = grid.h();
    let inv_h2 = 1.0 / (h * h);
    let nodes = unknown_nodes(spec, grid);
    let m = nodes.len();
    let mut diag = Vec::with_capacity(m);
    for &x in &nodes {
        let at = if spec.potential.touches_kink(&spec.variable, x, &spec.bindings) {
            x + 1e-3 * h
        } else {
            x
        };
        diag.push(Complex64::new(2.0 * inv_h2, 0.0) + spec.potential_at(at)?);
    }
    let off = Complex64::new(-inv_h2, 0.0);
    let mut sub = vec![off; m - 1];
    let mut sup = vec![off; m - 1];
    if spec.bc_left == Boundary::Neumann {
        sup[0] = 2.0 * off;
    }
    if spec.bc_right == Boundary::Neumann {
        sub[m - 2] = 2.0 * off;
    }
    Ok(TridiagComplex { sub, diag, sup })
}

fn radial_coefficient(dimension: u32, angular: u32) -> f64 {
    let (d, l) = (dimension as f64, angular as f64);
    ((d - 1.0) * (d - 3.0) + 4.0 * l * (l + d - 2.0)) / 4.0
}

/// Centrifugal term `((d-1)(d-3) + 4l(l+d-2)) / (4r²)` in the variable `r`.
pub fn radial_effective_potential(dimension: u32, angular: u32) -> PotentialExpr {
    let c = radial_coefficient(dimension, angular);
    let r2 = Node::Pow(Box::new(Node::Var("r".into())), crate::expr::Exponent::new(2.0));
    PotentialExpr::from_node(Node::Div(Box::new(Node::constant(c, 0.0)), Box::new(r2))).folded()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(interval: (f64, f64)) -> OperatorSpec {
        OperatorSpec::new(PotentialExpr::parse("0").unwrap(), interval).unwrap()
    }

    #[test]
    fn laplacian_on_three_nodes() {
        let a = assemble(&laplacian((0.0, 1.0)), &Grid1D::new(0.0, 1.0, 3).unwrap()).unwrap();
        assert!(a.diag.iter().all(|d| *d == Complex64::new(32.0, 0.0)));
        assert!(a.sub.iter().chain(&a.sup).all(|o| *o == Complex64::new(-16.0, 0.0)));
        let spec = OperatorSpec::new(PotentialExpr::parse("i*x").unwrap(), (0.0, 1.0)).unwrap();
        let b = assemble(&spec, &Grid1D::new(0.0, 1.0, 3).unwrap()).unwrap();
        for (j, d) in b.diag.iter().enumerate() {
            assert_eq!(*d - Complex64::new(32.0, 0.0), Complex64::new(0.0, 0.25 * (j + 1) as f64));
        }
    }

    #[test]
    fn radial_examples() {
        let r = 2.0;
        let at = |d, l| radial_effective_potential(d, l).eval(&Bindings::new().with_var("r", r)).unwrap().re;
        assert_eq!(at(3, 0), 0.0);
        assert_eq!(radial_effective_potential(3, 0).node(), &Node::constant(0.0, 0.0));
        assert!((at(3, 1) - 2.0 / (r * r)).abs() < 1e-15);
        assert!((at(2, 0) + 0.25 / (r * r)).abs() < 1e-15);
    }

    #[test]
    fn neumann_end_keeps_boundary_unknown() {
        let spec = laplacian((0.0, 1.0)).with_boundaries(Boundary::Neumann, Boundary::Dirichlet);
        let grid = Grid1D::new(0.0, 1.0, 3).unwrap();
        let a = assemble(&spec, &grid).unwrap();
        assert_eq!(a.len(), 4);
        assert_eq!(a.sup[0], Complex64::new(-32.0, 0.0));
        assert_eq!(a.sub[0], Complex64::new(-16.0, 0.0));
        assert_eq!(unknown_nodes(&spec, &grid)[0], 0.0);
    }

    #[test]
    fn symmetric_grids_are_exactly_symmetric() {
        let g = Grid1D::new(-7.3, 7.3, 101).unwrap();
        for j in 0..=g.n + 1 {
            assert_eq!(g.node(j), -g.node(g.n + 1 - j));
        }
    }

    #[test]
    fn kink_nodes_are_offset() {
        let spec = OperatorSpec::new(PotentialExpr::parse("abs(x)").unwrap(), (-1.0, 1.0)).unwrap();
        let grid = Grid1D::new(-1.0, 1.0, 3).unwrap();
        let a = assemble(&spec, &grid).unwrap();
        let expected = 2.0 / (grid.h() * grid.h()) + 1e-3 * grid.h();
        assert!((a.diag[1].re - expected).abs() < 1e-12);
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(Grid1D::new(0.0, 1.0, 2), Err(OperatorError::GridTooSmall(2))));
        assert!(OperatorSpec::new(PotentialExpr::parse("x").unwrap(), (1.0, 1.0)).is_err());
        let spec = laplacian((0.0, 1.0));
        assert!(matches!(
            spec.with_radial(Radial { dimension: 3, angular: 0 }),
            Err(OperatorError::RadialInnerRadius(_))
        ));
    }
}

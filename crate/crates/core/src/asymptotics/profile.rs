//! Branches generated by a growth profile `U` at the end of a truncated
//! interval: the one-dimensional imaginary potentials, their perturbations,
//! the radial reduction and the multidimensional cone formula.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use super::{AsymptoticBranch, AsymptoticsError};
use crate::airy::{airy_eigenfunction, model_nu};
use crate::expr::{Bindings, PotentialExpr};
use crate::operator::radial_effective_potential;
use crate::Boundary;

/// Length of the half-line interval used by [`first_correction`].
pub const CORRECTION_LENGTH: f64 = 12.0;

const EXPONENT_SAMPLES: [f64; 3] = [20.0, 40.0, 80.0];

/// Which end of the interval carries the growing imaginary wall.
///
/// `Left`: the potential near `-s` is `-iU(-x)` and the branch is
/// `U'(s)^{2/3} ν - iU(s)`. `Right`: the potential near `s` is `+iU(x)`,
/// the mirror image under reflection and conjugation, with branch
/// `U'(s)^{2/3} conj(ν) + iU(s)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Left,
    Right,
}

impl std::str::FromStr for Orientation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "left" => Ok(Orientation::Left),
            "right" => Ok(Orientation::Right),
            other => Err(format!("unknown orientation `{other}`")),
        }
    }
}

/// A real growth profile `U` with its symbolic derivative.
#[derive(Debug, Clone)]
pub struct Profile {
    pub expr: PotentialExpr,
    pub variable: String,
    pub bindings: Bindings,
    /// Exponent `ν` in the rate function `Υ(x) = x^ν / U'(x)^{1/3}`.
    pub nu_exponent: f64,
    derivative: PotentialExpr,
    second: PotentialExpr,
}

impl Profile {
    pub fn new(expr: PotentialExpr) -> Self {
        let variable = expr.variables().next().unwrap_or("x").to_string();
        let derivative = expr.differentiate(&variable);
        let second = derivative.differentiate(&variable);
        Profile { expr, variable, bindings: Bindings::new(), nu_exponent: -1.0, derivative, second }
    }

    pub fn parse(text: &str) -> Result<Self, AsymptoticsError> {
        Ok(Profile::new(PotentialExpr::parse(text)?))
    }

    pub fn with_variable(mut self, variable: &str) -> Self {
        self.variable = variable.to_string();
        self.derivative = self.expr.differentiate(variable);
        self.second = self.derivative.differentiate(variable);
        self
    }

    pub fn with_bindings(mut self, bindings: Bindings) -> Self {
        self.bindings = bindings;
        self
    }

    pub fn with_nu_exponent(mut self, nu: f64) -> Self {
        self.nu_exponent = nu;
        self
    }

    pub fn value(&self, x: f64) -> Result<f64, AsymptoticsError> {
        Ok(self.expr.eval_at(&self.variable, x, &self.bindings)?.re)
    }

    pub fn slope(&self, x: f64) -> Result<f64, AsymptoticsError> {
        Ok(self.derivative.eval_at(&self.variable, x, &self.bindings)?.re)
    }

    pub fn curvature(&self, x: f64) -> Result<f64, AsymptoticsError> {
        Ok(self.second.eval_at(&self.variable, x, &self.bindings)?.re)
    }

    pub fn derivative_expr(&self) -> &PotentialExpr {
        &self.derivative
    }

    /// `U'(s)^{1/3}`, the local length scale at the corner.
    pub fn corner_scale(&self, s: f64) -> Result<f64, AsymptoticsError> {
        let slope = self.slope(s)?;
        if !(slope > 0.0) {
            return Err(AsymptoticsError::NonPositiveDerivative { at: s, value: slope });
        }
        Ok(slope.cbrt())
    }

    /// `Υ(x) = x^ν / U'(x)^{1/3}`.
    pub fn upsilon(&self, x: f64) -> Result<f64, AsymptoticsError> {
        Ok(x.powf(self.nu_exponent) / self.corner_scale(x)?)
    }

    /// Power-law exponent of `Υ` read off at large arguments, or `None` if
    /// the local slopes keep drifting (faster-than-power decay).
    pub fn upsilon_exponent(&self) -> Option<f64> {
        let logs: Vec<f64> = EXPONENT_SAMPLES
            .iter()
            .map(|&x| self.upsilon(x).ok().filter(|v| *v > 0.0).map(f64::ln))
            .collect::<Option<_>>()?;
        let first = (logs[1] - logs[0]) / 2f64.ln();
        let second = (logs[2] - logs[1]) / 2f64.ln();
        ((first - second).abs() < 0.02).then_some(second)
    }
}

fn remainder_of(profile: &Profile) -> (Option<f64>, Option<String>) {
    match profile.upsilon_exponent() {
        Some(e) => (Some(e), Some("plus exponentially small terms".into())),
        None => (None, Some("decays faster than any power of s".into())),
    }
}

fn profile_warnings(profile: &Profile) -> Vec<String> {
    match crate::verify::check_u_conditions(profile, (10.0, 100.0)) {
        Ok(report) => report.warnings(),
        Err(e) => vec![format!("profile checks failed: {e}")],
    }
}

/// Branch `k` generated by `U` at the corner selected by `orientation`.
pub fn branch_1d(
    profile: &Profile,
    k: usize,
    bc: Boundary,
    orientation: Orientation,
) -> Result<AsymptoticBranch, AsymptoticsError> {
    let nu = model_nu(k, PI / 2.0, bc)?;
    let scale_profile = profile.clone();
    let shift_profile = profile.clone();
    let sign = match orientation {
        Orientation::Left => -1.0,
        Orientation::Right => 1.0,
    };
    let (exponent, note) = remainder_of(profile);
    let mut branch = AsymptoticBranch::new(
        k,
        nu,
        orientation == Orientation::Right,
        Arc::new(move |s| scale_profile.corner_scale(s).map(|c| c * c)),
        Arc::new(move |s| Ok(Complex64::new(0.0, sign * shift_profile.value(s)?))),
    )
    .with_label(format!("k{k}-{}", if sign < 0.0 { "left" } else { "right" }))
    .with_provenance("one-dimensional imaginary potential")
    .with_remainder(exponent, note);
    branch.warnings = profile_warnings(profile);
    Ok(branch)
}

/// [`branch_1d`] for the potential perturbed by `perturbation` (written
/// `U_1`). With `Left` the perturbed corner potential is `-iU(-x) - U_1(-x)`
/// and the prediction gains `-U_1(s)`; `Right` is its conjugate mirror.
pub fn branch_1d_perturbed(
    profile: &Profile,
    perturbation: &PotentialExpr,
    k: usize,
    bc: Boundary,
    orientation: Orientation,
) -> Result<AsymptoticBranch, AsymptoticsError> {
    let base = branch_1d(profile, k, bc, orientation)?;
    let variable = profile.variable.clone();
    let bindings = profile.bindings.clone();
    let extra = perturbation.clone();
    let eval = move |s: f64| -> Result<Complex64, AsymptoticsError> {
        let v = extra.eval_at(&variable, s, &bindings)?;
        Ok(match orientation {
            Orientation::Left => -v,
            Orientation::Right => -v.conj(),
        })
    };
    let mut warnings = base.warnings.clone();
    let derivative = perturbation.differentiate(&profile.variable);
    let tail = [10.0, 20.0, 40.0, 80.0];
    let ratios: Vec<f64> = tail
        .iter()
        .filter_map(|&x| {
            let d = derivative.eval_at(&profile.variable, x, &profile.bindings).ok()?.norm();
            Some(d / profile.slope(x).ok()?)
        })
        .collect();
    if ratios.len() < tail.len() || ratios.windows(2).any(|w| w[1] > w[0] && w[1] > 1e-14) {
        warnings.push("U_1' / U' does not decrease on the sampled tail".into());
    }
    let vanishes_on_tail = tail
        .iter()
        .all(|&x| perturbation.eval_at(&profile.variable, x, &profile.bindings).is_ok_and(|v| v.norm() == 0.0));
    let note = if vanishes_on_tail {
        Some("bounded support: perturbation term O(Υ(s) s^(ν-1) / U(s))".into())
    } else {
        base.remainder_note.clone().map(|n| format!("{n}; perturbation term sampled, not bounded"))
    };
    let exponent = base.remainder_exponent;
    let shift_base = base.clone();
    let mut branch = AsymptoticBranch::new(
        k,
        base.nu,
        base.conjugated,
        Arc::new(move |s| base.scale(s)),
        Arc::new(move |s| Ok(shift_base.shift(s)? + eval(s)?)),
    )
    .with_label(format!("k{k}-{}-perturbed", if orientation == Orientation::Left { "left" } else { "right" }))
    .with_provenance("one-dimensional imaginary potential with perturbation")
    .with_remainder(exponent, note);
    branch.warnings = warnings;
    Ok(branch)
}

/// Branch of the radially reduced operator `-d²/dr² + iU(r) + U_1(r)` on
/// the annulus `(inner, s)`, where `U_1` is the centrifugal term for
/// dimension `d` and angular index `l`:
/// `U'(s)^{2/3} conj(ν_k) + iU(s) - U_1(s)`.
pub fn branch_radial(
    profile: &Profile,
    dimension: u32,
    angular: u32,
    k: usize,
    bc: Boundary,
) -> Result<AsymptoticBranch, AsymptoticsError> {
    let base = branch_1d(profile, k, bc, Orientation::Right)?;
    let centrifugal = radial_effective_potential(dimension, angular);
    let shift_base = base.clone();
    let (exponent, note) = (base.remainder_exponent, base.remainder_note.clone());
    let mut branch = AsymptoticBranch::new(
        k,
        base.nu,
        true,
        Arc::new(move |s| base.scale(s)),
        Arc::new(move |s| {
            let u1 = centrifugal.eval_at("r", s, &Bindings::new())?;
            Ok(shift_base.shift(s)? - u1)
        }),
    )
    .with_label(format!("k{k}-l{angular}"))
    .with_provenance("radial reduction")
    .with_remainder(exponent, note);
    branch.warnings = profile_warnings(profile);
    Ok(branch)
}

/// Cone branch `|∇Q(-p(s))|^{2/3} ν + Q(-p(s))` from callables giving the
/// potential value and gradient modulus at the corner point.
pub fn branch_cone(
    k: usize,
    nu: Complex64,
    value: Arc<dyn Fn(f64) -> Result<Complex64, AsymptoticsError> + Send + Sync>,
    gradient_norm: Arc<dyn Fn(f64) -> Result<f64, AsymptoticsError> + Send + Sync>,
    remainder_exponent: Option<f64>,
) -> AsymptoticBranch {
    AsymptoticBranch::new(
        k,
        nu,
        false,
        Arc::new(move |s| {
            let g = gradient_norm(s)?;
            if !(g > 0.0) {
                return Err(AsymptoticsError::ZeroGradient { at: s });
            }
            Ok(g.powf(2.0 / 3.0))
        }),
        value,
    )
    .with_label(format!("k{k}-cone"))
    .with_provenance("cone corner")
    .with_remainder(remainder_exponent, Some("plus exponentially small terms".into()))
}

/// [`branch_cone`] for a potential expression in `variables`, evaluated at
/// the corner point `corner(s)`; the gradient is taken symbolically.
pub fn branch_cone_expr(
    q: &PotentialExpr,
    variables: &[&str],
    bindings: &Bindings,
    corner: Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>,
    k: usize,
    nu: Complex64,
    remainder_exponent: Option<f64>,
) -> AsymptoticBranch {
    let names: Vec<String> = variables.iter().map(|v| v.to_string()).collect();
    let gradient: Vec<PotentialExpr> = names.iter().map(|v| q.differentiate(v)).collect();
    let bind = {
        let names = names.clone();
        let bindings = bindings.clone();
        let corner = Arc::clone(&corner);
        move |s: f64| {
            let mut b = bindings.clone();
            for (name, x) in names.iter().zip(corner(s)) {
                b.set_var(name, x);
            }
            b
        }
    };
    let bind_value = bind.clone();
    let q = q.clone();
    branch_cone(
        k,
        nu,
        Arc::new(move |s| Ok(q.eval(&bind_value(s))?)),
        Arc::new(move |s| {
            let b = bind(s);
            let mut sum = 0.0;
            for g in &gradient {
                sum += g.eval(&b)?.norm_sqr();
            }
            Ok(sum.sqrt())
        }),
        remainder_exponent,
    )
}

/// `Q_n(y) - iy` for the corner rescaling of `U` at `s`: with
/// `σ = U'(s)^{1/3}`, `Q_n(y) = σ^{-2} (iU(s) - iU(s - y/σ))`, written in
/// the variable `y`.
pub fn corner_perturbation(profile: &Profile, s: f64) -> Result<PotentialExpr, AsymptoticsError> {
    let sigma = profile.corner_scale(s)?;
    let y = PotentialExpr::parse_with_variables("y", &["y"])?;
    let argument = y.scaled(Complex64::new(-1.0 / sigma, 0.0)).plus(&PotentialExpr::constant(Complex64::new(s, 0.0)));
    let shifted = profile.expr.substitute(&profile.variable, &argument);
    let i = Complex64::new(0.0, 1.0);
    let u_s = profile.value(s)?;
    Ok(shifted
        .scaled(-i / (sigma * sigma))
        .plus(&PotentialExpr::constant(i * u_s / (sigma * sigma)))
        .minus(&y.scaled(i))
        .folded())
}

fn simpson(f: &dyn Fn(f64) -> Result<Complex64, AsymptoticsError>, length: f64, panels: usize) -> Result<Complex64, AsymptoticsError> {
    let h = length / panels as f64;
    let mut sum = f(0.0)? + f(length)?;
    for j in 1..panels {
        let w = if j % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(j as f64 * h)?;
    }
    Ok(sum * h / 3.0)
}

/// First-order correction `∫ W ψ_k² / ∫ ψ_k²` over `(0, L)` for the
/// perturbation `W` (an expression in `variable`) of the half-line
/// operator `-d²/dy² + iy`, where `ψ_k` is its k-th eigenfunction. The
/// Simpson rule is refined by halving until two successive values agree.
pub fn first_correction(
    k: usize,
    bc: Boundary,
    perturbation: &PotentialExpr,
    variable: &str,
    bindings: &Bindings,
) -> Result<Complex64, AsymptoticsError> {
    let numerator = |y: f64| -> Result<Complex64, AsymptoticsError> {
        let psi = airy_eigenfunction(k, y, bc)?;
        Ok(perturbation.eval_at(variable, y, bindings)? * psi * psi)
    };
    let denominator = |y: f64| -> Result<Complex64, AsymptoticsError> {
        let psi = airy_eigenfunction(k, y, bc)?;
        Ok(psi * psi)
    };
    let mut panels = 128;
    let mut previous = simpson(&numerator, CORRECTION_LENGTH, panels)? / simpson(&denominator, CORRECTION_LENGTH, panels)?;
    let mut change = f64::INFINITY;
    while panels < 1 << 14 {
        panels *= 2;
        let value = simpson(&numerator, CORRECTION_LENGTH, panels)? / simpson(&denominator, CORRECTION_LENGTH, panels)?;
        change = (value - previous).norm();
        if change <= 1e-11 * value.norm().max(1e-3) {
            return Ok(value);
        }
        previous = value;
    }
    Err(AsymptoticsError::Quadrature(change))
}

/// The first correction of [`branch_1d`] as a function of `s`, ready for
/// [`AsymptoticBranch::with_correction`].
pub fn corner_correction(profile: &Profile, k: usize, bc: Boundary, orientation: Orientation) -> super::ShiftFn {
    let profile = profile.clone();
    Arc::new(move |s| {
        let w = corner_perturbation(&profile, s)?;
        let c = first_correction(k, bc, &w, "y", &profile.bindings)?;
        Ok(match orientation {
            Orientation::Left => c,
            Orientation::Right => c.conj(),
        })
    })
}

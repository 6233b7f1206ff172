use serde::{Deserialize, Serialize};

use super::VerifyError;
use crate::asymptotics::Profile;
use crate::expr::{Bindings, PotentialExpr};

/// `2 - √2`: the gradient constant must stay below this for the graph norm
/// of the operator to control the Laplacian and the potential separately.
pub const CRITICAL_GRADIENT_EPS: f64 = 2.0 - std::f64::consts::SQRT_2;

/// Sampled constants in `|Q'| <= ε |Q|^{3/2} + M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientReport {
    pub eps: f64,
    pub m: f64,
    pub below_critical: bool,
    pub window: (f64, f64),
    pub samples: usize,
}

fn sample_points(window: (f64, f64), n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|j| window.0 + (window.1 - window.0) * j as f64 / (n - 1) as f64).collect()
}

/// Least-squares slope and intercept of `y` against `x`, with R².
pub(crate) fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64, f64)> {
    let n = x.len() as f64;
    if x.len() < 2 {
        return None;
    }
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Some((slope, intercept, r2))
}

/// Estimates `ε` and `M` with `|Q'| <= ε|Q|^{3/2} + M` on `window`.
///
/// `ε` is the limit superior of `|Q'| / |Q|^{3/2}` over the outer quarter of
/// the window (in `|x|`); a ratio that decays there in log-log scale gives
/// `ε = 0`. `M` is then the sampled supremum of `|Q'| - ε|Q|^{3/2}`.
pub fn check_gradient_condition(
    q: &PotentialExpr,
    variable: &str,
    bindings: &Bindings,
    window: (f64, f64),
    n_samples: usize,
) -> Result<GradientReport, VerifyError> {
    let dq = q.differentiate(variable);
    let mut points = Vec::new();
    for x in sample_points(window, n_samples) {
        if q.touches_kink(variable, x, bindings) {
            continue;
        }
        let value = q.eval_at(variable, x, bindings)?.norm();
        let slope = dq.eval_at(variable, x, bindings)?.norm();
        points.push((x, value, slope));
    }
    if points.is_empty() {
        return Err(VerifyError::EmptyWindow(window.0, window.1));
    }
    let reach = points.iter().map(|p| p.0.abs()).fold(0.0, f64::max);
    let tail: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.0.abs() >= 0.75 * reach && p.1 > 0.0 && p.0 != 0.0)
        .map(|p| (p.0.abs(), p.2 / p.1.powf(1.5)))
        .collect();
    let decaying = {
        let (lx, ly): (Vec<f64>, Vec<f64>) =
            tail.iter().filter(|t| t.1 > 0.0).map(|t| (t.0.ln(), t.1.ln())).unzip();
        ly.len() < tail.len() || linear_fit(&lx, &ly).is_some_and(|(slope, _, _)| slope < -0.1)
    };
    let eps = if decaying || tail.is_empty() { 0.0 } else { tail.iter().map(|t| t.1).fold(0.0, f64::max) };
    let m = points.iter().map(|p| p.2 - eps * p.1.powf(1.5)).fold(0.0, f64::max);
    Ok(GradientReport { eps, m, below_critical: eps < CRITICAL_GRADIENT_EPS, window, samples: points.len() })
}

/// `(2 - ε_∇(2 + √2) - ε_1) / (2 - ε_∇)`, the factor in front of
/// `‖Δf‖² + ‖Qf‖²` in the graph-norm lower bound.
pub fn graph_norm_constant(eps_nabla: f64, eps1: f64) -> Result<f64, VerifyError> {
    if !(0.0..CRITICAL_GRADIENT_EPS).contains(&eps_nabla) || !(eps1 > 0.0) {
        return Err(VerifyError::GraphNorm { eps_nabla });
    }
    let value = (2.0 - eps_nabla * (2.0 + std::f64::consts::SQRT_2) - eps1) / (2.0 - eps_nabla);
    if value <= 0.0 {
        return Err(VerifyError::GraphNorm { eps_nabla });
    }
    Ok(value)
}

/// Sampled checks of the growth hypotheses on a profile `U` over a window
/// `[x_lo, x_hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub window: (f64, f64),
    pub samples: usize,
    pub nu_exponent: f64,
    /// `U' > 0` at every sample.
    pub monotone: bool,
    /// Largest `Υ(x) = x^ν / U'(x)^{1/3}` over the upper half of the window.
    pub upsilon_sup_tail: f64,
    /// Log-log slope of `Υ` across the window.
    pub upsilon_slope: Option<f64>,
    /// Sampled supremum of `U' / (U x^ν)`.
    pub first_derivative_constant: f64,
    pub first_derivative_bounded: bool,
    /// Sampled supremum of `|U''| / (U' x^ν)`.
    pub second_derivative_constant: f64,
    pub second_derivative_bounded: bool,
    /// Smallest sampled `δ_0` with `sup_{(-s, x_lo)} U <= (1 - δ_0) U(s)`.
    pub left_dominance_delta: f64,
    pub left_dominance: bool,
    pub eps_nabla_est: f64,
    pub m_nabla_est: f64,
}

impl AssumptionReport {
    /// A `δ_0` below this still passes but is reported as fragile.
    pub const FRAGILE_DELTA: f64 = 0.05;

    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.monotone {
            out.push("U' is not positive on the whole window".to_string());
        }
        if self.upsilon_slope.is_none_or(|s| s >= 0.0) {
            out.push("Υ does not decay across the window".to_string());
        }
        if !self.first_derivative_bounded {
            out.push(format!("U'/(U x^ν) grows on the window (sup {:.3e})", self.first_derivative_constant));
        }
        if !self.second_derivative_bounded {
            out.push(format!("|U''|/(U' x^ν) grows on the window (sup {:.3e})", self.second_derivative_constant));
        }
        if !self.left_dominance {
            out.push(format!("left dominance fails: δ0 = {:.3}", self.left_dominance_delta));
        } else if self.left_dominance_delta < Self::FRAGILE_DELTA {
            out.push(format!("left dominance is fragile: δ0 = {:.3}", self.left_dominance_delta));
        }
        out
    }
}

fn grows(values: &[f64]) -> bool {
    let half = values.len() / 2;
    let early = values[..half.max(1)].iter().cloned().fold(0.0, f64::max);
    let late = values[half..].iter().cloned().fold(0.0, f64::max);
    !(late.is_finite() && late <= 1.5 * early.max(f64::MIN_POSITIVE))
}

pub fn check_u_conditions(profile: &Profile, window: (f64, f64)) -> Result<AssumptionReport, VerifyError> {
    const SAMPLES: usize = 64;
    let xs = sample_points(window, SAMPLES);
    let nu = profile.nu_exponent;
    let mut monotone = true;
    let (mut upsilon, mut first, mut second) = (Vec::new(), Vec::new(), Vec::new());
    for &x in &xs {
        let (u, du, ddu) = (profile.value(x)?, profile.slope(x)?, profile.curvature(x)?);
        monotone &= du > 0.0;
        let weight = x.powf(nu);
        upsilon.push(if du > 0.0 { weight / du.cbrt() } else { f64::INFINITY });
        first.push(if u > 0.0 { du / (u * weight) } else { f64::INFINITY });
        second.push(if du > 0.0 { ddu.abs() / (du * weight) } else { f64::INFINITY });
    }
    let upsilon_sup_tail = upsilon[SAMPLES / 2..].iter().cloned().fold(0.0, f64::max);
    let upsilon_slope = {
        let (lx, ly): (Vec<f64>, Vec<f64>) = xs
            .iter()
            .zip(&upsilon)
            .filter(|(x, v)| **x > 0.0 && v.is_finite() && **v > 0.0)
            .map(|(x, v)| (x.ln(), v.ln()))
            .unzip();
        linear_fit(&lx, &ly).map(|f| f.0)
    };

    let mut delta = f64::INFINITY;
    for &s in &xs[SAMPLES / 2..] {
        let us = profile.value(s)?;
        let mut sup = f64::NEG_INFINITY;
        for y in sample_points((-s, window.0), 200) {
            if let Ok(v) = profile.value(y) {
                sup = sup.max(v);
            }
        }
        delta = delta.min(if us > 0.0 { 1.0 - sup / us } else { f64::NEG_INFINITY });
    }

    let q = profile.expr.scaled(num_complex::Complex64::new(0.0, 1.0));
    let gradient = check_gradient_condition(&q, &profile.variable, &profile.bindings, window, SAMPLES)?;
    Ok(AssumptionReport {
        window,
        samples: SAMPLES,
        nu_exponent: nu,
        monotone,
        upsilon_sup_tail,
        upsilon_slope,
        first_derivative_constant: first.iter().cloned().fold(0.0, f64::max),
        first_derivative_bounded: !grows(&first),
        second_derivative_constant: second.iter().cloned().fold(0.0, f64::max),
        second_derivative_bounded: !grows(&second),
        left_dominance_delta: delta,
        left_dominance: delta > 0.0 && delta < 1.0 + 1e-12,
        eps_nabla_est: gradient.eps,
        m_nabla_est: gradient.m,
    })
}

//! Branches for `-d²/dx² + Q_1 + i g Q_2` as the coupling `g` grows, built
//! around stationary points of `Q_2`.

use std::f64::consts::{E, PI};
use std::sync::Arc;

use num_complex::Complex64;

use super::model::{harmonic_nu, model_nu_kappa, model_nu_odd};
use super::{AsymptoticBranch, AsymptoticsError, ShiftFn};

/// Best algebraic decay of the scaled remainder when `Q_2` vanishes like
/// `|x|^κ` and the correction `h_0` to the model like `|x|^m`. The free
/// splitting parameter is chosen to balance the two contributions.
pub fn strong_coupling_remainder_exponent(kappa: f64, h0_order: Option<f64>) -> f64 {
    let rate = match h0_order {
        Some(m) => kappa * m / (kappa + m),
        None => kappa,
    };
    -rate.min(2.0) / (2.0 + kappa)
}

fn balance_note(kappa: f64, h0_order: Option<f64>) -> String {
    match h0_order {
        Some(m) => {
            let beta = kappa / (kappa + m);
            format!(
                "g^(-min(2, κ(1-β))/(2+κ)) + sup_{{|y| <= g^(-β/(2+κ))}} |h0(y)| with κ = {kappa}, h0 ~ |y|^{m}, β = {beta:.4}"
            )
        }
        None => format!("g^(-min(2, κ(1-β))/(2+κ)) with κ = {kappa}, β -> 0"),
    }
}

/// `g^{2/(2+κ)} ν_eff + shift(g)`.
pub fn branch_strong_coupling(
    kappa: f64,
    k: usize,
    nu: Complex64,
    conjugated: bool,
    shift: ShiftFn,
    h0_order: Option<f64>,
) -> Result<AsymptoticBranch, AsymptoticsError> {
    if !(kappa > 0.0) {
        return Err(AsymptoticsError::InvalidKappa(kappa));
    }
    let power = 2.0 / (2.0 + kappa);
    Ok(AsymptoticBranch::new(k, nu, conjugated, Arc::new(move |g: f64| Ok(g.powf(power))), shift)
        .with_label(format!("k{k}"))
        .with_provenance("strong coupling")
        .with_remainder(
            Some(strong_coupling_remainder_exponent(kappa, h0_order)),
            Some(balance_note(kappa, h0_order)),
        ))
}

/// `-d²/dx² + x² + i g/(1 + |x|^κ)`: `g^{2/(κ+2)} conj(ν_{k,κ}) + ig`.
pub fn branch_schenker(kappa: f64, k: usize) -> Result<AsymptoticBranch, AsymptoticsError> {
    let nu = model_nu_kappa(kappa, k)?;
    Ok(branch_strong_coupling(kappa, k, nu, true, Arc::new(|g| Ok(Complex64::new(0.0, g))), Some(kappa))?
        .with_label(format!("k{k}-schenker"))
        .with_provenance("strong coupling, dissipative bump"))
}

/// Stationary points of `x³ e^{-x²}` used for `-d²/dx² + x² + i g x³ e^{-x²}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pt1Point {
    /// `x = 0`, where `Q_2 ~ x³`; `k ≥ 1`.
    X0,
    /// `x = -√(3/2)`; harmonic levels, `k ≥ 0`.
    X1,
    /// `x = √(3/2)`, the conjugate of `X1`.
    X2,
}

pub fn branch_pt1(point: Pt1Point, k: usize) -> Result<AsymptoticBranch, AsymptoticsError> {
    match point {
        Pt1Point::X0 => {
            let nu = model_nu_odd(3, k)?;
            Ok(branch_strong_coupling(3.0, k, nu, false, Arc::new(|_| Ok(Complex64::new(0.0, 0.0))), Some(2.0))?
                .with_label(format!("k{k}-x0"))
                .with_provenance("phase transition, smooth double well"))
        }
        Pt1Point::X1 | Pt1Point::X2 => {
            let curvature = (27.0 / (2.0 * E.powi(3))).sqrt();
            let nu = harmonic_nu(Complex64::new(0.0, curvature), k);
            // Value of i g Q_2 plus Q_1 at the stationary point.
            let depth = (3.0 / (2.0 * E)).powf(1.5);
            let branch = branch_strong_coupling(
                2.0,
                k,
                nu,
                false,
                Arc::new(move |g| Ok(Complex64::new(1.5, -g * depth))),
                Some(1.0),
            )?
            .with_label(format!("k{k}-x1"))
            .with_provenance("phase transition, smooth double well");
            Ok(if point == Pt1Point::X2 { branch.conjugate().with_label(format!("k{k}-x2")) } else { branch })
        }
    }
}

/// Stationary points for `-d²/dx² + x^{2M}/(2M) + i g x^{M-1}/(M-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pt2Point {
    /// The origin, `M ≥ 4`; `k ≥ 1`.
    X0,
    /// `e^{7iπ/6}` for `M = 2`, the conjugate of `X3`.
    X2,
    /// `e^{11iπ/6}` for `M = 2`; `k ≥ 0`.
    X3,
}

impl std::fmt::Display for Pt2Point {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Pt2Point::X0 => "x0",
            Pt2Point::X2 => "x2",
            Pt2Point::X3 => "x3",
        })
    }
}

pub fn branch_pt2(m: u32, k: usize, point: Pt2Point) -> Result<AsymptoticBranch, AsymptoticsError> {
    let unsupported = || AsymptoticsError::Unsupported { m, point: point.to_string() };
    if m < 2 || m % 2 == 1 {
        return Err(unsupported());
    }
    match point {
        Pt2Point::X0 if m >= 4 => {
            let power = 2.0 / (m as f64 + 1.0);
            let mu = model_nu_odd(m - 1, k)?;
            let nu = mu * (1.0 / (m as f64 - 1.0)).powf(power);
            Ok(AsymptoticBranch::new(
                k,
                nu,
                false,
                Arc::new(move |g: f64| Ok(g.powf(power))),
                Arc::new(|_| Ok(Complex64::new(0.0, 0.0))),
            )
            .with_label(format!("k{k}-x0"))
            .with_provenance("phase transition, polynomial")
            .with_remainder(Some(-power), None))
        }
        Pt2Point::X2 | Pt2Point::X3 if m == 2 => {
            let nu = Complex64::from_polar((2 * k + 1) as f64, PI / 6.0);
            let branch = AsymptoticBranch::new(
                k,
                nu,
                false,
                Arc::new(|g: f64| Ok(1.5f64.sqrt() * g.cbrt())),
                Arc::new(|g: f64| Ok(Complex64::from_polar(0.75 * g.powf(4.0 / 3.0), 5.0 * PI / 3.0))),
            )
            .with_label(format!("k{k}-x3"))
            .with_provenance("phase transition, polynomial")
            .with_remainder(Some(-1.0 / 6.0), None);
            Ok(if point == Pt2Point::X2 { branch.conjugate().with_label(format!("k{k}-x2")) } else { branch })
        }
        _ => Err(unsupported()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn remainder_exponents() {
        assert!((strong_coupling_remainder_exponent(3.0, Some(2.0)) + 6.0 / 25.0).abs() < 1e-15);
        assert!((strong_coupling_remainder_exponent(3.15, Some(3.15)) + 3.15 / (2.0 * 5.15)).abs() < 1e-15);
        assert!((strong_coupling_remainder_exponent(6.0, Some(6.0)) + 2.0 / 8.0).abs() < 1e-15);
        assert!((strong_coupling_remainder_exponent(2.0, None) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn schenker_scale() {
        let b = branch_schenker(3.15, 1).unwrap();
        let g: f64 = 200.0;
        assert!((b.scale(g).unwrap() - g.powf(0.388349514)).abs() < 1e-6 * g);
        assert_eq!(b.shift(g).unwrap(), Complex64::new(0.0, 200.0));
        assert!(b.conjugated);
    }

    #[test]
    fn pt1_harmonic_branch() {
        let b = branch_pt1(Pt1Point::X1, 0).unwrap();
        let g: f64 = 100.0;
        let nu = (27.0 / (2.0 * E.powi(3))).powf(0.25) * Complex64::from_polar(1.0, PI / 4.0);
        let want = g.sqrt() * nu + Complex64::new(1.5, -g * (3.0 / (2.0 * E)).powf(1.5));
        assert!((b.leading(g).unwrap() - want).norm() < 1e-12 * want.norm());
        let mirror = branch_pt1(Pt1Point::X2, 0).unwrap();
        assert_eq!(mirror.leading(g).unwrap(), b.leading(g).unwrap().conj());
    }

    #[test]
    fn pt1_shift_is_the_stationary_value() {
        let x1 = -(1.5f64).sqrt();
        let q = crate::expr::PotentialExpr::parse("x^2 + i*g*x^3*exp(-x^2)").unwrap();
        let mut bindings = crate::expr::Bindings::new();
        bindings.set_param("g", 7.0);
        let at_x1 = q.eval_at("x", x1, &bindings).unwrap();
        let b = branch_pt1(Pt1Point::X1, 0).unwrap();
        assert!((b.shift(7.0).unwrap() - at_x1).norm() < 1e-13);
    }

    #[test]
    fn pt2_quadratic_branch() {
        let b = branch_pt2(2, 0, Pt2Point::X3).unwrap();
        let g: f64 = 27.0;
        let want = 1.5f64.sqrt() * 3.0 * Complex64::from_polar(1.0, PI / 6.0)
            + 0.75 * Complex64::from_polar(81.0, 5.0 * PI / 3.0);
        assert!((b.leading(g).unwrap() - want).norm() < 1e-12 * want.norm());
        let x2 = branch_pt2(2, 0, Pt2Point::X2).unwrap();
        assert_eq!(x2.leading(g).unwrap(), b.leading(g).unwrap().conj());
        assert!(branch_pt2(2, 1, Pt2Point::X0).is_err());
        assert!(branch_pt2(4, 1, Pt2Point::X3).is_err());
        assert!(branch_pt2(3, 1, Pt2Point::X0).is_err());
    }

    #[test]
    fn pt2_origin_branch() {
        let b = branch_pt2(4, 1, Pt2Point::X0).unwrap();
        let mu = model_nu_odd(3, 1).unwrap();
        let g: f64 = 50.0;
        let want = g.powf(0.4) * (1.0f64 / 3.0).powf(0.4) * mu;
        assert!((b.leading(g).unwrap() - want).norm() < 1e-12 * want.norm());
    }
}

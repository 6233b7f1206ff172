use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::assumptions::linear_fit;
use super::VerifyError;
use crate::eig::lu::TridiagLu;
use crate::expr::{Bindings, PotentialExpr};
use crate::operator::TridiagComplex;

/// Trapezoidal weights for possibly non-uniform nodes.
fn trapezoid_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    (0..n)
        .map(|j| {
            let left = if j > 0 { nodes[j] - nodes[j - 1] } else { 0.0 };
            let right = if j + 1 < n { nodes[j + 1] - nodes[j] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

/// Trapezoidal `L²` norm of grid values.
pub fn l2_norm(nodes: &[f64], values: &[Complex64]) -> f64 {
    trapezoid_weights(nodes).iter().zip(values).map(|(w, v)| w * v.norm_sqr()).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauKappa {
    /// `sup_{|x| >= r} 1/|Q(x)|` over the nodes.
    pub tau: f64,
    /// `L²` norm of `ψ` on `|x| >= r`, when a vector is given.
    pub kappa: Option<f64>,
}

pub fn tau_kappa(
    q: &PotentialExpr,
    variable: &str,
    bindings: &Bindings,
    nodes: &[f64],
    r: f64,
    psi: Option<&[Complex64]>,
) -> Result<TauKappa, VerifyError> {
    let mut tau: f64 = 0.0;
    for &x in nodes.iter().filter(|x| x.abs() >= r) {
        let value = q.eval_at(variable, x, bindings)?.norm();
        if value == 0.0 {
            return Err(VerifyError::VanishingPotential { x });
        }
        tau = tau.max(1.0 / value);
    }
    let kappa = psi.map(|psi| {
        let masked: Vec<Complex64> =
            nodes.iter().zip(psi).map(|(x, v)| if x.abs() >= r { *v } else { Complex64::new(0.0, 0.0) }).collect();
        l2_norm(nodes, &masked)
    });
    Ok(TauKappa { tau, kappa })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub c: f64,
    pub p: f64,
    pub r2: f64,
}

/// Fits `log|ψ(x)| ≈ a - c x^p` over `window`, scanning `p` in steps of 0.01
/// on `[0.5, 4]` and solving for `(a, c)` by least squares at each `p`.
/// Values below `1e-13` of the peak are ignored.
pub fn decay_fit(positions: &[f64], psi: &[Complex64], window: (f64, f64)) -> Result<DecayFit, VerifyError> {
    let peak = psi.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let (xs, logs): (Vec<f64>, Vec<f64>) = positions
        .iter()
        .zip(psi)
        .filter(|(x, v)| **x >= window.0 && **x <= window.1 && **x > 0.0 && v.norm() > 1e-13 * peak)
        .map(|(x, v)| (*x, v.norm().ln()))
        .unzip();
    if xs.len() < 10 {
        return Err(VerifyError::WindowTooSmall { usable: xs.len() });
    }
    let mut best: Option<DecayFit> = None;
    let mut best_residual = f64::INFINITY;
    for step in 50..=400 {
        let p = step as f64 / 100.0;
        let powered: Vec<f64> = xs.iter().map(|x| x.powf(p)).collect();
        let Some((slope, intercept, r2)) = linear_fit(&powered, &logs) else { continue };
        let residual: f64 = powered.iter().zip(&logs).map(|(u, y)| (y - intercept - slope * u).powi(2)).sum();
        if residual < best_residual {
            best_residual = residual;
            best = Some(DecayFit { c: -slope, p, r2 });
        }
    }
    best.ok_or(VerifyError::WindowTooSmall { usable: xs.len() })
}

/// Hausdorff distance between a set of eigenvalues and its conjugate.
pub fn pt_symmetry_defect(values: &[Complex64]) -> f64 {
    values
        .iter()
        .map(|z| values.iter().map(|w| (z.conj() - w).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

/// `Σ (λ + z0)^{-r}`.
pub fn trace_sum(values: &[Complex64], r: i32, z0: Complex64) -> Result<Complex64, VerifyError> {
    let mut sum = Complex64::new(0.0, 0.0);
    for (index, lambda) in values.iter().enumerate() {
        let base = lambda + z0;
        if base.norm() == 0.0 {
            return Err(VerifyError::Pole { index });
        }
        sum += base.powi(-r);
    }
    Ok(sum)
}

fn embedding_offset(inner: &[f64], outer: &[f64]) -> Result<usize, VerifyError> {
    let spacing = |v: &[f64]| if v.len() > 1 { v[1] - v[0] } else { 0.0 };
    let h = spacing(outer);
    let offset = outer
        .iter()
        .position(|x| (x - inner[0]).abs() <= 1e-9 * h.abs().max(1e-300))
        .ok_or_else(|| VerifyError::GridsNotNested(format!("node {} not on the outer grid", inner[0])))?;
    if offset + inner.len() > outer.len()
        || inner.iter().zip(&outer[offset..]).any(|(a, b)| (a - b).abs() > 1e-9 * h.abs())
    {
        return Err(VerifyError::GridsNotNested("inner nodes do not coincide with outer nodes".into()));
    }
    Ok(offset)
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Spectral norm of `R_outer(z0) - E R_inner(z0) Eᵀ`, where `R(z) = (A - z)^{-1}`
/// and `E` extends inner-grid vectors by zero. The inner grid must be a
/// contiguous run of the outer nodes. Computed by power iteration on `MᴴM`
/// to `1e-6` relative change.
pub fn resolvent_gap(
    inner: (&TridiagComplex, &[f64]),
    outer: (&TridiagComplex, &[f64]),
    z0: Complex64,
) -> Result<f64, VerifyError> {
    let offset = embedding_offset(inner.1, outer.1)?;
    let lu_in = TridiagLu::factor(inner.0, z0).map_err(|_| VerifyError::SingularShift(z0))?;
    let lu_out = TridiagLu::factor(outer.0, z0).map_err(|_| VerifyError::SingularShift(z0))?;
    let m = outer.0.len();
    let k = inner.0.len();
    let apply = |x: &[Complex64], adjoint: bool| -> Vec<Complex64> {
        let mut full = x.to_vec();
        let mut part = x[offset..offset + k].to_vec();
        if adjoint {
            lu_out.solve_adjoint(&mut full);
            lu_in.solve_adjoint(&mut part);
        } else {
            lu_out.solve(&mut full);
            lu_in.solve(&mut part);
        }
        for (f, p) in full[offset..offset + k].iter_mut().zip(&part) {
            *f -= p;
        }
        full
    };
    let mut x: Vec<Complex64> =
        (0..m).map(|j| Complex64::new(1.0 + 0.5 * ((j * 7919) % 101) as f64 / 101.0, 0.0)).collect();
    let scale = norm(&x);
    x.iter_mut().for_each(|v| *v /= scale);
    let mut estimate = 0.0;
    for _ in 0..1000 {
        let y = apply(&apply(&x, false), true);
        let value = norm(&y);
        if value == 0.0 {
            return Ok(0.0);
        }
        x = y.into_iter().map(|v| v / value).collect();
        let converged = (value - estimate).abs() <= 1e-6 * value;
        estimate = value;
        if converged {
            break;
        }
    }
    Ok(estimate.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{assemble, unknown_nodes, Grid1D, OperatorSpec};

    #[test]
    fn tau_for_imaginary_square() {
        let q = PotentialExpr::parse("i*x^2").unwrap();
        let nodes: Vec<f64> = (-20..=20).map(|j| j as f64).collect();
        let r = tau_kappa(&q, "x", &Bindings::new(), &nodes, 10.0, None).unwrap();
        assert!((r.tau - 0.01).abs() < 1e-15);
        let psi: Vec<Complex64> =
            nodes.iter().map(|x| if x.abs() < 10.0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }).collect();
        let r = tau_kappa(&q, "x", &Bindings::new(), &nodes, 10.0, Some(&psi)).unwrap();
        assert_eq!(r.kappa, Some(0.0));
        assert!(tau_kappa(&PotentialExpr::parse("x - 12").unwrap(), "x", &Bindings::new(), &nodes, 10.0, None).is_err());
    }

    #[test]
    fn planted_decay_exponent() {
        let xs: Vec<f64> = (1..400).map(|j| j as f64 * 0.02).collect();
        let psi: Vec<Complex64> = xs.iter().map(|x| Complex64::new((-x.powf(1.5)).exp(), 0.0)).collect();
        let fit = decay_fit(&xs, &psi, (0.5, 7.0)).unwrap();
        assert!((fit.p - 1.5).abs() <= 0.05, "{fit:?}");
        assert!((fit.c - 1.0).abs() < 0.05);
        assert!(decay_fit(&xs, &psi, (1.0, 1.1)).is_err());
    }

    #[test]
    fn symmetry_defect_cases() {
        assert_eq!(pt_symmetry_defect(&[Complex64::new(1.0, 0.0), Complex64::new(4.0, 0.0)]), 0.0);
        assert_eq!(pt_symmetry_defect(&[Complex64::new(1.0, 1.0), Complex64::new(1.0, -1.0)]), 0.0);
        assert!((pt_symmetry_defect(&[Complex64::new(1.0, 1.0)]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn trace_sums() {
        let one = Complex64::new(1.0, 0.0);
        assert_eq!(trace_sum(&[Complex64::new(0.0, 0.0)], 1, one).unwrap(), one);
        let v = [Complex64::new(1.0, 0.0), Complex64::new(3.0, 0.0)];
        assert!((trace_sum(&v, 2, one).unwrap() - Complex64::new(0.3125, 0.0)).norm() < 1e-15);
        assert!(matches!(trace_sum(&[-one], 2, one), Err(VerifyError::Pole { index: 0 })));
    }

    #[test]
    fn identical_operators_have_no_gap() {
        let spec = OperatorSpec::new(PotentialExpr::parse("i*x").unwrap(), (-3.0, 3.0)).unwrap();
        let grid = Grid1D::new(-3.0, 3.0, 59).unwrap();
        let a = assemble(&spec, &grid).unwrap();
        let nodes = unknown_nodes(&spec, &grid);
        let gap = resolvent_gap((&a, &nodes), (&a, &nodes), Complex64::new(-1.0, 0.0)).unwrap();
        assert_eq!(gap, 0.0);
    }

    #[test]
    fn misaligned_grids_are_rejected() {
        let spec = OperatorSpec::new(PotentialExpr::parse("i*x").unwrap(), (-3.0, 3.0)).unwrap();
        let a = assemble(&spec, &Grid1D::new(-3.0, 3.0, 59).unwrap()).unwrap();
        let nodes = unknown_nodes(&spec, &Grid1D::new(-3.0, 3.0, 59).unwrap());
        let shifted: Vec<f64> = nodes.iter().map(|x| x + 0.01).collect();
        assert!(resolvent_gap((&a, &shifted), (&a, &nodes), Complex64::new(-1.0, 0.0)).is_err());
    }
}

//! The Airy function `Ai` on the complex plane, its zeros, and the rotated
//! Airy eigenvalues that seed every asymptotic branch.
//!
//! Evaluation is restricted to `|z| <= 40`. Inside `|z| <= 8` a
//! double-double Maclaurin series is summed; outside, the large-argument
//! expansion is used directly in `|arg z| <= 2π/3` and through the
//! three-term connection formula elsewhere.

mod dd;
mod zeros;

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::Boundary;
use dd::{Dd, DdComplex};

pub use zeros::{ai_prime_zero, ai_zero, ZeroTable, DEFAULT_ZERO_COUNT};

/// Largest `|z|` at which the accuracy targets are met.
pub const ENVELOPE: f64 = 40.0;
const SERIES_RADIUS: f64 = 8.0;

// Ai(0) and -Ai'(0) split into double-double parts.
const AI0: Dd = Dd { hi: 0.3550280538878172, lo: 2.05233632436212e-17 };
const AIP0: Dd = Dd { hi: 0.2588194037928068, lo: -2.522243111610832e-17 };

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AiryError {
    #[error("|z| = {0} is outside the accuracy envelope |z| <= 40")]
    OutsideEnvelope(f64),
    #[error("argument is not finite")]
    NotFinite,
    #[error("zero index must be at least 1, got {0}")]
    InvalidIndex(usize),
    #[error("Newton iteration for zero {0} did not converge")]
    NoConvergence(usize),
}

pub fn airy_ai(z: Complex64) -> Result<Complex64, AiryError> {
    airy_pair(z).map(|(ai, _)| ai)
}

pub fn airy_ai_prime(z: Complex64) -> Result<Complex64, AiryError> {
    airy_pair(z).map(|(_, aip)| aip)
}

/// `(Ai(z), Ai'(z))`.
pub fn airy_pair(z: Complex64) -> Result<(Complex64, Complex64), AiryError> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(AiryError::NotFinite);
    }
    let r = z.norm();
    if r > ENVELOPE {
        return Err(AiryError::OutsideEnvelope(r));
    }
    let (mut ai, mut aip) = if r <= SERIES_RADIUS {
        series(z)
    } else if z.arg().abs() <= 2.0 * PI / 3.0 {
        asymptotic(z)
    } else {
        let w = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        let w2 = w * w;
        let (a1, d1) = asymptotic(w * z);
        let (a2, d2) = asymptotic(w2 * z);
        (-w * a1 - w2 * a2, -w2 * d1 - w * d2)
    };
    if z.im == 0.0 {
        ai.im = 0.0;
        aip.im = 0.0;
    }
    Ok((ai, aip))
}

fn series(z: Complex64) -> (Complex64, Complex64) {
    let zd = DdComplex::from_parts(z.re, z.im);
    let z3 = zd * zd * zd;
    let one = DdComplex::from_parts(1.0, 0.0);
    // f and g are the even- and odd-type solutions, fp and gp their derivatives
    let (mut f_term, mut g_term) = (one, zd);
    let (mut f, mut g) = (one, zd);
    let mut fp_term = (zd * zd).div_f64(2.0);
    let mut fp = fp_term;
    let mut gp_term = one;
    let mut gp = one;
    let mut largest = 1.0f64.max(zd.magnitude());
    for k in 1..400 {
        let kf = k as f64;
        f_term = (f_term * z3).div_f64((3.0 * kf - 1.0) * (3.0 * kf));
        g_term = (g_term * z3).div_f64((3.0 * kf) * (3.0 * kf + 1.0));
        f = f + f_term;
        g = g + g_term;
        if k >= 2 {
            fp_term = (fp_term * z3).div_f64((3.0 * kf - 3.0) * (3.0 * kf - 1.0));
            fp = fp + fp_term;
        }
        gp_term = (gp_term * z3).div_f64((3.0 * kf - 2.0) * (3.0 * kf));
        gp = gp + gp_term;
        let biggest_term = f_term
            .magnitude()
            .max(g_term.magnitude())
            .max(fp_term.magnitude())
            .max(gp_term.magnitude());
        largest = largest.max(biggest_term);
        if k > 2 && biggest_term < 1e-34 * largest {
            break;
        }
    }
    let ai = f.scale(AI0) - g.scale(AIP0);
    let aip = fp.scale(AI0) - gp.scale(AIP0);
    (ai.to_c64(), aip.to_c64())
}

/// Large-argument expansion, valid for `|arg z| <= 2π/3` and `|z| > 8`.
fn asymptotic(z: Complex64) -> (Complex64, Complex64) {
    let sqrt_z = z.sqrt();
    let quarter = sqrt_z.sqrt();
    let zeta = z * sqrt_z * (2.0 / 3.0);
    let inv = 1.0 / zeta;
    let mut u = 1.0f64;
    let mut power = Complex64::new(1.0, 0.0);
    let mut sum_u = Complex64::new(1.0, 0.0);
    let mut sum_v = Complex64::new(1.0, 0.0);
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        let v = -u * (6.0 * kf + 1.0) / (6.0 * kf - 1.0);
        power *= -inv;
        let tu = power * u;
        let tv = power * v;
        let size = tu.norm().max(tv.norm());
        if size > last {
            break;
        }
        sum_u += tu;
        sum_v += tv;
        last = size;
        if size < 1e-17 {
            break;
        }
    }
    let pref = (-zeta).exp() / (2.0 * PI.sqrt());
    (pref / quarter * sum_u, -pref * quarter * sum_v)
}

/// Rotated Airy eigenvalue `e^{i(2ω/3 - π)} μ_k`, where `μ_k` is the k-th
/// zero of `Ai` (Dirichlet corner) or of `Ai'` (Neumann corner).
pub fn model_nu(k: usize, omega: f64, bc: Boundary) -> Result<Complex64, AiryError> {
    let mu = corner_zero(k, bc)?;
    Ok(Complex64::from_polar(1.0, 2.0 * omega / 3.0 - PI) * mu)
}

/// `Ai(e^{iπ/6} y + μ_k)`: the eigenfunction of `-d²/dy² + iy` on the half
/// line for the eigenvalue `model_nu(k, π/2, bc)`.
pub fn airy_eigenfunction(k: usize, y: f64, bc: Boundary) -> Result<Complex64, AiryError> {
    let mu = corner_zero(k, bc)?;
    airy_ai(Complex64::from_polar(y, PI / 6.0) + mu)
}

fn corner_zero(k: usize, bc: Boundary) -> Result<f64, AiryError> {
    match bc {
        Boundary::Dirichlet => ai_zero(k),
        Boundary::Neumann => ai_prime_zero(k),
    }
}

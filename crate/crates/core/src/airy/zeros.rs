use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use super::{airy_pair, AiryError};

pub const DEFAULT_ZERO_COUNT: usize = 20;

/// The first zeros of `Ai` and `Ai'`, both negative and decreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroTable {
    pub ai: Vec<f64>,
    pub ai_prime: Vec<f64>,
}

impl ZeroTable {
    pub fn new(count: usize) -> Result<Self, AiryError> {
        let ai = (1..=count).map(compute_ai_zero).collect::<Result<_, _>>()?;
        let ai_prime = (1..=count).map(compute_ai_prime_zero).collect::<Result<_, _>>()?;
        Ok(ZeroTable { ai, ai_prime })
    }

    pub fn default_table() -> &'static ZeroTable {
        static TABLE: OnceLock<ZeroTable> = OnceLock::new();
        TABLE.get_or_init(|| ZeroTable::new(DEFAULT_ZERO_COUNT).expect("default zero table"))
    }
}

/// k-th zero of `Ai`, counting from 1.
pub fn ai_zero(k: usize) -> Result<f64, AiryError> {
    if k == 0 {
        return Err(AiryError::InvalidIndex(k));
    }
    match ZeroTable::default_table().ai.get(k - 1) {
        Some(&z) => Ok(z),
        None => compute_ai_zero(k),
    }
}

/// k-th zero of `Ai'`, counting from 1.
pub fn ai_prime_zero(k: usize) -> Result<f64, AiryError> {
    if k == 0 {
        return Err(AiryError::InvalidIndex(k));
    }
    match ZeroTable::default_table().ai_prime.get(k - 1) {
        Some(&z) => Ok(z),
        None => compute_ai_prime_zero(k),
    }
}

fn real_pair(x: f64) -> Result<(f64, f64), AiryError> {
    let (a, d) = airy_pair(Complex64::new(x, 0.0))?;
    Ok((a.re, d.re))
}

fn compute_ai_zero(k: usize) -> Result<f64, AiryError> {
    let t = 3.0 * PI * (4.0 * k as f64 - 1.0) / 8.0;
    polish(k, -t.powf(2.0 / 3.0), real_pair)
}

fn compute_ai_prime_zero(k: usize) -> Result<f64, AiryError> {
    let t = 3.0 * PI * (4.0 * k as f64 - 3.0) / 8.0;
    polish(k, -t.powf(2.0 / 3.0), |x| {
        let (a, d) = real_pair(x)?;
        Ok((d, x * a))
    })
}

/// Newton's method kept inside a sign-change bracket around `seed`.
fn polish(
    k: usize,
    seed: f64,
    f: impl Fn(f64) -> Result<(f64, f64), AiryError>,
) -> Result<f64, AiryError> {
    let mut half_width = 0.3 * PI / (seed.abs() + 1.0).sqrt();
    let (mut lo, mut hi) = (seed - half_width, seed + half_width);
    let mut tries = 0;
    while f(lo)?.0.signum() == f(hi)?.0.signum() {
        tries += 1;
        if tries > 8 {
            return Err(AiryError::NoConvergence(k));
        }
        half_width *= 1.3;
        lo = seed - half_width;
        hi = seed + half_width;
    }
    let f_lo = f(lo)?.0;
    let mut x = seed;
    for _ in 0..100 {
        let (v, dv) = f(x)?;
        if v == 0.0 {
            return Ok(x);
        }
        if v.signum() == f_lo.signum() {
            lo = x;
        } else {
            hi = x;
        }
        let mut next = x - v / dv;
        if !(next > lo.min(hi) && next < lo.max(hi)) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs() {
            return Ok(next);
        }
        x = next;
    }
    Err(AiryError::NoConvergence(k))
}

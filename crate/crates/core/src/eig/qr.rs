//! Eigenvalues of a complex upper Hessenberg matrix by single-shift QR.
//! Only the active diagonal block is updated since no Schur vectors are
//! needed.

use num_complex::Complex64;

use super::{EigError, EigOptions};
use crate::operator::TridiagComplex;

/// Largest matrix accepted by [`eigen_dense`].
pub const DENSE_LIMIT: usize = 5000;

fn cabs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// All eigenvalues, sorted by imaginary part and then real part.
pub fn eigen_dense(a: &TridiagComplex, opts: &EigOptions) -> Result<Vec<Complex64>, EigError> {
    let n = a.len();
    if n > DENSE_LIMIT {
        return Err(EigError::TooLarge(n));
    }
    let mut h = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        h[i * n + i] = a.diag[i];
        if i + 1 < n {
            h[i * n + i + 1] = a.sup[i];
            h[(i + 1) * n + i] = a.sub[i];
        }
    }
    let mut values = hessenberg_eigenvalues(&mut h, n, opts)?;
    sort_spectrum(&mut values);
    Ok(values)
}

pub fn sort_spectrum(values: &mut [Complex64]) {
    values.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
}

fn givens(f: Complex64, g: Complex64) -> (f64, Complex64) {
    if g == Complex64::new(0.0, 0.0) {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if f == Complex64::new(0.0, 0.0) {
        return (0.0, g.conj() / g.norm());
    }
    let (nf, ng) = (f.norm(), g.norm());
    let norm = nf.hypot(ng);
    let alpha = f / nf;
    (nf / norm, alpha * g.conj() / norm)
}

fn wilkinson_shift(h: &[Complex64], n: usize, i: usize) -> Complex64 {
    let at = |r: usize, c: usize| h[r * n + c];
    let mut t = at(i, i);
    let u = at(i - 1, i).sqrt() * at(i, i - 1).sqrt();
    let s = cabs1(u);
    if s != 0.0 {
        let x = (at(i - 1, i - 1) - t) * 0.5;
        let sx = cabs1(x);
        let s = s.max(sx);
        let mut y = ((x / s) * (x / s) + (u / s) * (u / s)).sqrt() * s;
        if sx > 0.0 {
            let xs = x / sx;
            if xs.re * y.re + xs.im * y.im < 0.0 {
                y = -y;
            }
        }
        t -= u * (u / (x + y));
    }
    t
}

fn hessenberg_eigenvalues(
    h: &mut [Complex64],
    n: usize,
    opts: &EigOptions,
) -> Result<Vec<Complex64>, EigError> {
    let ulp = f64::EPSILON;
    let tol = opts.qr_tol.max(ulp);
    let small = f64::MIN_POSITIVE * (n as f64 / ulp);
    let mut values = vec![Complex64::new(0.0, 0.0); n];
    let mut ihi = n as isize - 1;
    while ihi >= 0 {
        let hi = ihi as usize;
        let mut its = 0usize;
        loop {
            let mut l = hi;
            while l > 0 {
                let sub = h[l * n + l - 1];
                if cabs1(sub) <= small {
                    break;
                }
                let mut tst = cabs1(h[(l - 1) * n + l - 1]) + cabs1(h[l * n + l]);
                if tst == 0.0 {
                    if l >= 2 {
                        tst += h[(l - 1) * n + l - 2].re.abs();
                    }
                    if l < hi {
                        tst += h[(l + 1) * n + l].re.abs();
                    }
                }
                if cabs1(sub) <= tol * tst {
                    let above = h[(l - 1) * n + l];
                    let ab = cabs1(sub).max(cabs1(above));
                    let ba = cabs1(sub).min(cabs1(above));
                    let diff = h[(l - 1) * n + l - 1] - h[l * n + l];
                    let aa = cabs1(h[l * n + l]).max(cabs1(diff));
                    let bb = cabs1(h[l * n + l]).min(cabs1(diff));
                    let s = aa + ab;
                    if ba * (ab / s) <= small.max(tol * (bb * (aa / s))) {
                        break;
                    }
                }
                l -= 1;
            }
            if l > 0 {
                h[l * n + l - 1] = Complex64::new(0.0, 0.0);
            }
            if l == hi {
                values[hi] = h[hi * n + hi];
                ihi -= 1;
                break;
            }
            its += 1;
            if its > opts.max_qr_sweeps {
                return Err(EigError::NoConvergence { lo: l, hi, sweeps: its - 1 });
            }
            let shift = if its.is_multiple_of(10) {
                h[hi * n + hi] + 0.75 * h[hi * n + hi - 1].re.abs()
            } else {
                wilkinson_shift(h, n, hi)
            };
            qr_sweep(h, n, l, hi, shift);
        }
    }
    Ok(values)
}

/// One explicit shifted QR step on the block `l..=hi`.
fn qr_sweep(h: &mut [Complex64], n: usize, l: usize, hi: usize, shift: Complex64) {
    for k in l..=hi {
        h[k * n + k] -= shift;
    }
    let mut rotations = Vec::with_capacity(hi - l);
    for k in l..hi {
        let (c, s) = givens(h[k * n + k], h[(k + 1) * n + k]);
        let (upper, lower) = h.split_at_mut((k + 1) * n);
        let row_k = &mut upper[k * n + k..k * n + hi + 1];
        let row_k1 = &mut lower[k..hi + 1];
        for (x, y) in row_k.iter_mut().zip(row_k1.iter_mut()) {
            let (a, b) = (*x, *y);
            *x = a * c + s * b;
            *y = b * c - s.conj() * a;
        }
        rotations.push((c, s));
    }
    for (idx, &(c, s)) in rotations.iter().enumerate() {
        let k = l + idx;
        for i in l..=(k + 1).min(hi) {
            let (a, b) = (h[i * n + k], h[i * n + k + 1]);
            h[i * n + k] = a * c + b * s.conj();
            h[i * n + k + 1] = b * c - a * s;
        }
    }
    for k in l..=hi {
        h[k * n + k] += shift;
    }
}

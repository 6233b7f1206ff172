//! LU factorisation of a shifted tridiagonal matrix with partial pivoting.
//! Row interchanges add a second superdiagonal `du2`.

use num_complex::Complex64;

use crate::operator::TridiagComplex;

fn cabs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

#[derive(Debug, Clone)]
pub(crate) struct TridiagLu {
    dl: Vec<Complex64>,
    d: Vec<Complex64>,
    du: Vec<Complex64>,
    du2: Vec<Complex64>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    /// Factors `A - shift`. Returns the index of a zero pivot on failure.
    pub fn factor(a: &TridiagComplex, shift: Complex64) -> Result<Self, usize> {
        let n = a.len();
        let mut dl = a.sub.clone();
        let mut d: Vec<Complex64> = a.diag.iter().map(|v| v - shift).collect();
        let mut du = a.sup.clone();
        let mut du2 = vec![Complex64::new(0.0, 0.0); n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if cabs1(d[i]) >= cabs1(dl[i]) {
                if cabs1(d[i]) != 0.0 {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        if let Some(i) = d.iter().position(|v| *v == Complex64::new(0.0, 0.0)) {
            return Err(i);
        }
        Ok(TridiagLu { dl, d, du, du2, swapped })
    }

    /// Overwrites `b` with `(A - shift)^{-1} b`.
    pub fn solve(&self, b: &mut [Complex64]) {
        let n = self.d.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }

    /// Overwrites `b` with `(A - shift)^{-T} b` (plain transpose).
    pub fn solve_transpose(&self, b: &mut [Complex64]) {
        let n = self.d.len();
        b[0] /= self.d[0];
        if n > 1 {
            b[1] = (b[1] - self.du[0] * b[0]) / self.d[1];
        }
        for i in 2..n {
            b[i] = (b[i] - self.du[i - 1] * b[i - 1] - self.du2[i - 2] * b[i - 2]) / self.d[i];
        }
        for i in (0..n - 1).rev() {
            if self.swapped[i] {
                let temp = b[i + 1];
                b[i + 1] = b[i] - self.dl[i] * temp;
                b[i] = temp;
            } else {
                b[i] -= self.dl[i] * b[i + 1];
            }
        }
    }

    /// Overwrites `b` with `(A - shift)^{-H} b`.
    pub fn solve_adjoint(&self, b: &mut [Complex64]) {
        b.iter_mut().for_each(|v| *v = v.conj());
        self.solve_transpose(b);
        b.iter_mut().for_each(|v| *v = v.conj());
    }
}

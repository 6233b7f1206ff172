use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::AsymptoticsError;

pub type ScaleFn = Arc<dyn Fn(f64) -> Result<f64, AsymptoticsError> + Send + Sync>;
pub type ShiftFn = Arc<dyn Fn(f64) -> Result<Complex64, AsymptoticsError> + Send + Sync>;

/// A predicted eigenvalue curve `p ↦ scale(p) · ν_eff + shift(p)`, where
/// `ν_eff` is `nu` or its conjugate.
#[derive(Clone)]
pub struct AsymptoticBranch {
    pub k: usize,
    pub label: String,
    pub nu: Complex64,
    pub conjugated: bool,
    /// Predicted power of the parameter in the scaled remainder; `None` when
    /// the remainder decays faster than any power.
    pub remainder_exponent: Option<f64>,
    pub remainder_note: Option<String>,
    pub provenance: String,
    /// Advisory messages from hypothesis checks done while building.
    pub warnings: Vec<String>,
    scale: ScaleFn,
    shift: ShiftFn,
    correction: Option<ShiftFn>,
}

impl AsymptoticBranch {
    pub fn new(k: usize, nu: Complex64, conjugated: bool, scale: ScaleFn, shift: ShiftFn) -> Self {
        AsymptoticBranch {
            k,
            label: format!("k{k}"),
            nu,
            conjugated,
            remainder_exponent: None,
            remainder_note: None,
            provenance: String::new(),
            warnings: Vec::new(),
            scale,
            shift,
            correction: None,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.provenance = provenance.into();
        self
    }

    pub fn with_remainder(mut self, exponent: Option<f64>, note: Option<String>) -> Self {
        self.remainder_exponent = exponent;
        self.remainder_note = note;
        self
    }

    /// Adds a correction to `ν_eff`, in the same units as `ν`.
    pub fn with_correction(mut self, correction: ShiftFn) -> Self {
        self.correction = Some(correction);
        self
    }

    pub fn has_correction(&self) -> bool {
        self.correction.is_some()
    }

    pub fn nu_eff(&self) -> Complex64 {
        if self.conjugated {
            self.nu.conj()
        } else {
            self.nu
        }
    }

    pub fn scale(&self, p: f64) -> Result<f64, AsymptoticsError> {
        (self.scale)(p)
    }

    pub fn shift(&self, p: f64) -> Result<Complex64, AsymptoticsError> {
        (self.shift)(p)
    }

    /// Leading-order prediction.
    pub fn leading(&self, p: f64) -> Result<Complex64, AsymptoticsError> {
        Ok(self.scale(p)? * self.nu_eff() + self.shift(p)?)
    }

    /// Prediction including the correction, or the leading term if none is
    /// attached.
    pub fn corrected(&self, p: f64) -> Result<Complex64, AsymptoticsError> {
        let extra = match &self.correction {
            Some(c) => c(p)?,
            None => Complex64::new(0.0, 0.0),
        };
        Ok(self.scale(p)? * (self.nu_eff() + extra) + self.shift(p)?)
    }

    /// `(λ - leading(p)) / scale(p)`.
    pub fn scaled_remainder(&self, p: f64, lambda: Complex64) -> Result<Complex64, AsymptoticsError> {
        Ok((lambda - self.leading(p)?) / self.scale(p)?)
    }

    /// The mirror branch: every prediction is conjugated.
    pub fn conjugate(&self) -> Self {
        let shift = Arc::clone(&self.shift);
        let correction = self.correction.clone().map(|c| -> ShiftFn { Arc::new(move |p| c(p).map(|v| v.conj())) });
        AsymptoticBranch {
            label: format!("{}*", self.label),
            conjugated: !self.conjugated,
            shift: Arc::new(move |p| shift(p).map(|v| v.conj())),
            correction,
            ..self.clone()
        }
    }
}

impl fmt::Debug for AsymptoticBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AsymptoticBranch")
            .field("k", &self.k)
            .field("label", &self.label)
            .field("nu", &self.nu)
            .field("conjugated", &self.conjugated)
            .field("remainder_exponent", &self.remainder_exponent)
            .field("provenance", &self.provenance)
            .finish_non_exhaustive()
    }
}

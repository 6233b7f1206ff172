use crate::expr::PotentialExpr;

use super::{Grid1D, OperatorError, OperatorSpec};

/// Points per wavelength used by [`grid_for`] unless overridden.
pub const DEFAULT_PPW: f64 = 40.0;

/// How the computational interval grows with the truncation parameter `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TruncationRule {
    /// `(-s, s)`.
    Symmetric,
    /// `(left, s)`; without an explicit left end, `(-(s + 40), s)`.
    LeftCut { left: Option<f64> },
    /// `(inner, s)` for radial reductions.
    Annulus { inner: f64 },
    /// `(left, right)` independent of the parameter.
    Fixed { left: f64, right: f64 },
}

impl TruncationRule {
    pub fn interval(&self, s: f64) -> (f64, f64) {
        match *self {
            TruncationRule::Symmetric => (-s, s),
            TruncationRule::LeftCut { left } => (left.unwrap_or(-(s + 40.0)), s),
            TruncationRule::Annulus { inner } => (inner, s),
            TruncationRule::Fixed { left, right } => (left, right),
        }
    }
}

/// One operator per schedule entry. The schedule must be positive and
/// strictly increasing; if the potential mentions the parameter `s` it is
/// bound to the schedule value.
pub fn truncation_family(
    template: &OperatorSpec,
    rule: TruncationRule,
    schedule: &[f64],
) -> Result<Vec<OperatorSpec>, OperatorError> {
    for (index, &value) in schedule.iter().enumerate() {
        let increasing = index == 0 || value > schedule[index - 1];
        if !(value > 0.0 && value.is_finite() && increasing) {
            return Err(OperatorError::BadSchedule { index, value });
        }
        if let TruncationRule::Annulus { inner } = rule {
            if value <= inner {
                return Err(OperatorError::ParameterBelowInner(value, inner));
            }
        }
    }
    schedule
        .iter()
        .map(|&s| {
            let mut spec = template.clone().with_interval(rule.interval(s))?;
            if uses_s(&spec.potential) {
                spec.bindings.set_param("s", s);
            }
            Ok(spec)
        })
        .collect()
}

fn uses_s(p: &PotentialExpr) -> bool {
    p.uses_parameter("s")
}

/// `n = ceil(ppw (b - a) max(1, |λ_target|^{1/2}))` interior points.
pub fn grid_for(spec: &OperatorSpec, ppw: f64, lambda_target: f64) -> Result<Grid1D, OperatorError> {
    let (a, b) = spec.interval;
    let n = (ppw * (b - a) * lambda_target.abs().sqrt().max(1.0)).ceil() as usize;
    Grid1D::new(a, b, n.max(3))
}

use std::collections::BTreeMap;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::assumptions::linear_fit;
use crate::asymptotics::AsymptoticBranch;
use crate::eig::Spectrum;

/// Matching radius in units of the branch scale.
pub const DEFAULT_WINDOW_FACTOR: f64 = 0.5;

/// Computed eigenvalues at one parameter value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub parameter: f64,
    pub eigenvalues: Vec<Complex64>,
}

impl SweepPoint {
    /// Uses the extrapolated values of the trusted entries.
    pub fn from_spectrum(parameter: f64, spectrum: &Spectrum) -> Self {
        SweepPoint { parameter, eigenvalues: spectrum.trusted_values() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub branch: String,
    pub k: usize,
    pub lambda: Complex64,
    pub predicted: Complex64,
    /// `(λ - λ_pred) / scale`.
    pub rho: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterRecord {
    pub parameter: f64,
    pub matches: Vec<MatchRecord>,
    /// Eigenvalues inside some branch window that were not matched.
    pub unmatched: Vec<Complex64>,
    /// Branches that could not be evaluated here, with the reason.
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchFit {
    pub branch: String,
    pub k: usize,
    /// Log-log slope of `|ρ|` against the parameter over the fit tail.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r2: Option<f64>,
    pub points: usize,
    pub predicted_exponent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub window_factor: f64,
    pub points: Vec<ParameterRecord>,
    pub fits: Vec<BranchFit>,
}

fn match_point(point: &SweepPoint, branches: &[AsymptoticBranch], window_factor: f64) -> ParameterRecord {
    let p = point.parameter;
    let mut failures = Vec::new();
    let mut candidates = Vec::new();
    let mut evaluated = Vec::with_capacity(branches.len());
    for (bi, branch) in branches.iter().enumerate() {
        match branch.leading(p).and_then(|pred| Ok((pred, branch.scale(p)?))) {
            Ok((pred, scale)) => {
                let radius = window_factor * scale.abs();
                for (ei, lambda) in point.eigenvalues.iter().enumerate() {
                    let distance = (lambda - pred).norm();
                    if distance <= radius {
                        candidates.push((distance, bi, ei));
                    }
                }
                evaluated.push(Some((pred, scale)));
            }
            Err(e) => {
                failures.push(format!("{}: {e}", branch.label));
                evaluated.push(None);
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut branch_used = vec![false; branches.len()];
    let mut value_used = vec![false; point.eigenvalues.len()];
    let mut matches = Vec::new();
    for &(_, bi, ei) in &candidates {
        if branch_used[bi] || value_used[ei] {
            continue;
        }
        branch_used[bi] = true;
        value_used[ei] = true;
        let (pred, scale) = evaluated[bi].expect("candidate from evaluated branch");
        let lambda = point.eigenvalues[ei];
        matches.push(MatchRecord {
            branch: branches[bi].label.clone(),
            k: branches[bi].k,
            lambda,
            predicted: pred,
            rho: (lambda - pred) / scale,
        });
    }
    matches.sort_by_key(|m| branches.iter().position(|b| b.label == m.branch));
    let mut in_window: Vec<usize> = candidates.iter().map(|c| c.2).filter(|&ei| !value_used[ei]).collect();
    in_window.sort_unstable();
    in_window.dedup();
    ParameterRecord { parameter: p, matches, unmatched: in_window.iter().map(|&ei| point.eigenvalues[ei]).collect(), failures }
}

/// Log-log fit of `|ρ|` against the parameter over the matched tail, the
/// larger half of the parameters in `samples`. Returns
/// `(slope, intercept, r²)` and the number of points used.
pub fn fit_tail(samples: &[(f64, f64)]) -> (Option<(f64, f64, f64)>, usize) {
    let mut matched: Vec<f64> = samples.iter().map(|s| s.0).collect();
    matched.sort_by(f64::total_cmp);
    matched.dedup();
    let cut = matched.get(matched.len() / 2).copied().unwrap_or(f64::NEG_INFINITY);
    let (lx, ly): (Vec<f64>, Vec<f64>) = samples
        .iter()
        .filter(|(p, rho)| *p >= cut && *p > 0.0 && *rho > 0.0)
        .map(|(p, rho)| (p.ln(), rho.ln()))
        .unzip();
    (linear_fit(&lx, &ly), lx.len())
}

/// Greedy nearest-first matching of computed eigenvalues to branch
/// predictions within `window_factor · scale(p)`, one eigenvalue per branch
/// and one branch per eigenvalue at each parameter, followed by a tail fit
/// per branch.
pub fn match_and_fit(sweep: &[SweepPoint], branches: &[AsymptoticBranch], window_factor: f64) -> SweepReport {
    let points: Vec<ParameterRecord> = sweep.iter().map(|p| match_point(p, branches, window_factor)).collect();
    let exponents: BTreeMap<String, (usize, Option<f64>)> =
        branches.iter().map(|b| (b.label.clone(), (b.k, b.remainder_exponent))).collect();
    let order: Vec<String> = branches.iter().map(|b| b.label.clone()).collect();
    let fits = fit_branches(&points, &order, &exponents);
    SweepReport { window_factor, points, fits }
}

fn fit_branches(
    points: &[ParameterRecord],
    order: &[String],
    exponents: &BTreeMap<String, (usize, Option<f64>)>,
) -> Vec<BranchFit> {
    order
        .iter()
        .map(|label| {
            let samples: Vec<(f64, f64)> = points
                .iter()
                .flat_map(|p| p.matches.iter().filter(|m| &m.branch == label).map(move |m| (p.parameter, m.rho.norm())))
                .collect();
            let (fit, used) = fit_tail(&samples);
            let (k, predicted_exponent) = exponents.get(label).copied().unwrap_or((0, None));
            BranchFit {
                branch: label.clone(),
                k,
                slope: fit.map(|f| f.0),
                intercept: fit.map(|f| f.1),
                r2: fit.map(|f| f.2),
                points: used,
                predicted_exponent,
            }
        })
        .collect()
}

impl SweepReport {
    /// Recomputes the fits from the stored matches, keeping branch order and
    /// predicted exponents.
    pub fn refit(&mut self) {
        let mut order: Vec<String> = self.fits.iter().map(|f| f.branch.clone()).collect();
        for m in self.points.iter().flat_map(|p| &p.matches) {
            if !order.contains(&m.branch) {
                order.push(m.branch.clone());
            }
        }
        let mut exponents: BTreeMap<String, (usize, Option<f64>)> =
            self.fits.iter().map(|f| (f.branch.clone(), (f.k, f.predicted_exponent))).collect();
        for m in self.points.iter().flat_map(|p| &p.matches) {
            exponents.entry(m.branch.clone()).or_insert((m.k, None));
        }
        self.fits = fit_branches(&self.points, &order, &exponents);
    }

    pub fn fit_for(&self, branch: &str) -> Option<&BranchFit> {
        self.fits.iter().find(|f| f.branch == branch)
    }

    /// Flattened rows: parameter, branch_k, re_lambda, im_lambda, re_pred,
    /// im_pred, abs_rho, slope.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["parameter", "branch_k", "re_lambda", "im_lambda", "re_pred", "im_pred", "abs_rho", "slope"])?;
        for point in &self.points {
            for m in &point.matches {
                let slope = self.fit_for(&m.branch).and_then(|f| f.slope).map(|s| s.to_string()).unwrap_or_default();
                writer.write_record([
                    point.parameter.to_string(),
                    m.branch.clone(),
                    m.lambda.re.to_string(),
                    m.lambda.im.to_string(),
                    m.predicted.re.to_string(),
                    m.predicted.im.to_string(),
                    m.rho.norm().to_string(),
                    slope,
                ])?;
            }
        }
        writer.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn branch(label: &str, offset: f64) -> AsymptoticBranch {
        AsymptoticBranch::new(
            1,
            Complex64::new(1.0, 1.0),
            false,
            Arc::new(Ok),
            Arc::new(move |s| Ok(Complex64::new(offset, -s))),
        )
        .with_label(label)
    }

    #[test]
    fn planted_rate_is_recovered() {
        let b = branch("a", 0.0);
        let sweep: Vec<SweepPoint> = (4..=24)
            .map(|j| {
                let s = j as f64 * 0.5;
                let lambda = b.leading(s).unwrap() + b.scale(s).unwrap() * s.powf(-5.0 / 3.0);
                SweepPoint { parameter: s, eigenvalues: vec![lambda, Complex64::new(1e6, 0.0)] }
            })
            .collect();
        let report = match_and_fit(&sweep, &[b], DEFAULT_WINDOW_FACTOR);
        let slope = report.fits[0].slope.unwrap();
        assert!((slope + 5.0 / 3.0).abs() < 0.02, "{slope}");
        assert!(report.points.iter().all(|p| p.matches.len() == 1 && p.unmatched.is_empty()));
    }

    #[test]
    fn one_value_serves_one_branch() {
        let (a, b) = (branch("a", 0.0), branch("b", 0.1));
        let point = SweepPoint { parameter: 4.0, eigenvalues: vec![a.leading(4.0).unwrap()] };
        let report = match_and_fit(&[point], &[a, b], DEFAULT_WINDOW_FACTOR);
        assert_eq!(report.points[0].matches.len(), 1);
        assert_eq!(report.points[0].matches[0].branch, "a");
        assert!(report.fits.iter().all(|f| f.slope.is_none()));
    }

    #[test]
    fn empty_window_gives_empty_report() {
        let point = SweepPoint { parameter: 2.0, eigenvalues: vec![Complex64::new(1e3, 1e3)] };
        let report = match_and_fit(&[point], &[branch("a", 0.0)], DEFAULT_WINDOW_FACTOR);
        assert!(report.points[0].matches.is_empty());
        assert_eq!(report.fits[0].points, 0);
    }

    #[test]
    fn json_round_trip_and_refit() {
        let b = branch("a", 0.0);
        let sweep: Vec<SweepPoint> = (2..=12)
            .map(|j| {
                let s = j as f64;
                SweepPoint { parameter: s, eigenvalues: vec![b.leading(s).unwrap() + s * s.powi(-2)] }
            })
            .collect();
        let report = match_and_fit(&sweep, &[b], DEFAULT_WINDOW_FACTOR);
        let mut back = SweepReport::from_json(&report.to_json().unwrap()).unwrap();
        assert_eq!(back, report);
        back.fits.clear();
        back.refit();
        assert!((back.fits[0].slope.unwrap() + 2.0).abs() < 1e-9);
        let mut csv = Vec::new();
        report.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("parameter,branch_k,re_lambda,im_lambda,re_pred,im_pred,abs_rho,slope\n"));
        assert_eq!(text.lines().count(), 12);
    }
}

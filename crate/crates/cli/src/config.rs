use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use truncspec::airy::DEFAULT_ZERO_COUNT;
use truncspec::asymptotics::{Orientation, Pt1Point, Pt2Point};
use truncspec::expr::{Bindings, PotentialExpr};
use truncspec::operator::{OperatorSpec, Radial, TruncationRule};
use truncspec::Boundary;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub potential: PotentialSection,
    pub domain: DomainSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub asymptotics: AsymptoticsSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSection {
    pub expression: String,
    #[serde(default = "default_variable")]
    pub variable: String,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
}

fn default_variable() -> String {
    "x".into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleName {
    Symmetric,
    LeftCut,
    Annulus,
    Fixed,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    pub rule: RuleName,
    pub left: Option<f64>,
    pub right: Option<f64>,
    #[serde(default = "dirichlet")]
    pub bc_left: String,
    #[serde(default = "dirichlet")]
    pub bc_right: String,
    /// Space dimension of a radial reduction.
    pub dimension: Option<u32>,
    /// Angular momenta; one operator family per entry.
    #[serde(default)]
    pub angular: Vec<u32>,
}

fn dirichlet() -> String {
    "dirichlet".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default = "default_parameter")]
    pub parameter: String,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub step: Option<f64>,
    pub values: Option<Vec<f64>>,
    /// Parameter value used by `solve` and `check`.
    pub value: Option<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection { parameter: default_parameter(), start: None, stop: None, step: None, values: None, value: None }
    }
}

fn default_parameter() -> String {
    "s".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_ppw")]
    pub ppw: f64,
    #[serde(default = "default_two_grid_tol")]
    pub two_grid_tol: f64,
    #[serde(default = "default_residual_tol")]
    pub residual_tol: f64,
    #[serde(default = "default_dense_cap")]
    pub dense_cap: usize,
    pub max_modulus: Option<f64>,
    pub lambda_target: Option<f64>,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            ppw: default_ppw(),
            two_grid_tol: default_two_grid_tol(),
            residual_tol: default_residual_tol(),
            dense_cap: default_dense_cap(),
            max_modulus: None,
            lambda_target: None,
        }
    }
}

fn default_ppw() -> f64 {
    truncspec::operator::DEFAULT_PPW
}
fn default_two_grid_tol() -> f64 {
    truncspec::eig::EigOptions::default().two_grid_tol
}
fn default_residual_tol() -> f64 {
    truncspec::eig::EigOptions::default().residual_tol
}
fn default_dense_cap() -> usize {
    truncspec::eig::EigOptions::default().dense_cap
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    None,
    Profile,
    Radial,
    Schenker,
    Pt1,
    Pt2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrientationChoice {
    Left,
    Right,
    Both,
}

impl OrientationChoice {
    pub fn orientations(self) -> Vec<Orientation> {
        match self {
            OrientationChoice::Left => vec![Orientation::Left],
            OrientationChoice::Right => vec![Orientation::Right],
            OrientationChoice::Both => vec![Orientation::Left, Orientation::Right],
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymptoticsSection {
    #[serde(default = "default_theorem")]
    pub theorem: Theorem,
    /// The profile `U` for `profile` and `radial` branches.
    pub profile: Option<String>,
    /// A perturbation `U_1` of the profile.
    pub perturbation: Option<String>,
    pub nu_exponent: Option<f64>,
    #[serde(default = "default_k")]
    pub k: Vec<usize>,
    #[serde(default = "default_orientation")]
    pub orientation: OrientationChoice,
    #[serde(default = "dirichlet")]
    pub bc: String,
    #[serde(default)]
    pub first_correction: bool,
    pub kappa: Option<f64>,
    /// Half-power `M` of the quartic-type phase-transition family.
    pub m: Option<u32>,
    #[serde(default)]
    pub points: Vec<String>,
    #[serde(default = "default_window_factor")]
    pub window_factor: f64,
    /// Sampling window `[lo, hi]` for `check`.
    pub check_window: Option<[f64; 2]>,
}

impl Default for AsymptoticsSection {
    fn default() -> Self {
        AsymptoticsSection {
            theorem: default_theorem(),
            profile: None,
            perturbation: None,
            nu_exponent: None,
            k: default_k(),
            orientation: default_orientation(),
            bc: dirichlet(),
            first_correction: false,
            kappa: None,
            m: None,
            points: Vec::new(),
            window_factor: default_window_factor(),
            check_window: None,
        }
    }
}

fn default_theorem() -> Theorem {
    Theorem::None
}
fn default_k() -> Vec<usize> {
    vec![1]
}
fn default_orientation() -> OrientationChoice {
    OrientationChoice::Both
}
fn default_window_factor() -> f64 {
    truncspec::verify::DEFAULT_WINDOW_FACTOR
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
    #[serde(default)]
    pub plot_data: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { directory: default_directory(), formats: default_formats(), plot_data: false }
    }
}

fn default_directory() -> PathBuf {
    PathBuf::from("out")
}
fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

fn invalid(section: &str, key: &str, message: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("[{section}] {key}: {message}"))
}

/// Everything a command needs, checked and built from a [`RunConfig`].
#[derive(Debug, Clone)]
pub struct Plan {
    pub config: RunConfig,
    pub potential: PotentialExpr,
    pub bindings: Bindings,
    pub rule: TruncationRule,
    pub bc: (Boundary, Boundary),
    pub branch_bc: Boundary,
    pub orientations: Vec<Orientation>,
    pub pt1_points: Vec<Pt1Point>,
    pub pt2_points: Vec<Pt2Point>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let deserializer = toml::Deserializer::new(text);
        serde_path_to_error::deserialize(deserializer).map_err(|e| {
            let path = e.path().to_string();
            let message = e.inner().message().to_string();
            match path.split_once('.') {
                Some((section, key)) => CliError::Validation(format!("[{section}] {key}: {message}")),
                None if !path.is_empty() && path != "." && !message.starts_with("unknown field") => {
                    CliError::Validation(format!("[{path}] {message}"))
                }
                None => CliError::Validation(format!("config: {message}")),
            }
        })
    }

    /// The sweep schedule, or an error naming the offending key.
    pub fn schedule(&self) -> Result<Vec<f64>, CliError> {
        let sweep = &self.sweep;
        let values = match (&sweep.values, sweep.start, sweep.stop, sweep.step) {
            (Some(values), None, None, None) => values.clone(),
            (None, Some(start), Some(stop), Some(step)) => {
                if !(step > 0.0) {
                    return Err(invalid("sweep", "step", "must be positive"));
                }
                let count = ((stop - start) / step + 1e-9).floor();
                if !(count >= 0.0) {
                    return Err(invalid("sweep", "stop", "must not be below start"));
                }
                // Multiplying out keeps long schedules free of accumulated drift.
                (0..=count as usize).map(|j| start + j as f64 * step).collect()
            }
            (None, None, None, None) => match sweep.value {
                Some(v) => vec![v],
                None => return Err(invalid("sweep", "values", "no schedule given (values, or start/stop/step)")),
            },
            _ => return Err(invalid("sweep", "values", "give either values or start/stop/step, not both")),
        };
        if values.is_empty() {
            return Err(invalid("sweep", "values", "schedule is empty"));
        }
        if let Some(index) = values.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(invalid("sweep", "values", format!("schedule must increase (entry {})", index + 1)));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("sweep", "values", "entries must be finite"));
        }
        Ok(values)
    }

    /// Parameter value for single-point commands.
    pub fn single_value(&self, at: Option<f64>) -> Result<f64, CliError> {
        if let Some(v) = at.or(self.sweep.value) {
            return Ok(v);
        }
        match self.schedule()?.as_slice() {
            [v] => Ok(*v),
            _ => Err(invalid("sweep", "value", "a single parameter value is needed (set value or pass --at)")),
        }
    }

    pub fn plan(self) -> Result<Plan, CliError> {
        let potential = PotentialExpr::parse_with_variables(&self.potential.expression, &[self.potential.variable.as_str()])
            .map_err(|e| invalid("potential", "expression", e))?;
        let mut bindings = Bindings::new();
        for (name, value) in &self.potential.parameters {
            bindings.set_param(name, *value);
        }
        let parameter = self.sweep.parameter.as_str();
        for name in potential.parameters() {
            if name != parameter && !self.potential.parameters.contains_key(name) {
                return Err(invalid("potential", "parameters", format!("`{name}` is not given a value")));
            }
        }
        let d = &self.domain;
        let rule = match d.rule {
            RuleName::Symmetric => TruncationRule::Symmetric,
            RuleName::LeftCut => TruncationRule::LeftCut { left: d.left },
            RuleName::Annulus => TruncationRule::Annulus {
                inner: d.left.ok_or_else(|| invalid("domain", "left", "annulus needs the inner radius"))?,
            },
            RuleName::Fixed => TruncationRule::Fixed {
                left: d.left.ok_or_else(|| invalid("domain", "left", "fixed domain needs both ends"))?,
                right: d.right.ok_or_else(|| invalid("domain", "right", "fixed domain needs both ends"))?,
            },
        };
        if parameter != "s" && d.rule != RuleName::Fixed {
            return Err(invalid("domain", "rule", format!("sweeping `{parameter}` needs a fixed domain")));
        }
        if parameter == "s" && d.rule == RuleName::Fixed {
            return Err(invalid("domain", "rule", "sweeping `s` needs a rule that depends on s"));
        }
        let bc = (
            d.bc_left.parse().map_err(|e| invalid("domain", "bc_left", e))?,
            d.bc_right.parse().map_err(|e| invalid("domain", "bc_right", e))?,
        );
        if d.dimension.is_some() != !d.angular.is_empty() {
            return Err(invalid("domain", "angular", "radial reductions need both dimension and angular"));
        }
        if d.dimension.is_some() && d.rule != RuleName::Annulus {
            return Err(invalid("domain", "rule", "radial reductions use the annulus rule"));
        }
        let a = &self.asymptotics;
        let branch_bc = a.bc.parse().map_err(|e| invalid("asymptotics", "bc", e))?;
        if a.k.is_empty() {
            return Err(invalid("asymptotics", "k", "list is empty"));
        }
        // Harmonic levels at the coupling stationary points start at k = 0.
        let first_k = usize::from(!matches!(a.theorem, Theorem::Pt1 | Theorem::Pt2));
        if let Some(&k) = a.k.iter().find(|&&k| k < first_k || k > DEFAULT_ZERO_COUNT) {
            return Err(invalid("asymptotics", "k", format!("{k} is outside the table {first_k}..={DEFAULT_ZERO_COUNT}")));
        }
        if !(a.window_factor > 0.0) {
            return Err(invalid("asymptotics", "window_factor", "must be positive"));
        }
        match a.theorem {
            Theorem::Profile | Theorem::Radial if a.profile.is_none() => {
                return Err(invalid("asymptotics", "profile", "required for this theorem"));
            }
            Theorem::Radial if d.dimension.is_none() => {
                return Err(invalid("domain", "dimension", "radial branches need a radial domain"));
            }
            Theorem::Schenker if a.kappa.is_none() => return Err(invalid("asymptotics", "kappa", "required")),
            Theorem::Pt2 if a.m.is_none() => return Err(invalid("asymptotics", "m", "required")),
            _ => {}
        }
        let mut pt1_points = Vec::new();
        let mut pt2_points = Vec::new();
        for p in &a.points {
            match a.theorem {
                Theorem::Pt1 => pt1_points.push(match p.as_str() {
                    "x0" => Pt1Point::X0,
                    "x1" => Pt1Point::X1,
                    "x2" => Pt1Point::X2,
                    other => return Err(invalid("asymptotics", "points", format!("unknown point `{other}`"))),
                }),
                Theorem::Pt2 => pt2_points.push(match p.as_str() {
                    "x0" => Pt2Point::X0,
                    "x2" => Pt2Point::X2,
                    "x3" => Pt2Point::X3,
                    other => return Err(invalid("asymptotics", "points", format!("unknown point `{other}`"))),
                }),
                _ => return Err(invalid("asymptotics", "points", "only used by pt1 and pt2")),
            }
        }
        if matches!(a.theorem, Theorem::Pt1 | Theorem::Pt2) && a.points.is_empty() {
            return Err(invalid("asymptotics", "points", "list the stationary points to follow"));
        }
        let s = &self.solver;
        if !(s.ppw > 0.0) {
            return Err(invalid("solver", "ppw", "must be positive"));
        }
        if !(s.two_grid_tol > 0.0) || !(s.residual_tol > 0.0) {
            return Err(invalid("solver", "two_grid_tol", "tolerances must be positive"));
        }
        if self.output.formats.is_empty() {
            return Err(invalid("output", "formats", "list is empty"));
        }
        let orientations = a.orientation.orientations();
        Ok(Plan { potential, bindings, rule, bc, branch_bc, orientations, pt1_points, pt2_points, config: self })
    }
}

impl Plan {
    pub fn parameter(&self) -> &str {
        &self.config.sweep.parameter
    }

    /// Angular momenta to run, or a single `None` for non-radial problems.
    pub fn angular_cases(&self) -> Vec<Option<u32>> {
        if self.config.domain.angular.is_empty() {
            vec![None]
        } else {
            self.config.domain.angular.iter().map(|&l| Some(l)).collect()
        }
    }

    /// The operator at parameter value `p`, optionally with angular momentum `l`.
    pub fn operator(&self, p: f64, angular: Option<u32>) -> Result<OperatorSpec, CliError> {
        let parameter = self.parameter();
        let mut bindings = self.bindings.clone();
        bindings.set_param(parameter, p);
        let interval = self.rule.interval(p);
        let mut spec = OperatorSpec::new(self.potential.clone(), interval)
            .map_err(|e| invalid("domain", "rule", format!("at {parameter} = {p}: {e}")))?
            .with_variable(&self.config.potential.variable)
            .with_boundaries(self.bc.0, self.bc.1)
            .with_bindings(bindings);
        if let (Some(dimension), Some(angular)) = (self.config.domain.dimension, angular) {
            spec = spec
                .with_radial(Radial { dimension, angular })
                .map_err(|e| invalid("domain", "left", format!("at {parameter} = {p}: {e}")))?;
        }
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[potential]
expression = "i*x"
[domain]
rule = "symmetric"
[sweep]
start = 1.0
stop = 2.0
step = 0.25
"#;

    #[test]
    fn schedule_from_range() {
        let c = RunConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.schedule().unwrap(), vec![1.0, 1.25, 1.5, 1.75, 2.0]);
        assert!(c.clone().plan().is_ok());
    }

    #[test]
    fn validation_names_the_key() {
        let bad = MINIMAL.replace("step = 0.25", "values = [2.0, 1.0]");
        let err = RunConfig::parse(&bad).unwrap().schedule().unwrap_err();
        assert!(err.to_string().contains("[sweep] values"), "{err}");
        let bad = MINIMAL.replace("i*x", "i*x*g");
        let err = RunConfig::parse(&bad).unwrap().plan().unwrap_err();
        assert!(err.to_string().contains("`g`"), "{err}");
        let bad = format!("{MINIMAL}[asymptotics]\nk = [0]\n");
        assert!(RunConfig::parse(&bad).unwrap().plan().unwrap_err().to_string().contains("[asymptotics] k"));
        assert!(matches!(RunConfig::parse("[potential]\nexpr = 1"), Err(CliError::Validation(_))));
        let err = RunConfig::parse(&MINIMAL.replace("step = 0.25", "step = \"big\"")).unwrap_err();
        assert!(err.to_string().contains("[sweep] step"), "{err}");
    }

    #[test]
    fn harmonic_branches_start_at_zero() {
        let text = r#"
[potential]
expression = "x^4/4 + i*g*x"
[domain]
rule = "fixed"
left = -8.0
right = 8.0
[sweep]
parameter = "g"
values = [5.0]
[asymptotics]
theorem = "pt2"
m = 2
points = ["x3"]
k = [0, 1]
"#;
        let plan = RunConfig::parse(text).unwrap().plan().unwrap();
        assert_eq!(plan.pt2_points, vec![Pt2Point::X3]);
        let profile = text.replace("theorem = \"pt2\"\nm = 2\npoints = [\"x3\"]", "theorem = \"profile\"\nprofile = \"x\"");
        assert!(RunConfig::parse(&profile).unwrap().plan().is_err());
    }

    #[test]
    fn coupling_sweeps_need_a_fixed_domain() {
        let text = r#"
[potential]
expression = "x^2 + i*g*x"
[domain]
rule = "fixed"
left = -5.0
right = 5.0
[sweep]
parameter = "g"
values = [1.0, 2.0]
"#;
        let plan = RunConfig::parse(text).unwrap().plan().unwrap();
        let spec = plan.operator(2.0, None).unwrap();
        assert_eq!(spec.interval, (-5.0, 5.0));
        assert_eq!(spec.bindings.param("g"), Some(2.0));
        let wrong = text.replace("rule = \"fixed\"", "rule = \"symmetric\"");
        assert!(RunConfig::parse(&wrong).unwrap().plan().is_err());
    }
}

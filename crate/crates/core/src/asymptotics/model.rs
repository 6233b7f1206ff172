//! Eigenvalues of the whole-line model operators `-d²/dx² + i|x|^κ` and
//! `-d²/dx² + i x^m` (odd `m`), computed by this crate's own solver.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;

use super::AsymptoticsError;
use crate::expr::{Exponent, Func, Node, PotentialExpr};
use crate::operator::OperatorSpec;
use crate::eig::{solve, SolveOptions};

/// `√c (2k + 1)`, `k ≥ 0`: eigenvalues of `-d²/dx² + c x²` for `Re √c > 0`.
pub fn harmonic_nu(coefficient: Complex64, k: usize) -> Complex64 {
    coefficient.sqrt() * (2 * k + 1) as f64
}

type Cache = Mutex<BTreeMap<(u64, bool), Vec<Complex64>>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(BTreeMap::new()))
}

fn power_of(base: Node, exponent: f64) -> Node {
    Node::Pow(Box::new(base), Exponent::new(exponent))
}

/// Levels sorted by real part, with the truncation length used.
fn levels(potential: PotentialExpr, half_width: f64, wanted: usize) -> Result<Vec<Complex64>, AsymptoticsError> {
    let spec = OperatorSpec::new(potential, (-half_width, half_width)).map_err(crate::eig::SolveError::from)?;
    let mut bound = 40.0;
    loop {
        let opts = SolveOptions { lambda_target: bound, max_modulus: Some(bound), ..Default::default() };
        let spectrum = solve(&spec, &opts)?;
        let mut values = spectrum.trusted_values();
        values.sort_by(|a, b| a.re.total_cmp(&b.re));
        if values.len() >= wanted || bound > 5000.0 {
            return Ok(values);
        }
        bound *= 2.0;
    }
}

fn cached_level(
    key: (u64, bool),
    k: usize,
    compute: impl FnOnce(usize) -> Result<Vec<Complex64>, AsymptoticsError>,
) -> Result<Option<Complex64>, AsymptoticsError> {
    if let Some(v) = cache().lock().expect("model cache poisoned").get(&key) {
        if k <= v.len() {
            return Ok(Some(v[k - 1]));
        }
    }
    let values = compute(k.max(6))?;
    let found = values.get(k - 1).copied();
    cache().lock().expect("model cache poisoned").insert(key, values);
    Ok(found)
}

/// k-th eigenvalue (`k ≥ 1`, ordered by real part) of `-d²/dx² + i|x|^κ`.
///
/// `κ = 2` uses the closed form `e^{iπ/4}(2k - 1)`. Other values rotate the
/// levels of the self-adjoint `-d²/dx² + |x|^κ`, solved on a wide symmetric
/// interval, by `e^{iπ/(κ+2)}`.
pub fn model_nu_kappa(kappa: f64, k: usize) -> Result<Complex64, AsymptoticsError> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(AsymptoticsError::InvalidKappa(kappa));
    }
    if k == 0 {
        return Err(AsymptoticsError::ModelEigenvalue { kappa, k });
    }
    if kappa == 2.0 {
        return Ok(Complex64::from_polar(1.0, PI / 4.0) * (2 * k - 1) as f64);
    }
    let half_width = 400f64.powf(1.0 / kappa).clamp(8.0, 200.0);
    let potential = PotentialExpr::from_node(power_of(Node::Call(Func::Abs, Box::new(Node::Var("x".into()))), kappa));
    let level = cached_level((kappa.to_bits(), false), k, |wanted| levels(potential, half_width, wanted))?;
    let level = level.ok_or(AsymptoticsError::ModelEigenvalue { kappa, k })?;
    Ok(Complex64::from_polar(level.re, PI / (kappa + 2.0)))
}

/// k-th eigenvalue (`k ≥ 1`, ordered by real part) of `-d²/dx² + i x^m`
/// for odd `m ≥ 3`; these are real, so the returned imaginary part only
/// reflects discretisation error.
pub fn model_nu_odd(power: u32, k: usize) -> Result<Complex64, AsymptoticsError> {
    let kappa = power as f64;
    if power < 3 || power.is_multiple_of(2) || k == 0 {
        return Err(AsymptoticsError::ModelEigenvalue { kappa, k });
    }
    let half_width = 400f64.powf(1.0 / kappa).max(8.0);
    let potential = PotentialExpr::from_node(Node::Mul(
        Box::new(Node::constant(0.0, 1.0)),
        Box::new(power_of(Node::Var("x".into()), kappa)),
    ));
    let level = cached_level((kappa.to_bits(), true), k, |wanted| levels(potential, half_width, wanted))?;
    level.ok_or(AsymptoticsError::ModelEigenvalue { kappa, k })
}

//! Two-grid trust filter and the solve pipeline built on it.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{eigen_dense, refine, EigOptions, SolveError};
use crate::operator::{assemble, grid_for, Grid1D, OperatorSpec, DEFAULT_PPW};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    /// Eigenvalue on the fine grid.
    pub lambda: Complex64,
    /// Matching eigenvalue on the coarse grid.
    pub lambda_coarse: Complex64,
    /// Richardson extrapolation `(4 λ_fine - λ_coarse) / 3`.
    pub lambda_re: Complex64,
    pub residual: f64,
    pub condition: f64,
    pub trusted: bool,
    #[serde(skip)]
    pub vector: Option<Vec<Complex64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub entries: Vec<SpectrumEntry>,
    pub n_coarse: usize,
    pub n_fine: usize,
    pub h: f64,
    /// Positions of the fine-grid unknowns, for reading eigenvectors.
    #[serde(skip)]
    pub nodes: Vec<f64>,
}

impl Spectrum {
    pub fn trusted(&self) -> impl Iterator<Item = &SpectrumEntry> {
        self.entries.iter().filter(|e| e.trusted)
    }

    /// Best estimates (extrapolated values) of the trusted eigenvalues.
    pub fn trusted_values(&self) -> Vec<Complex64> {
        self.trusted().map(|e| e.lambda_re).collect()
    }

    pub fn nearest_trusted(&self, z: Complex64) -> Option<&SpectrumEntry> {
        self.trusted().min_by(|a, b| (a.lambda_re - z).norm().total_cmp(&(b.lambda_re - z).norm()))
    }
}

/// A disc of the complex plane in which eigenvalues are wanted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub center: Complex64,
    pub radius: f64,
}

impl Window {
    pub fn contains(&self, z: Complex64) -> bool {
        (z - self.center).norm() <= self.radius
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub ppw: f64,
    /// Typical eigenvalue size, used to pick the grid.
    pub lambda_target: f64,
    /// Only candidates inside one of these discs are refined; all when empty.
    pub windows: Vec<Window>,
    /// Candidates with larger modulus are skipped.
    pub max_modulus: Option<f64>,
    pub keep_vectors: bool,
    pub eig: EigOptions,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            ppw: DEFAULT_PPW,
            lambda_target: 1.0,
            windows: Vec::new(),
            max_modulus: None,
            keep_vectors: false,
            eig: EigOptions::default(),
        }
    }
}

fn close(a: Complex64, b: Complex64, rel: f64) -> bool {
    (a - b).norm() <= rel * a.norm().max(b.norm()).max(1.0)
}

/// For each coarse eigenvalue, the index of its nearest fine eigenvalue if
/// that lies within `tol` (relative, floored at 1).
pub fn match_two_grid(coarse: &[Complex64], fine: &[Complex64], tol: f64) -> Vec<Option<usize>> {
    coarse
        .iter()
        .map(|&c| {
            fine.iter()
                .enumerate()
                .min_by(|a, b| (a.1 - c).norm().total_cmp(&(b.1 - c).norm()))
                .filter(|(_, &f)| close(c, f, tol))
                .map(|(i, _)| i)
        })
        .collect()
}

/// Eigenvalues of `spec` on `grid` and on the halved grid. Candidates come
/// from a dense solve (on a coarser grid when `grid` exceeds the dense cap)
/// and from the window centres; each is refined on both grids and trusted
/// when the two agree and the eigenvalue condition number allows it.
pub fn spurious_filter(spec: &OperatorSpec, grid: &Grid1D, opts: &SolveOptions) -> Result<Spectrum, SolveError> {
    let fine_grid = grid.halved();
    let coarse = assemble(spec, grid)?;
    let fine = assemble(spec, &fine_grid)?;
    let seeds = if grid.n <= opts.eig.dense_cap {
        eigen_dense(&coarse, &opts.eig)?
    } else {
        let dense_grid = Grid1D::new(grid.a, grid.b, opts.eig.dense_cap)?;
        eigen_dense(&assemble(spec, &dense_grid)?, &opts.eig)?
    };
    let seeds: Vec<Complex64> = seeds
        .into_iter()
        .filter(|z| opts.windows.is_empty() || opts.windows.iter().any(|w| w.contains(*z)))
        .chain(opts.windows.iter().map(|w| w.center))
        .filter(|z| opts.max_modulus.is_none_or(|m| z.norm() <= m))
        .collect();

    let tol = opts.eig.two_grid_tol;
    let fine_norm = fine.norm_inf();
    // First-order forward error of an eigenvalue computed to backward error
    // `ε‖A‖`; past the two-grid tolerance the value is pseudospectral noise.
    let resolvable = |lambda: Complex64, condition: f64| {
        condition * f64::EPSILON * fine_norm <= tol * lambda.norm().max(1.0)
    };
    let mut entries: Vec<SpectrumEntry> = seeds
        .par_iter()
        .filter_map(|&seed| {
            let on_coarse = refine(&coarse, seed, &opts.eig).ok()?;
            let on_fine = refine(&fine, on_coarse.lambda, &opts.eig);
            let (lambda, residual, condition, vector, ok) = match on_fine {
                Ok(p) => (p.lambda, p.residual, p.condition, Some(p.vector), true),
                Err(_) => (on_coarse.lambda, f64::INFINITY, on_coarse.condition, None, false),
            };
            Some(SpectrumEntry {
                lambda,
                lambda_coarse: on_coarse.lambda,
                lambda_re: (4.0 * lambda - on_coarse.lambda) / 3.0,
                residual,
                condition,
                trusted: ok && close(lambda, on_coarse.lambda, tol) && resolvable(lambda, condition),
                vector: if opts.keep_vectors { vector } else { None },
            })
        })
        .collect();

    entries.sort_by(|a, b| a.lambda.im.total_cmp(&b.lambda.im).then(a.lambda.re.total_cmp(&b.lambda.re)));
    let mut unique: Vec<SpectrumEntry> = Vec::with_capacity(entries.len());
    for e in entries {
        match unique.iter_mut().find(|u| close(u.lambda, e.lambda, 1e-9)) {
            Some(u) => {
                if e.trusted && !u.trusted {
                    *u = e;
                }
            }
            None => unique.push(e),
        }
    }
    Ok(Spectrum {
        entries: unique,
        n_coarse: grid.n,
        n_fine: fine_grid.n,
        h: grid.h(),
        nodes: crate::operator::unknown_nodes(spec, &fine_grid),
    })
}

/// Chooses the grid from `ppw` and `lambda_target`, then runs
/// [`spurious_filter`].
pub fn solve(spec: &OperatorSpec, opts: &SolveOptions) -> Result<Spectrum, SolveError> {
    let grid = grid_for(spec, opts.ppw, opts.lambda_target)?;
    spurious_filter(spec, &grid, opts)
}

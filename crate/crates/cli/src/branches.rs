use truncspec::asymptotics::{
    branch_1d, branch_1d_perturbed, branch_pt1, branch_pt2, branch_radial, branch_schenker, corner_correction,
    AsymptoticBranch, AsymptoticsError, Profile,
};
use truncspec::expr::PotentialExpr;

use crate::config::{Plan, Theorem};
use crate::CliError;

fn profile(plan: &Plan) -> Result<Option<Profile>, CliError> {
    let a = &plan.config.asymptotics;
    let Some(text) = &a.profile else { return Ok(None) };
    let variable = if plan.config.domain.dimension.is_some() { "r" } else { plan.config.potential.variable.as_str() };
    let expr = PotentialExpr::parse_with_variables(text, &[variable])
        .map_err(|e| CliError::Validation(format!("[asymptotics] profile: {e}")))?;
    let mut profile = Profile::new(expr).with_variable(variable).with_bindings(plan.bindings.clone());
    if let Some(nu) = a.nu_exponent {
        profile = profile.with_nu_exponent(nu);
    }
    Ok(Some(profile))
}

fn numerical(e: AsymptoticsError) -> CliError {
    CliError::Numerical(format!("building branches: {e}"))
}

/// The profile `U` named in `[asymptotics]`, for `check`.
pub fn checked_profile(plan: &Plan) -> Result<Profile, CliError> {
    profile(plan)?.ok_or_else(|| CliError::Validation("[asymptotics] profile: required by check".into()))
}

/// Branches selected by `[asymptotics]` for angular momentum `angular`.
pub fn build(plan: &Plan, angular: Option<u32>) -> Result<Vec<AsymptoticBranch>, CliError> {
    let a = &plan.config.asymptotics;
    let bc = plan.branch_bc;
    let mut out = Vec::new();
    match a.theorem {
        Theorem::None => {}
        Theorem::Profile => {
            let profile = profile(plan)?.expect("validated");
            let perturbation = a
                .perturbation
                .as_ref()
                .map(|text| {
                    PotentialExpr::parse_with_variables(text, &[profile.variable.as_str()])
                        .map_err(|e| CliError::Validation(format!("[asymptotics] perturbation: {e}")))
                })
                .transpose()?;
            for &orientation in &plan.orientations {
                for &k in &a.k {
                    let mut branch = match &perturbation {
                        Some(p) => branch_1d_perturbed(&profile, p, k, bc, orientation),
                        None => branch_1d(&profile, k, bc, orientation),
                    }
                    .map_err(numerical)?;
                    if a.first_correction {
                        branch = branch.with_correction(corner_correction(&profile, k, bc, orientation));
                    }
                    out.push(branch);
                }
            }
        }
        Theorem::Radial => {
            let profile = profile(plan)?.expect("validated");
            let dimension = plan.config.domain.dimension.expect("validated");
            let l = angular.expect("radial domain has angular momenta");
            for &k in &a.k {
                out.push(branch_radial(&profile, dimension, l, k, bc).map_err(numerical)?);
            }
        }
        Theorem::Schenker => {
            let kappa = a.kappa.expect("validated");
            for &k in &a.k {
                out.push(branch_schenker(kappa, k).map_err(numerical)?);
            }
        }
        Theorem::Pt1 => {
            for &point in &plan.pt1_points {
                for &k in &a.k {
                    out.push(branch_pt1(point, k).map_err(numerical)?);
                }
            }
        }
        Theorem::Pt2 => {
            let m = a.m.expect("validated");
            for &point in &plan.pt2_points {
                for &k in &a.k {
                    out.push(branch_pt2(m, k, point).map_err(numerical)?);
                }
            }
        }
    }
    Ok(out)
}

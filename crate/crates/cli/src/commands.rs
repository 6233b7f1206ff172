use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use truncspec::airy::{ai_prime_zero, ai_zero};
use truncspec::asymptotics::AsymptoticBranch;
use truncspec::eig::{solve as solve_spectrum, EigOptions, SolveOptions, Spectrum, Window};
use truncspec::verify::{check_u_conditions, match_and_fit, AssumptionReport, SweepPoint, SweepReport};
use truncspec::C64;

use crate::branches;
use crate::config::{Format, Plan};
use crate::output::{self, num, opt, Sink};
use crate::CliError;

fn suffix(angular: Option<u32>) -> String {
    angular.map(|l| format!("_l{l}")).unwrap_or_default()
}

fn solve_options(plan: &Plan, branches: &[AsymptoticBranch], p: f64) -> SolveOptions {
    let solver = &plan.config.solver;
    let factor = plan.config.asymptotics.window_factor;
    let windows: Vec<Window> = branches
        .iter()
        .filter_map(|b| Some(Window { center: b.leading(p).ok()?, radius: factor * b.scale(p).ok()?.abs() }))
        .collect();
    let from_windows = windows.iter().map(|w| w.center.norm() + w.radius).fold(0.0, f64::max);
    let lambda_target = solver.lambda_target.unwrap_or_else(|| from_windows.max(solver.max_modulus.unwrap_or(1.0)));
    SolveOptions {
        ppw: solver.ppw,
        lambda_target,
        windows,
        max_modulus: solver.max_modulus,
        keep_vectors: false,
        eig: EigOptions {
            two_grid_tol: solver.two_grid_tol,
            residual_tol: solver.residual_tol,
            dense_cap: solver.dense_cap,
            ..EigOptions::default()
        },
    }
}

fn solve_at(plan: &Plan, branches: &[AsymptoticBranch], p: f64, angular: Option<u32>) -> Result<Spectrum, CliError> {
    let spec = plan.operator(p, angular)?;
    solve_spectrum(&spec, &solve_options(plan, branches, p))
        .map_err(|e| CliError::Numerical(format!("solve at {} = {p}: {e}", plan.parameter())))
}

#[derive(Serialize)]
struct SpectrumFile<'a> {
    parameter_name: &'a str,
    parameter: f64,
    angular: Option<u32>,
    interval: (f64, f64),
    ppw: f64,
    spectrum: &'a Spectrum,
}

pub fn solve(plan: &Plan, sink: &Sink, at: Option<f64>) -> Result<(), CliError> {
    let p = plan.config.single_value(at)?;
    for angular in plan.angular_cases() {
        let branches = branches::build(plan, angular)?;
        let spectrum = solve_at(plan, &branches, p, angular)?;
        let stem = format!("spectrum{}", suffix(angular));
        if sink.wants(Format::Csv) {
            let rows = output::spectrum_rows(p, &spectrum, true);
            output::write_rows(&sink.path(&format!("{stem}.csv")), &output::SPECTRUM_HEADER, &rows)?;
        }
        if sink.wants(Format::Json) {
            let file = SpectrumFile {
                parameter_name: plan.parameter(),
                parameter: p,
                angular,
                interval: plan.rule.interval(p),
                ppw: plan.config.solver.ppw,
                spectrum: &spectrum,
            };
            sink.json(&format!("{stem}.json"), &file)?;
        }
        println!(
            "{} = {p}{}: {} trusted of {} candidates (n = {}, {})",
            plan.parameter(),
            angular.map(|l| format!(", l = {l}")).unwrap_or_default(),
            spectrum.trusted().count(),
            spectrum.entries.len(),
            spectrum.n_fine,
            sink.dir.join(&stem).display(),
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct SweepCell {
    parameter: f64,
    angular: Option<u32>,
    error: Option<String>,
    spectrum: Option<Spectrum>,
}

pub fn sweep(plan: &Plan, sink: &Sink) -> Result<(), CliError> {
    let schedule = plan.config.schedule()?;
    let cases = plan.angular_cases();
    let case_branches: Vec<Vec<AsymptoticBranch>> =
        cases.iter().map(|&l| branches::build(plan, l)).collect::<Result<_, _>>()?;
    let cells: Vec<(usize, f64)> = (0..cases.len()).flat_map(|c| schedule.iter().map(move |&p| (c, p))).collect();
    let results: Vec<SweepCell> = cells
        .par_iter()
        .map(|&(c, p)| match solve_at(plan, &case_branches[c], p, cases[c]) {
            Ok(spectrum) => SweepCell { parameter: p, angular: cases[c], error: None, spectrum: Some(spectrum) },
            Err(e) => SweepCell { parameter: p, angular: cases[c], error: Some(e.to_string()), spectrum: None },
        })
        .collect();
    let failed = results.iter().filter(|r| r.error.is_some()).count();
    if sink.wants(Format::Json) {
        sink.json("spectra.json", &results)?;
    }
    if failed == results.len() {
        return Err(CliError::Numerical(format!(
            "every solve failed; first: {}",
            results[0].error.as_deref().unwrap_or_default()
        )));
    }
    let plot_data = plan.config.output.plot_data;
    let mut plot_files = Vec::new();
    for (c, &angular) in cases.iter().enumerate() {
        let points: Vec<SweepPoint> = results
            .iter()
            .filter(|r| r.angular == angular)
            .filter_map(|r| r.spectrum.as_ref().map(|s| SweepPoint::from_spectrum(r.parameter, s)))
            .collect();
        let report = match_and_fit(&points, &case_branches[c], plan.config.asymptotics.window_factor);
        output::write_report(sink, &format!("report{}", suffix(angular)), &report)?;
        if sink.wants(Format::Csv) {
            plot_files.extend(write_branch_files(sink, &schedule, &case_branches[c], &report)?);
        }
        print_fits(plan, angular, &report);
    }
    if plot_data && !plot_files.is_empty() {
        sink.text("plot.gp", &output::gnuplot_script(&plot_files))?;
    }
    for cell in results.iter().filter(|r| r.error.is_some()) {
        eprintln!("warning: {}", cell.error.as_deref().unwrap_or_default());
    }
    Ok(())
}

fn print_fits(plan: &Plan, angular: Option<u32>, report: &SweepReport) {
    let matched: usize = report.points.iter().map(|p| p.matches.len()).sum();
    println!(
        "{} sweep{}: {} parameter values, {matched} matches",
        plan.parameter(),
        angular.map(|l| format!(" (l = {l})")).unwrap_or_default(),
        report.points.len()
    );
    for fit in &report.fits {
        println!(
            "  {:<20} slope {:>10} predicted {:>10} points {}",
            fit.branch,
            fit.slope.map(|s| format!("{s:.4}")).unwrap_or_else(|| "-".into()),
            fit.predicted_exponent.map(|s| format!("{s:.4}")).unwrap_or_else(|| "-".into()),
            fit.points
        );
    }
}

const BRANCH_HEADER: [&str; 7] = ["parameter", "re_computed", "im_computed", "re_pred", "im_pred", "re_corrected", "im_corrected"];

fn write_branch_files(
    sink: &Sink,
    schedule: &[f64],
    branches: &[AsymptoticBranch],
    report: &SweepReport,
) -> Result<Vec<(String, String)>, CliError> {
    let dir = sink.subdir("branches")?;
    let mut files = Vec::new();
    for branch in branches {
        let mut rows = Vec::new();
        for &p in schedule {
            let computed = report
                .points
                .iter()
                .find(|r| r.parameter == p)
                .and_then(|r| r.matches.iter().find(|m| m.branch == branch.label))
                .map(|m| m.lambda);
            let predicted = branch.leading(p).ok();
            let corrected = if branch.has_correction() { branch.corrected(p).ok() } else { None };
            rows.push(vec![
                num(p),
                opt_c(computed, |z| z.re),
                opt_c(computed, |z| z.im),
                opt_c(predicted, |z| z.re),
                opt_c(predicted, |z| z.im),
                opt(corrected.map(|z| z.re)),
                opt(corrected.map(|z| z.im)),
            ]);
        }
        let name = format!("{}.csv", branch.label);
        output::write_rows(&dir.join(&name), &BRANCH_HEADER, &rows)?;
        files.push((branch.label.clone(), format!("branches/{name}")));
    }
    Ok(files)
}

fn opt_c(z: Option<C64>, part: impl Fn(C64) -> f64) -> String {
    num(z.map(part).unwrap_or(f64::NAN))
}

#[derive(Serialize)]
struct Prediction {
    parameter: f64,
    branch: String,
    k: usize,
    scale: f64,
    predicted: C64,
    corrected: Option<C64>,
    remainder_exponent: Option<f64>,
}

const PREDICT_HEADER: [&str; 8] =
    ["parameter", "branch", "k", "scale", "re_pred", "im_pred", "re_corrected", "im_corrected"];

pub fn predict(plan: &Plan, sink: &Sink) -> Result<(), CliError> {
    let schedule = plan.config.schedule()?;
    let mut all = Vec::new();
    for angular in plan.angular_cases() {
        let branches = branches::build(plan, angular)?;
        if branches.is_empty() {
            return Err(CliError::Validation("[asymptotics] theorem: predict needs a branch family".into()));
        }
        let evaluated: Vec<(Vec<Prediction>, Vec<String>)> = branches
            .par_iter()
            .map(|b| {
                let mut rows = Vec::new();
                let mut problems = Vec::new();
                for &p in &schedule {
                    let at = format!("{} at {} = {p}", b.label, plan.parameter());
                    let (scale, predicted) = match (b.scale(p), b.leading(p)) {
                        (Ok(scale), Ok(predicted)) => (scale, predicted),
                        (Err(e), _) | (_, Err(e)) => {
                            problems.push(format!("{at}: {e}"));
                            continue;
                        }
                    };
                    let corrected = if b.has_correction() {
                        b.corrected(p).map_err(|e| problems.push(format!("{at}, correction: {e}"))).ok()
                    } else {
                        None
                    };
                    rows.push(Prediction {
                        parameter: p,
                        branch: b.label.clone(),
                        k: b.k,
                        scale,
                        predicted,
                        corrected,
                        remainder_exponent: b.remainder_exponent,
                    });
                }
                (rows, problems)
            })
            .collect();
        let (evaluated, problems): (Vec<Vec<Prediction>>, Vec<Vec<String>>) = evaluated.into_iter().unzip();
        for problem in problems.iter().flatten() {
            eprintln!("warning: {problem}");
        }
        for (branch, rows) in branches.iter().zip(&evaluated) {
            for w in &branch.warnings {
                eprintln!("warning: {}: {w}", branch.label);
            }
            if sink.wants(Format::Csv) {
                let dir = sink.subdir("predict")?;
                output::write_rows(&dir.join(format!("{}.csv", branch.label)), &PREDICT_HEADER, &prediction_rows(rows))?;
            }
        }
        all.extend(evaluated.into_iter().flatten());
    }
    if all.is_empty() {
        return Err(CliError::Numerical("no branch could be evaluated on the schedule".into()));
    }
    if sink.wants(Format::Csv) {
        output::write_rows(&sink.path("predictions.csv"), &PREDICT_HEADER, &prediction_rows(&all))?;
    }
    if sink.wants(Format::Json) {
        sink.json("predictions.json", &all)?;
    }
    println!("{} predictions written to {}", all.len(), sink.dir.display());
    Ok(())
}

fn prediction_rows(rows: &[Prediction]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            vec![
                num(r.parameter),
                r.branch.clone(),
                r.k.to_string(),
                num(r.scale),
                num(r.predicted.re),
                num(r.predicted.im),
                opt(r.corrected.map(|z| z.re)),
                opt(r.corrected.map(|z| z.im)),
            ]
        })
        .collect()
}

#[derive(Serialize)]
struct CheckFile {
    profile: String,
    report: AssumptionReport,
    upsilon_exponent: Option<f64>,
    warnings: Vec<String>,
}

pub fn check(plan: &Plan, sink: &Sink) -> Result<(), CliError> {
    let profile = branches::checked_profile(plan)?;
    let window = plan.config.asymptotics.check_window.unwrap_or([10.0, 100.0]);
    if !(window[0] > 0.0 && window[1] > window[0]) {
        return Err(CliError::Validation("[asymptotics] check_window: need 0 < lo < hi".into()));
    }
    let report = check_u_conditions(&profile, (window[0], window[1]))
        .map_err(|e| CliError::Numerical(format!("check: {e}")))?;
    let file = CheckFile {
        profile: profile.expr.to_string(),
        upsilon_exponent: profile.upsilon_exponent(),
        warnings: report.warnings(),
        report,
    };
    println!("profile U = {}", file.profile);
    println!("nu_exponent = {}", file.report.nu_exponent);
    println!("upsilon_slope = {}", opt(file.report.upsilon_slope));
    println!("eps_nabla = {}, M_nabla = {}", num(file.report.eps_nabla_est), num(file.report.m_nabla_est));
    for w in &file.warnings {
        println!("warning: {w}");
    }
    sink.json("check.json", &file)?;
    Ok(())
}

pub fn fit(report_path: &Path, sink: Option<&Sink>, format: Format) -> Result<(), CliError> {
    let text = std::fs::read_to_string(report_path)
        .map_err(|e| CliError::Validation(format!("cannot read report {}: {e}", report_path.display())))?;
    let mut report = SweepReport::from_json(&text)
        .map_err(|e| CliError::Validation(format!("{} is not a sweep report: {e}", report_path.display())))?;
    report.refit();
    match format {
        Format::Csv => print!("{}", output::rows_to_string(&output::FIT_HEADER, &output::fit_rows(&report.fits))),
        Format::Json => println!("{}", serde_json::to_string_pretty(&report.fits).expect("fits serialize")),
    }
    if let Some(sink) = sink {
        if sink.wants(Format::Csv) {
            output::write_rows(&sink.path("fits.csv"), &output::FIT_HEADER, &output::fit_rows(&report.fits))?;
        }
        if sink.wants(Format::Json) {
            sink.json("fits.json", &report.fits)?;
        }
    }
    Ok(())
}

pub fn airy_zeros(count: usize, sink: Option<&Sink>, format: Format) -> Result<(), CliError> {
    if count == 0 {
        return Err(CliError::Validation("--count must be at least 1".into()));
    }
    let mut rows = Vec::new();
    for k in 1..=count {
        let a = ai_zero(k).map_err(|e| CliError::Numerical(e.to_string()))?;
        let b = ai_prime_zero(k).map_err(|e| CliError::Numerical(e.to_string()))?;
        rows.push((k, a, b));
    }
    let header = ["k", "ai_zero", "ai_prime_zero"];
    let table: Vec<Vec<String>> = rows.iter().map(|(k, a, b)| vec![k.to_string(), num(*a), num(*b)]).collect();
    #[derive(Serialize)]
    struct Zero {
        k: usize,
        ai_zero: f64,
        ai_prime_zero: f64,
    }
    let json: Vec<Zero> = rows.iter().map(|&(k, ai_zero, ai_prime_zero)| Zero { k, ai_zero, ai_prime_zero }).collect();
    match format {
        Format::Csv => print!("{}", output::rows_to_string(&header, &table)),
        Format::Json => println!("{}", serde_json::to_string_pretty(&json).expect("zeros serialize")),
    }
    if let Some(sink) = sink {
        if sink.wants(Format::Csv) {
            output::write_rows(&sink.path("airy_zeros.csv"), &header, &table)?;
        }
        if sink.wants(Format::Json) {
            sink.json("airy_zeros.json", &json)?;
        }
    }
    Ok(())
}

/// Output directory: `TRUNCSPEC_OUT`, then `--out`, then the config.
pub fn resolve_out(flag: Option<PathBuf>, configured: Option<PathBuf>) -> Option<PathBuf> {
    std::env::var_os("TRUNCSPEC_OUT").filter(|v| !v.is_empty()).map(PathBuf::from).or(flag).or(configured)
}

//! `truncspec` command line: spectra of truncated complex Schrödinger
//! operators, their asymptotic predictions, and remainder fits.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod branches;
mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use config::{Format, Plan, RunConfig};
use output::Sink;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(name = "truncspec", version, about = "Eigenvalues of domain truncations and their asymptotics")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; `TRUNCSPEC_OUT` takes precedence.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Grid points per unit wavelength, overriding `[solver] ppw`.
    #[arg(long, global = true)]
    ppw: Option<f64>,
    /// Output formats, overriding `[output] formats`.
    #[arg(long, global = true, value_enum, value_delimiter = ',')]
    format: Vec<Format>,
    /// Write per-branch plot data and a gnuplot script.
    #[arg(long, global = true)]
    plot_data: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the first zeros of Ai and Ai'.
    AiryZeros {
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
    /// Eigenvalues at one parameter value.
    Solve {
        /// Parameter value; defaults to `[sweep] value`.
        #[arg(long)]
        at: Option<f64>,
    },
    /// Eigenvalues over the schedule, matched to the asymptotic branches.
    Sweep,
    /// Asymptotic predictions over the schedule.
    Predict,
    /// Check the hypotheses on the profile.
    Check,
    /// Refit the remainder decay of an existing sweep report.
    Fit { report: PathBuf },
}

fn load_plan(cli: &Cli) -> Result<Plan, CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Validation("--config is required".into()))?;
    let mut config = RunConfig::load(path)?;
    if let Some(ppw) = cli.ppw {
        config.solver.ppw = ppw;
    }
    if !cli.format.is_empty() {
        config.output.formats = cli.format.clone();
    }
    config.output.plot_data |= cli.plot_data;
    if !(config.solver.ppw.is_finite() && config.solver.ppw > 0.0) {
        return Err(CliError::Validation("[solver] ppw: must be positive".into()));
    }
    config.plan()
}

fn plan_sink(cli: &Cli, plan: &Plan) -> Result<Sink, CliError> {
    let dir = commands::resolve_out(cli.out.clone(), Some(plan.config.output.directory.clone())).expect("configured");
    Sink::new(dir, plan.config.output.formats.clone())
}

fn optional_sink(cli: &Cli) -> Result<Option<Sink>, CliError> {
    let formats = if cli.format.is_empty() { vec![Format::Csv, Format::Json] } else { cli.format.clone() };
    commands::resolve_out(cli.out.clone(), None).map(|dir| Sink::new(dir, formats)).transpose()
}

fn stdout_format(cli: &Cli) -> Format {
    cli.format.first().copied().unwrap_or(Format::Csv)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::AiryZeros { count } => commands::airy_zeros(*count, optional_sink(cli)?.as_ref(), stdout_format(cli)),
        Command::Fit { report } => commands::fit(report, optional_sink(cli)?.as_ref(), stdout_format(cli)),
        command => {
            let plan = load_plan(cli)?;
            let sink = plan_sink(cli, &plan)?;
            match command {
                Command::Solve { at } => commands::solve(&plan, &sink, *at),
                Command::Sweep => commands::sweep(&plan, &sink),
                Command::Predict => commands::predict(&plan, &sink),
                Command::Check => commands::check(&plan, &sink),
                Command::AiryZeros { .. } | Command::Fit { .. } => unreachable!(),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global().expect("first pool setup");
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

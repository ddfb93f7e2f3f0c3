//! `mussel-bif`: batch front end for the bifurcation analysis and simulator.

mod commands;
mod config;
mod failure;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::{
    AlphaRangeArgs, ClassifyArgs, SimulateArgs, SweepArgs, TauStarArgs, TuringCurveArgs, VerifyArgs,
};
use crate::failure::{Failure, Outcome};

/// Environment variable overriding the worker-thread count.
const THREADS_VAR: &str = "MUSSEL_BIF_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "mussel-bif",
    version,
    about = "Bifurcation analysis of a delayed diffusive mussel-algae model"
)]
struct Cli {
    /// TOML file with any of the keys r, alpha, gamma, d, tau, l.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Parameter override applied after the config file (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory, created on success.
    #[arg(long, global = true, value_name = "DIR", default_value = "mussel-bif-out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Hypotheses, equilibria and delay-free stability verdicts.
    Classify(ClassifyArgs),
    /// Kinetic Hopf points r_H over a range of alpha.
    HopfCurve(AlphaRangeArgs),
    /// Critical Turing curve, optionally with a region map.
    TuringCurve(TuringCurveArgs),
    /// Crossing frequencies, critical delays and the first critical delay.
    TauStar(TauStarArgs),
    /// Normal-form coefficients at the first critical delay.
    NormalForm,
    /// Integrate the delayed reaction-diffusion system.
    Simulate(SimulateArgs),
    /// Kinetic amplitude sweep over r.
    Sweep(SweepArgs),
    /// Run every closed form against its numerical oracle.
    Verify(VerifyArgs),
}

fn configure_threads() -> Outcome<()> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize =
        value.trim().parse().ok().filter(|n| *n >= 1).ok_or_else(|| {
            Failure::Usage(format!("{THREADS_VAR} must be a positive integer, got {value:?}"))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Numerical(format!("thread pool: {e}")))
}

fn run(cli: &Cli) -> Outcome<()> {
    configure_threads()?;
    let p = config::load_params(cli.config.as_deref(), &cli.set)?;
    let out = cli.out.as_path();
    match &cli.command {
        Command::Classify(a) => commands::classify(&p, a, out),
        Command::HopfCurve(a) => commands::hopf_curve(&p, a, out),
        Command::TuringCurve(a) => commands::turing_curve_cmd(&p, a, out),
        Command::TauStar(a) => commands::tau_star_cmd(&p, a, out),
        Command::NormalForm => commands::normal_form_cmd(&p, out),
        Command::Simulate(a) => commands::simulate(&p, a, out),
        Command::Sweep(a) => commands::sweep(&p, a, out),
        Command::Verify(a) => commands::verify(&p, a, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("mussel-bif: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}

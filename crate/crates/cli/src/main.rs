//! `qfp`: equilibria, k-sweeps, simulations and the verification suite.
//!
//! Exit codes: 0 success, 1 verification failure, 2 supercritical density,
//! 3 I/O error, 4 solver failure, 64 invalid usage or parameters.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "qfp", version, about = "Quantum Fokker-Planck equilibria and kinetic simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for the equilibrium constant and print energy, entropy and free energy.
    Equilibrium {
        #[command(flatten)]
        model: ModelArgs,
        /// Quantum parameter: positive for bosons, negative for fermions.
        #[arg(long, allow_hyphen_values = true)]
        k: f64,
        /// Also write the row as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve over an evenly spaced range of k and report inequality verdicts.
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, allow_hyphen_values = true)]
        k_min: f64,
        #[arg(long, allow_hyphen_values = true)]
        k_max: f64,
        /// Number of rows.
        #[arg(long, default_value_t = 101)]
        steps: usize,
        /// Output CSV path; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a kinetic simulation described by a TOML configuration file.
    Simulate {
        config: PathBuf,
        /// Diagnostics CSV path, overriding the configuration.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Final field CSV path, overriding the configuration.
        #[arg(long)]
        field: Option<PathBuf>,
    },
    /// Run every verification criterion and print a pass/fail table.
    Verify {
        /// Skip the long Lyapunov-decay simulation.
        #[arg(long)]
        quick: bool,
        /// Scale every direct L-function evaluation by (1 + BIAS).
        #[arg(long, hide = true, default_value_t = 0.0, allow_hyphen_values = true)]
        tamper_polylog: f64,
    },
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Velocity dimension.
    #[arg(long, default_value_t = 3)]
    n: u32,
    /// Domain volume.
    #[arg(long, default_value_t = 1.0)]
    vol: f64,
    /// Total density.
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { commands::EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Equilibrium { model, k, out } => commands::equilibrium(&model, k, out.as_deref()),
        Command::Sweep {
            model,
            k_min,
            k_max,
            steps,
            out,
        } => commands::sweep(&model, k_min, k_max, steps, out.as_deref()),
        Command::Simulate { config, out, field } => commands::simulate(&config, out.as_deref(), field.as_deref()),
        Command::Verify { quick, tamper_polylog } => commands::verify(quick, tamper_polylog),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use spectral_control::{preset, run_config, threads_from_env, CliError, Command, ExperimentConfig};

#[derive(Parser, Debug)]
#[command(
    name = "spectral-control",
    version,
    about = "Spectral controllability experiments for Laguerre and Jacobi diffusions"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Tabulate orthonormal polynomials and recurrence coefficients.
    Basis(RunArgs),
    /// Actuator Fourier coefficients per mode.
    Coeffs(RunArgs),
    /// Approximate-controllability certificate (exit 2 if not certified).
    Check(RunArgs),
    /// Minimum-energy piecewise-constant steering from z0 to z1.
    Steer(RunArgs),
    /// Singular values of the truncated control-to-state map.
    Gramian(RunArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Experiment config (JSON).
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in experiment: laguerre-1d-cir, legendre-2d, bessel-abstract.
    #[arg(long)]
    preset: Option<String>,
    /// Directory for JSON and CSV output; overrides `out_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    let (command, args) = match cli.command {
        Cmd::Basis(a) => (Command::Basis, a),
        Cmd::Coeffs(a) => (Command::Coeffs, a),
        Cmd::Check(a) => (Command::Check, a),
        Cmd::Steer(a) => (Command::Steer, a),
        Cmd::Gramian(a) => (Command::Gramian, a),
    };
    let config = match (&args.config, &args.preset) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(name)) => preset(name)?,
        (None, None) => unreachable!("clap enforces one source"),
    };
    let threads = threads_from_env()?;
    let outcome = run_config(command, &config, threads)?;
    print!("{}", outcome.json);
    if let Some(dir) = args.out.or(config.out_dir) {
        let written = outcome
            .write_to(&dir)
            .with_context(|| format!("writing results to {}", dir.display()))?;
        for path in written {
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = err
                .downcast_ref::<CliError>()
                .map_or(1, CliError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}

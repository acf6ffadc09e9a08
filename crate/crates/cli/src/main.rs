//! `spps`: batch front end for the spectral parameter power series solver.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 numeric failure.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;

use commands::{parse_complex, Problem, SpectrumRequest};
use error::{CliError, CliResult};

#[derive(Parser)]
#[command(
    name = "spps",
    version,
    about = "Sturm-Liouville solutions and spectra by spectral parameter power series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate u1, u2 and their derivatives at one omega.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_parser = complex_arg, allow_hyphen_values = true)]
        omega: Complex64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Eigenvalues in a lambda window, optionally with eigenfunctions.
    Spectrum {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        lambda_min: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        lambda_max: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        eigenfunctions_out: Option<PathBuf>,
    },
    /// Dump the X and X~ families up to index N.
    Powers {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Darboux-transformed potential and solutions (requires p = 1).
    Darboux {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_parser = complex_arg, allow_hyphen_values = true)]
        omega: Complex64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Residual and Wronskian certificates for a list of omegas.
    Verify {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated, e.g. `1,2+0.5i,3i`.
        #[arg(long, value_delimiter = ',', value_parser = complex_arg, allow_hyphen_values = true)]
        omegas: Vec<Complex64>,
        #[arg(long, default_value_t = 1e-5)]
        threshold: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn complex_arg(s: &str) -> Result<Complex64, String> {
    parse_complex(s)
}

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var("SPPS_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("SPPS_THREADS must be a non-negative integer, got `{value}`")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot size thread pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    match cli.command {
        Command::Solve { config, omega, out } => {
            let problem = Problem::load(&config)?;
            let out = out.or_else(|| problem.cfg.out.clone());
            commands::solve(&problem, omega, out.as_deref())
        }
        Command::Spectrum {
            config,
            lambda_min,
            lambda_max,
            out,
            eigenfunctions_out,
        } => {
            let problem = Problem::load(&config)?;
            let req = SpectrumRequest {
                lambda_min,
                lambda_max,
                out: out.as_deref(),
                eigenfunctions_out: eigenfunctions_out.as_deref(),
            };
            for note in commands::spectrum(&problem, &req)? {
                eprintln!("spps: note: {note}");
            }
            Ok(())
        }
        Command::Powers { config, n, out } => {
            let problem = Problem::load(&config)?;
            let out = out.or_else(|| problem.cfg.out.clone());
            commands::powers(&problem, n, out.as_deref())
        }
        Command::Darboux { config, omega, out } => {
            let problem = Problem::load(&config)?;
            let out = out.or_else(|| problem.cfg.out.clone());
            commands::darboux(&problem, omega, out.as_deref())
        }
        Command::Verify {
            config,
            omegas,
            threshold,
            out,
        } => {
            if omegas.is_empty() {
                return Err(CliError::Usage("verify needs at least one omega".into()));
            }
            let problem = Problem::load(&config)?;
            let out = out.or_else(|| problem.cfg.out.clone());
            commands::verify(&problem, &omegas, threshold, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let text = e.to_string();
            let line = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("spps: error[usage]: {}", line.trim_start_matches("error: "));
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("spps: error[{}]: {}", e.kind(), e.to_string().replace('\n', " "));
            ExitCode::from(e.exit_code())
        }
    }
}

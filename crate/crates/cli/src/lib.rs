//! Batch front-end for `gchlab-core`.
//!
//! ```text
//! gchlab <solve|classify|bridge|mollify-study|perturb> --config PATH [--out DIR]
//! ```
//!
//! Exit codes: 0 success, 2 wave breaking detected, 3 numerical failure or
//! step floor, 4 configuration or usage error, 1 I/O error.

pub mod commands;
pub mod config;
pub mod error;
pub mod initial;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{execute, Command};
pub use config::{
    parse_config, parse_config_str, InitialKind, InitialSection, InitialSpec, RunConfigFile,
};
pub use error::{CliError, CliResult};
pub use initial::make_initial;

pub const THREADS_ENV: &str = "GCHLAB_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "gchlab",
    version,
    about = "Generalized Camassa-Holm numerical laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Integrate the configured initial data to `time.t_end`.
    Solve(RunArgs),
    /// Sign-pattern verdict and breaking threshold of the initial data.
    Classify(RunArgs),
    /// Cross-check the gCH run against the transformed DP run.
    Bridge(RunArgs),
    /// Runs from mollified data over `study.n_values`.
    MollifyStudy(RunArgs),
    /// Continuous-dependence check against a bumped copy of the data.
    Perturb(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Overrides `output.dir`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

fn configure_threads() -> CliResult<()> {
    let Some(raw) = std::env::var_os(THREADS_ENV) else {
        return Ok(());
    };
    let threads = raw
        .to_str()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            CliError::Usage(format!(
                "{THREADS_ENV} must be a positive integer, got {raw:?}"
            ))
        })?;
    // A pool may already exist when embedded; the first configuration wins.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
    Ok(())
}

/// Parses `argv`, runs the subcommand and returns the process exit code.
/// Diagnostics go to stderr.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 4 } else { 0 };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("gchlab: {e}");
        return e.exit_code();
    }
    let (command, args) = match cli.command {
        Sub::Solve(a) => (Command::Solve, a),
        Sub::Classify(a) => (Command::Classify, a),
        Sub::Bridge(a) => (Command::Bridge, a),
        Sub::MollifyStudy(a) => (Command::MollifyStudy, a),
        Sub::Perturb(a) => (Command::Perturb, a),
    };
    match execute(command, &args.config, args.out.as_deref()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("gchlab: {e}");
            e.exit_code()
        }
    }
}

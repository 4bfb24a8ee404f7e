//! Command-line driver for `dsm-core`.
//!
//! Exit codes: 0 on success, 1 when a computation or file fails, 2 on a
//! usage error. Diagnostics are single lines on stderr.

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::Parser;
use dsm_core::OracleCap;

pub mod args;
mod commands;
mod output;

pub use args::Cli;
pub use output::FORMAT_VERSION;

/// Environment variable consulted when `--oracle-cap` is absent.
pub const ORACLE_CAP_ENV: &str = "DSM_ORACLE_CAP";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    Usage(String),
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Domain(m) => m,
        }
    }
}

/// Parses `argv` (program name first). Help and version requests come back
/// as `Err(Ok(text))`.
pub fn parse_args<I, T>(argv: I) -> Result<Cli, Result<String, CliError>>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    Cli::try_parse_from(argv).map_err(|e| match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Ok(e.to_string()),
        ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
            Err(CliError::Usage("a subcommand is required, see --help".into()))
        }
        _ => Err(CliError::Usage(first_paragraph(&e.to_string()))),
    })
}

/// Collapses clap's multi-line report to its first paragraph on one line.
fn first_paragraph(text: &str) -> String {
    let line = text
        .lines()
        .take_while(|l| !l.trim().is_empty())
        .map(str::trim)
        .collect::<Vec<_>>()
        .join(" ");
    line.strip_prefix("error: ").unwrap_or(&line).to_string()
}

fn oracle_cap(flag: Option<usize>) -> Result<OracleCap, CliError> {
    if let Some(n) = flag {
        return Ok(OracleCap(n));
    }
    match std::env::var(ORACLE_CAP_ENV) {
        Ok(v) => v.trim().parse().map(OracleCap).map_err(|_| {
            CliError::Usage(format!("{ORACLE_CAP_ENV} must be a node count, got '{v}'"))
        }),
        Err(_) => Ok(OracleCap::DEFAULT),
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    use args::Command::*;
    let ctx = commands::Context {
        cap: oracle_cap(cli.oracle_cap)?,
    };
    match &cli.command {
        Generate(a) => commands::generate(&ctx, a),
        Diffuse(a) => commands::diffuse(&ctx, a),
        Verify(a) => commands::verify(&ctx, a),
        Spectrum(a) => commands::spectrum(&ctx, a),
        GapCurve(a) => commands::gap_curve(&ctx, a),
        Energy(a) => commands::energy(&ctx, a),
        Decay(a) => commands::decay(&ctx, a),
        Rank(a) => commands::rank(&ctx, a),
        Centrality(a) => commands::centrality(&ctx, a),
        Encode(a) => commands::encode(&ctx, a),
        Bench(a) => commands::bench(&ctx, a),
    }
}

/// Parses and runs, printing diagnostics. Returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match parse_args(argv) {
        Ok(cli) => cli,
        Err(Ok(text)) => {
            print!("{text}");
            return 0;
        }
        Err(Err(e)) => {
            eprintln!("error: {}", e.message());
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

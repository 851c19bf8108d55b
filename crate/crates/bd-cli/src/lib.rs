//! Library surface of the `bd` command-line tool.
//!
//! The binary is a thin wrapper around [`run`]; everything else lives here so
//! the pieces (config precedence, rational parsing, report rendering) are
//! unit-testable. Reports are deterministic: identical configuration and seed
//! produce identical bytes, whatever the thread count.

pub mod cli;
pub mod commands;
pub mod config;
pub mod opio;
pub mod report;

use std::ffi::OsString;

use clap::Parser;

pub use cli::{Cli, Command};
pub use config::{Mode, OutputFormat, RunConfig};

/// Exit code 2. Bad flags, unparseable numbers, missing or malformed files.
/// Exit code 1. Semantically invalid mathematics (infeasible parameters).
/// Exit code 3. Resource limits (the stage-dimension cap).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CliError {
    Usage(String),
    Semantic(String),
    Resource(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Semantic(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Resource(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Semantic(m) | CliError::Resource(m) => m,
        }
    }
}

/// A rendered report plus the exit status it should carry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommandOutput {
    /// Full report text, newline-terminated; written to stdout (and `--out`).
    pub report: String,
    /// Human-facing notes for stderr (also embedded in JSON reports).
    pub warnings: Vec<String>,
    /// 0 on success; `validate` returns 1 when a condition fails.
    pub exit: i32,
}

/// Runs the CLI on the process arguments and returns the exit code.
pub fn run() -> i32 {
    run_from(std::env::args_os())
}

/// Runs the CLI on explicit arguments (first entry is the program name).
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let parsed = match Cli::try_parse_from(args) {
        Ok(p) => p,
        Err(e) => {
            // clap prints help/version to stdout (exit 0) and errors to
            // stderr (exit 2) on its own.
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };

    if let Some(n) = parsed.common.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return 2;
        }
        // The pool can only be sized once per process; a pool that already
        // exists is fine (results do not depend on the thread count).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }

    let cfg = match RunConfig::resolve(&parsed.common) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {}", e.message());
            return e.exit_code();
        }
    };

    match commands::dispatch(&parsed.command, &cfg) {
        Ok(output) => {
            for w in &output.warnings {
                eprintln!("warning: {w}");
            }
            print!("{}", output.report);
            if let Some(path) = &cfg.out {
                if let Err(e) = std::fs::write(path, output.report.as_bytes()) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return 2;
                }
            }
            output.exit
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

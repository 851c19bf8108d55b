//! Command-line definitions for the `bd` binary.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Finite stages of the Bourgain–Delbaen construction, with norm-growth and
/// operator-compactness experiments.
#[derive(Debug, Parser)]
#[command(name = "bd", version, about, max_term_width = 100)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,

    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every subcommand. Precedence: flags > config file >
/// defaults (demo parameters a=0.97, b=0.443648, lambda=8.61).
#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Parameter a, as a decimal or "p/q" fraction
    #[arg(long, global = true, value_name = "NUM")]
    pub a: Option<String>,

    /// Parameter b, as a decimal or "p/q" fraction
    #[arg(long, global = true, value_name = "NUM")]
    pub b: Option<String>,

    /// Embedding-norm budget lambda, as a decimal or "p/q" fraction
    #[arg(long, global = true, value_name = "NUM")]
    pub lambda: Option<String>,

    /// Index-range convention: "inclusive" or "paper-strict"
    #[arg(long, global = true, value_name = "NAME")]
    pub convention: Option<String>,

    /// Arithmetic: "float" (f64) or "exact" (big rationals)
    #[arg(long, global = true, value_name = "NAME")]
    pub mode: Option<String>,

    /// Number of stages to build (default 5)
    #[arg(long, global = true, value_name = "N")]
    pub stages: Option<String>,

    /// Seed for randomized block generation (default 0)
    #[arg(long, global = true, value_name = "S")]
    pub seed: Option<String>,

    /// Report format: "json" or "csv"
    #[arg(long, global = true, value_name = "NAME")]
    pub format: Option<String>,

    /// Also write the report to this file
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Read defaults from a key=value config file
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Size of the worker-thread pool (default: one per CPU)
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,

    /// Abort stage building once a dimension would exceed this cap
    #[arg(long, global = true, value_name = "N")]
    pub cap: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check parameter feasibility and solve the growth-exponent equation
    Validate,
    /// Build the stages and report dimensions and extension-tuple counts
    Build,
    /// Measure how partial-sum norms of a block sequence grow
    Grow(GrowArgs),
    /// Bracket an operator's norm, profile its tail defects, hunt witnesses
    Probe(ProbeArgs),
}

#[derive(Debug, Args)]
pub struct GrowArgs {
    /// Candidate family: "bd" (fresh-coordinate indicators in the built
    /// stages) or "l2" (random unit blocks with disjoint supports)
    #[arg(long, default_value = "bd", value_name = "NAME")]
    pub candidate: String,

    /// Number of blocks (default: 16 for l2; for bd, every stage that
    /// appends coordinates)
    #[arg(long, value_name = "N")]
    pub count: Option<usize>,

    /// Comma-separated block widths for the l2 candidate, cycled to count
    #[arg(long, default_value = "1", value_name = "W,W,...")]
    pub widths: String,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    /// Matrix file: CSV rows, or JSON array-of-arrays / {"rows": [...]}
    #[arg(long, value_name = "PATH")]
    pub operator: PathBuf,

    /// Stage whose dimension matches the matrix row count (inferred when
    /// omitted)
    #[arg(long, value_name = "N")]
    pub target_stage: Option<usize>,

    /// Stage the operator's columns are pushed through before measuring
    /// (default: target stage + 2, clamped to the built top)
    #[arg(long, value_name = "N")]
    pub extension_stage: Option<usize>,

    /// Tail-norm threshold the witness search must beat (default: half the
    /// norm lower bound)
    #[arg(long, value_name = "X")]
    pub delta: Option<f64>,

    /// Restrict the witness support to columns strictly past this index
    #[arg(long, default_value_t = 0, value_name = "K")]
    pub beyond: usize,

    /// Lower-bound constant in the growth-contradiction bound
    #[arg(long, default_value_t = 1.0, value_name = "C")]
    pub c1: f64,

    /// Upper-bound constant in the growth-contradiction bound
    #[arg(long, default_value_t = 1.0, value_name = "C")]
    pub c2: f64,

    /// Growth exponent for the contradiction bound (default: solved from a
    /// and b)
    #[arg(long, value_name = "X")]
    pub alpha: Option<f64>,

    /// Defect size counted as numerically compact at the halfway column
    #[arg(long, default_value_t = bd_core::operators::DEFAULT_COMPACT_THRESHOLD, value_name = "X")]
    pub compact_threshold: f64,
}

//! Command-line front end for the quadratic-measurement recovery library.
//!
//! Subcommands: `gen` (write an instance file), `run` (one algorithm,
//! CSV rows on stdout), `sweep` (phase-transition table over parameter
//! grids), `ogp` (first-moment curve + brute-force overlap profile),
//! `validate` (invariant suites). Every command is deterministic under an
//! explicit `--seed`; omitting it draws a seed from entropy and reports it
//! on stderr. `QUADREC_WORKERS` caps the worker pool; results are
//! byte-identical for any worker count.
//!
//! Exit codes: 0 success (and validation pass), 1 validation failure,
//! 2 usage error, 3 I/O or file-format error, 4 enumeration budget
//! exceeded, 5 degenerate instance or algorithm failure that prevented
//! output.

mod commands;
mod config;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "quadrec", version, about = "sparse recovery from quadratic measurements")]
struct Cli {
    /// Flat key=value config file (flags > config > defaults).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance file.
    Gen(GenArgs),
    /// Run one algorithm; one CSV row per seed on stdout.
    Run(RunArgs),
    /// Success-rate table over parameter grids.
    Sweep(SweepArgs),
    /// First-moment curve and brute-force overlap profile.
    Ogp(OgpArgs),
    /// Invariant suites (chi2 tails, empirical RIP).
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Quadratic,
    Pr,
    Binary,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    /// Materialize when the ensemble holds at most 10⁷ entries (n·n·m for
    /// matrix ensembles, n·m for rank-one vectors), stream otherwise.
    Auto,
    Streamed,
    Materialized,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NoiseArg {
    None,
    Gaussian,
    Laplace,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgorithmArg {
    Init,
    Spf,
    Tgd,
    PrInit,
}

/// Inline instance description shared by gen, run and sweep.
#[derive(Args, Clone)]
pub struct InstanceArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// Target incoherence ‖x₀‖∞/‖x₀‖₂ in [1/√k, 1].
    #[arg(long)]
    mu0: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, value_enum, default_value_t = NoiseArg::Gaussian)]
    noise: NoiseArg,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    mode: ModeArg,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value_t = KindArg::Quadratic)]
    kind: KindArg,
    #[command(flatten)]
    instance: InstanceArgs,
    /// Overparametrization budget (binary kind only).
    #[arg(long)]
    kprime: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[arg(value_enum)]
    algorithm: AlgorithmArg,
    /// Instance file; mutually exclusive with inline generation flags.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[command(flatten)]
    inline: InstanceArgs,
    /// Number of consecutive seeds to run (inline generation only).
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Support-threshold constant (init stages).
    #[arg(long)]
    c_thr: Option<f64>,
    /// TGD step size.
    #[arg(long)]
    eta: Option<f64>,
    /// TGD threshold constant.
    #[arg(long)]
    c_tau: Option<f64>,
    /// TGD iteration cap.
    #[arg(long)]
    t_max: Option<usize>,
    /// SPF outer iteration cap.
    #[arg(long)]
    t_outer: Option<usize>,
    /// SPF inner IHT iterations.
    #[arg(long)]
    l_inner: Option<usize>,
    /// Stopping tolerance (angle for SPF, step norm for TGD).
    #[arg(long)]
    tol: Option<f64>,
    /// Write per-iteration traces to <prefix>_seed<seed>.csv.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Append a wall_ms column (excluded from the byte-determinism contract).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    algorithm: AlgorithmArg,
    /// Comma-separated grid, e.g. --n-grid 50,100.
    #[arg(long, value_delimiter = ',', required = true)]
    n_grid: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    k_grid: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    m_grid: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    mu0_grid: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    sigma_grid: Vec<f64>,
    #[arg(long, value_enum, default_value_t = NoiseArg::Gaussian)]
    noise: NoiseArg,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    mode: ModeArg,
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Sign-resolved error cutoff counted as success.
    #[arg(long)]
    success_threshold: Option<f64>,
    #[arg(long)]
    c_thr: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    c_tau: Option<f64>,
    #[arg(long)]
    t_max: Option<usize>,
    #[arg(long)]
    t_outer: Option<usize>,
    #[arg(long)]
    l_inner: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct OgpArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    kprime: usize,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    /// Union-bound slack α; defaults to ln k.
    #[arg(long)]
    alpha: Option<f64>,
    /// Instances to survey (seeds seed, seed+1, …).
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Enumeration budget (candidates).
    #[arg(long)]
    budget: Option<u128>,
    #[arg(long)]
    curve_out: PathBuf,
    #[arg(long)]
    profile_out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    /// Suite: chi2 | rip.
    #[arg(long)]
    suite: String,
    /// chi2: single tail level t (default grid {1, 2, 4}).
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

fn init_workers() {
    let threads = std::env::var("QUADREC_WORKERS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok());
    if let Some(t) = threads {
        // A second initialization (e.g. in tests) is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
}

/// Resolve --seed, drawing from entropy (and reporting) when absent.
fn resolve_seed(seed: Option<u64>) -> u64 {
    match seed {
        Some(s) => s,
        None => {
            let t = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_nanos() as u64)
                .unwrap_or(0);
            let s = t ^ ((std::process::id() as u64) << 32);
            eprintln!("seed: {s}");
            s
        }
    }
}

fn exit_code(err: &quadrec::Error) -> i32 {
    use quadrec::Error::*;
    match err {
        InvalidArgument(_) => 2,
        Io(_) | Format(_) => 3,
        BudgetExceeded { .. } => 4,
        _ => 5,
    }
}

fn main() {
    init_workers();
    let cli = Cli::parse();
    let cfg = match config::Config::load(cli.config.as_deref()) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
    };
    let outcome = match cli.command {
        Command::Gen(args) => commands::cmd_gen(args, &cfg),
        Command::Run(args) => commands::cmd_run(args, &cfg),
        Command::Sweep(args) => commands::cmd_sweep(args, &cfg),
        Command::Ogp(args) => commands::cmd_ogp(args, &cfg),
        Command::Validate(args) => commands::cmd_validate(args, &cfg),
    };
    match outcome {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(exit_code(&err));
        }
    }
}

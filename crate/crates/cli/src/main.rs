mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use output::Format;

/// Experiments on majorant properties of exponential sums.
#[derive(Parser, Debug)]
#[command(name = "majorantlab", version, args_override_self = true)]
struct Cli {
    /// Worker threads (falls back to MAJORANTLAB_THREADS). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output path stem; `.csv` / `.json` are appended. Stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Key-value or JSON file of flag defaults; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a frequency set and write it in set-file format.
    Gen(GenArgs),
    /// ‖Σ_{n∈A} e(nθ)‖_p of a set file or generated set.
    Norm(NormArgs),
    /// Majorant ratio by projected ascent.
    Extremal(ExtremalArgs),
    /// Size sweep with a log-log exponent fit.
    Scaling(ScalingArgs),
    /// Checks of the probabilistic inequalities.
    Probcheck(ProbArgs),
    /// Lévy means, packings and covers of normed spaces.
    Entropy(EntropyArgs),
}

const SUBCOMMANDS: &[&str] = &["gen", "norm", "extremal", "scaling", "probcheck", "entropy"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelName {
    Bernoulli,
    /// Bernoulli at τ = N^{−1+2/p} (scaling only).
    Critical,
    Doubling,
    PowerSelector,
    PerturbedAp,
    Squares,
    Ap,
    Ap2d,
    Full,
}

#[derive(Args, Clone, Debug, Default, Serialize)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub model: Option<ModelName>,
    /// Ambient size N.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub tau: Option<f64>,
    /// Density exponent, τ = N^{−δ}.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Doubling depth, τ = 2^{−k}.
    #[arg(long)]
    pub k: Option<u32>,
    /// Power-selector exponent.
    #[arg(long)]
    pub exponent: Option<u32>,
    #[arg(long)]
    pub b: Option<usize>,
    #[arg(long)]
    pub a: Option<usize>,
    #[arg(long)]
    pub len: Option<usize>,
    /// Perturbation radius.
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long)]
    pub a1: Option<usize>,
    #[arg(long)]
    pub len1: Option<usize>,
    #[arg(long)]
    pub a2: Option<usize>,
    #[arg(long)]
    pub len2: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
#[command(args_override_self = true)]
pub struct GenArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Serialize)]
#[command(args_override_self = true)]
pub struct NormArgs {
    /// Set file; otherwise the set is generated from the model flags.
    #[arg(long)]
    pub set: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub p: f64,
    /// Grid points per unit of ambient size.
    #[arg(long, default_value_t = majorant_lab::expsum::DEFAULT_OVERSAMPLE)]
    pub oversample: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ball {
    Linf,
    L2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Alphabet {
    Real,
    Quarter,
}

#[derive(Args, Debug, Serialize)]
#[command(args_override_self = true)]
pub struct ExtremalArgs {
    #[arg(long)]
    pub set: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub p: f64,
    /// Coefficient constraint: |a_n| ≤ 1 or Σ|a_n|² ≤ 1.
    #[arg(long, value_enum, default_value_t = Ball::Linf)]
    pub domain: Ball,
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = majorant_lab::expsum::DEFAULT_OVERSAMPLE)]
    pub oversample: f64,
    /// Also run the exhaustive phase search and compare.
    #[arg(long, value_enum)]
    pub sign_search: Option<Alphabet>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StatName {
    DirichletNormP,
    MajorantRatio,
    KpConstant,
    StarRatio,
}

#[derive(Args, Debug, Serialize)]
#[command(args_override_self = true)]
pub struct ScalingArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub p: f64,
    /// `lo:hi` (powers of two from lo to hi) or a comma list.
    #[arg(long)]
    pub sizes: String,
    #[arg(long, default_value_t = 32)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = StatName::DirichletNormP)]
    pub statistic: StatName,
    /// Perturbed progressions: s = ⌈L^β⌉.
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,
    /// Perturbed progressions: step a = a_factor·s.
    #[arg(long, default_value_t = 4)]
    pub a_factor: usize,
    #[arg(long, default_value_t = majorant_lab::expsum::DEFAULT_OVERSAMPLE)]
    pub oversample: f64,
    #[arg(long, default_value_t = majorant_lab::scaling::DEFAULT_FIT_MIN_SIZE)]
    pub fit_min_size: usize,
    /// Allowed distance between fitted and predicted exponent.
    #[arg(long, default_value_t = 0.15)]
    pub slope_tol: f64,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub max_iter: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    Ldt,
    Mgf,
    Moments,
    Salem,
    Sz2,
    Centered,
}

#[derive(Args, Debug, Serialize)]
#[command(args_override_self = true)]
pub struct ProbArgs {
    #[arg(long, value_enum)]
    pub check: Check,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated λ values.
    #[arg(long, default_value = "0,1,2,3,4,5")]
    pub lambdas: String,
    /// Largest moment order.
    #[arg(long, default_value_t = 10)]
    pub q: u32,
    #[arg(long, default_value_t = 64)]
    pub len: usize,
    #[arg(long, default_value_t = 4)]
    pub s: usize,
    #[arg(long, default_value_t = 16)]
    pub a: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormName {
    L1,
    Linf,
    L2,
    TrigLq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntropyTask {
    Levy,
    Chain,
    Volume,
}

#[derive(Args, Debug, Serialize)]
#[command(args_override_self = true)]
pub struct EntropyArgs {
    #[arg(long, value_enum, default_value_t = EntropyTask::Levy)]
    pub task: EntropyTask,
    #[arg(long, value_enum)]
    pub norm: NormName,
    #[arg(long)]
    pub dim: usize,
    /// Exponent of the trigonometric Lq norm.
    #[arg(long, default_value_t = 4.0)]
    pub q: f64,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    /// Scale t.
    #[arg(long, default_value_t = 0.5)]
    pub t: f64,
    /// Chain task: points per instance and number of instances.
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    #[arg(long, default_value_t = 20)]
    pub instances: usize,
    /// Constant in the dual Sudakov bound.
    #[arg(long, default_value_t = 1.0)]
    pub constant: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn threads(flag: Option<usize>) -> Result<Option<usize>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("MAJORANTLAB_THREADS") {
        Ok(v) if !v.trim().is_empty() => Ok(Some(v.trim().parse().context("MAJORANTLAB_THREADS is not a number")?)),
        _ => Ok(None),
    }
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(n) = threads(cli.threads)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let out = cli.out.as_deref();
    let report = match &cli.command {
        Command::Gen(a) => return commands::gen(a, out).map(|_| true),
        Command::Norm(a) => commands::norm(a)?,
        Command::Extremal(a) => commands::extremal(a)?,
        Command::Scaling(a) => commands::scaling(a)?,
        Command::Probcheck(a) => commands::probcheck(a)?,
        Command::Entropy(a) => commands::entropy(a)?,
    };
    let mut report = report;
    report.config.insert("format".into(), serde_json::to_value(cli.format)?);
    report.emit(out, cli.format)?;
    eprintln!("{}", report.summary);
    for f in &report.failures {
        eprintln!("invariant failed: {f}");
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    let argv = match config::expand_args(std::env::args().collect(), SUBCOMMANDS) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::try_parse_from(&argv).unwrap_or_else(|e| e.exit());
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

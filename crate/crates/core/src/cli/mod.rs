//! `spdot` command-line front end.
//!
//! Exit codes: 0 on success, 2 for unreadable or invalid input, 3 for
//! numerical or solver failures.

pub mod dataset;
mod report;

use std::ffi::OsString;
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::adapt::{adapt, AdaptationConfig, LambdaPolicy, MassPolicy, SigmaPolicy, Solver};
use crate::error::Error;
use crate::experiments::{
    covariance, cosine_trials, three_config_comparison_with, toy_a_sweep, toy_b_run, uniform_grid, CosineParams,
    TOY_A_GRID, TOY_B_GRID,
};
use crate::transport::Metric;
use dataset::{
    ensure_dir, format_float, load_spd, load_timeseries, matrix_csv, write_json, write_text, SpdDataset,
    TimeSeriesDataset,
};
pub use report::{InputDigest, PlanStats, RunReport};

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// A failure with the exit code it maps to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_NUMERICAL,
            message: message.into(),
        }
    }

    fn from_library(context: impl fmt::Display, e: Error) -> Self {
        let message = format!("{context}: {e}");
        if e.is_input_error() {
            CliError::input(message)
        } else {
            CliError::numerical(message)
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Debug, Parser)]
#[command(name = "spdot", version, about = "Optimal-transport domain adaptation for SPD matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Adapt a source SPD dataset onto a target SPD dataset.
    Adapt(AdaptArgs),
    /// Congruence sweep over θ ∈ [0, π] on random 2×2 matrices.
    ToyA(ToyAArgs),
    /// Rotation grid search against a rotated and stretched copy.
    ToyB(ToyBArgs),
    /// Cosine-signal pairs matched under three transport setups.
    Cosine(CosineArgs),
    /// Sample covariances of a time-series dataset.
    Covariance(CovarianceArgs),
}

#[derive(Debug, Args)]
pub struct AdaptArgs {
    pub source: PathBuf,
    pub target: PathBuf,
    #[arg(long, default_value = "riemannian")]
    pub metric: Metric,
    #[arg(long, value_parser = parse_solver, default_value = "sinkhorn")]
    pub solver: Solver,
    /// `auto` or a positive number.
    #[arg(long, value_parser = parse_lambda, default_value = "auto")]
    pub lambda: LambdaPolicy,
    /// Label-penalty weight; defaults to twice the median cost.
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long, value_parser = parse_mass, default_value = "uniform")]
    pub mass: MassPolicy,
    /// Kernel width `σ` for `--mass kde`: `auto` or a positive number.
    #[arg(long, value_parser = parse_sigma, default_value = "auto")]
    pub kde_sigma: SigmaPolicy,
    #[arg(long)]
    pub top_k: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    /// Record wall-clock timings in the report.
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct ToyAArgs {
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    #[arg(long, default_value_t = TOY_A_GRID)]
    pub grid: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct ToyBArgs {
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    #[arg(long, default_value_t = TOY_B_GRID)]
    pub grid: usize,
    /// Rotation angle of the hidden map.
    #[arg(long, default_value_t = 1.0)]
    pub theta_star: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct CosineArgs {
    #[arg(long, default_value_t = 40)]
    pub n: usize,
    #[arg(long, default_value_t = 5)]
    pub channels: usize,
    #[arg(long, default_value_t = 101)]
    pub samples: usize,
    #[arg(long, default_value_t = 0.01)]
    pub sample_period: f64,
    /// Drop the additive noise (spectral checks only).
    #[arg(long)]
    pub noiseless: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct CovarianceArgs {
    pub input: PathBuf,
    /// Output `spd` dataset file.
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_solver(s: &str) -> Result<Solver, String> {
    match s {
        "exact" => Ok(Solver::Exact),
        "sinkhorn" => Ok(Solver::Sinkhorn),
        "sinkhorn-labels" => Ok(Solver::SinkhornLabels),
        _ => Err(format!("unknown solver `{s}` (exact, sinkhorn, sinkhorn-labels)")),
    }
}

fn parse_mass(s: &str) -> Result<MassPolicy, String> {
    match s {
        "uniform" => Ok(MassPolicy::Uniform),
        "kde" => Ok(MassPolicy::Kde),
        _ => Err(format!("unknown mass policy `{s}` (uniform, kde)")),
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        _ => Err(format!("expected `auto` or a positive number, got `{s}`")),
    }
}

fn parse_lambda(s: &str) -> Result<LambdaPolicy, String> {
    if s == "auto" {
        return Ok(LambdaPolicy::Auto);
    }
    parse_positive(s).map(LambdaPolicy::Fixed)
}

fn parse_sigma(s: &str) -> Result<SigmaPolicy, String> {
    if s == "auto" {
        return Ok(SigmaPolicy::MedianSquaredDistance);
    }
    parse_positive(s).map(|sigma| SigmaPolicy::Fixed(sigma * sigma))
}

/// Parses `args` (program name first), runs the command and returns the exit
/// code. Errors go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

pub fn execute(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Adapt(a) => cmd_adapt(a),
        Command::ToyA(a) => cmd_toy_a(a),
        Command::ToyB(a) => cmd_toy_b(a),
        Command::Cosine(a) => cmd_cosine(a),
        Command::Covariance(a) => cmd_covariance(a),
    }
}

fn elapsed_ms(start: Instant, enabled: bool) -> Option<f64> {
    enabled.then(|| start.elapsed().as_secs_f64() * 1e3)
}

pub fn cmd_adapt(args: &AdaptArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let source = load_spd(&args.source)?;
    let target = load_spd(&args.target)?;
    if source.dim != target.dim {
        return Err(CliError::input(format!(
            "{}: dim {} does not match {} (dim {})",
            args.source.display(),
            source.dim,
            args.target.display(),
            target.dim
        )));
    }
    let config = AdaptationConfig {
        metric: args.metric,
        solver: args.solver,
        lambda: args.lambda,
        eta: args.eta,
        mass: args.mass,
        kde_sigma: args.kde_sigma,
        top_k: args.top_k,
        seed: args.seed,
        ..AdaptationConfig::default()
    };
    let labels = match (args.solver, &source.labels) {
        (Solver::SinkhornLabels, None) => {
            return Err(CliError::input(format!(
                "{}: --solver sinkhorn-labels needs labels in the source file",
                args.source.display()
            )))
        }
        (Solver::SinkhornLabels, Some(l)) => Some(l),
        _ => None,
    };
    let result = adapt(&source.matrices, &target.matrices, labels, &config)
        .map_err(|e| CliError::from_library("adapt", e))?;

    let out = ensure_dir(&args.out)?;
    let adapted = SpdDataset {
        dim: source.dim,
        matrices: result.adapted_source.clone(),
        labels: source.labels.clone(),
    };
    write_json(&out.join("adapted.json"), &adapted.to_file())?;
    write_text(&out.join("plan.csv"), &matrix_csv(result.plan.matrix()))?;

    let mut report = RunReport::new("adapt", &[&args.source, &args.target])?;
    report.config = serde_json::to_value(&config).map_err(|e| CliError::input(e.to_string()))?;
    report.lambda_used = result.lambda_used;
    report.eta_used = result.eta_used;
    report.plan = Some(PlanStats::of(&result.plan, &result.cost));
    report.rows = result.diagnostics;
    report.elapsed_ms = elapsed_ms(start, args.timings);
    write_json(&out.join("report.json"), &report)
}

fn sweep_csv(rows: &[(f64, crate::experiments::MatchReport)]) -> String {
    let mut csv = String::from("theta,recovery_error,diagonal_mass,objective\n");
    for (theta, r) in rows {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            format_float(*theta),
            format_float(r.recovery_error),
            format_float(r.diagonal_mass),
            format_float(r.objective)
        ));
    }
    csv
}

pub fn cmd_toy_a(args: &ToyAArgs) -> Result<(), CliError> {
    let start = Instant::now();
    if args.grid == 0 {
        return Err(CliError::input("--grid must be positive"));
    }
    let grid = uniform_grid(0.0, PI, args.grid, true);
    let sweep = toy_a_sweep(args.n, &grid, args.seed).map_err(|e| CliError::from_library("toy-a", e))?;
    let out = ensure_dir(&args.out)?;
    write_text(&out.join("toy_a.csv"), &sweep_csv(&sweep))?;
    let mut report = RunReport::new("toy-a", &[])?;
    report.config = json!({ "n": args.n, "grid": args.grid, "seed": args.seed });
    report.elapsed_ms = elapsed_ms(start, args.timings);
    write_json(&out.join("report.json"), &report)
}

pub fn cmd_toy_b(args: &ToyBArgs) -> Result<(), CliError> {
    let start = Instant::now();
    if args.grid == 0 {
        return Err(CliError::input("--grid must be positive"));
    }
    if !args.theta_star.is_finite() {
        return Err(CliError::input("--theta-star must be finite"));
    }
    let grid = uniform_grid(0.0, 2.0 * PI, args.grid, false);
    let run = toy_b_run(args.n, args.theta_star, &grid, args.seed).map_err(|e| CliError::from_library("toy-b", e))?;
    let out = ensure_dir(&args.out)?;
    write_text(&out.join("toy_b.csv"), &sweep_csv(&run.reports))?;
    let mut report = RunReport::new("toy-b", &[])?;
    report.config = json!({ "n": args.n, "grid": args.grid, "theta_star": args.theta_star, "seed": args.seed });
    report.summary = json!({
        "best_theta": run.search.best_theta,
        "best_objective": run.search.curve[run.search.best_index].1,
        "best_diagonal_mass": run.search.best_plan().diagonal_mass(),
    });
    report.elapsed_ms = elapsed_ms(start, args.timings);
    write_json(&out.join("report.json"), &report)
}

pub fn cmd_cosine(args: &CosineArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let params = CosineParams {
        pairs: args.n,
        channels: args.channels,
        samples: args.samples,
        sample_period: args.sample_period,
        noise: !args.noiseless,
    };
    let (xs, zs) = cosine_trials(&params, args.seed).map_err(|e| CliError::from_library("cosine", e))?;
    let reports =
        three_config_comparison_with(&params, args.seed).map_err(|e| CliError::from_library("cosine", e))?;

    let out = ensure_dir(&args.out)?;
    let pair_labels = Some((0..args.n as i64).collect::<Vec<_>>());
    for (name, trials) in [("source.json", xs), ("target.json", zs)] {
        let ds = TimeSeriesDataset {
            trials,
            labels: pair_labels.clone(),
        };
        write_json(&out.join(name), &ds.to_file())?;
    }
    let mut csv = String::from("config,diagonal_mass,objective\n");
    for r in &reports {
        csv.push_str(&format!(
            "{},{},{}\n",
            r.config,
            format_float(r.report.diagonal_mass),
            format_float(r.report.objective)
        ));
    }
    write_text(&out.join("cosine.csv"), &csv)?;
    let mut report = RunReport::new("cosine", &[])?;
    report.config = serde_json::to_value(params).map_err(|e| CliError::input(e.to_string()))?;
    report.config["seed"] = json!(args.seed);
    report.summary = serde_json::to_value(&reports).map_err(|e| CliError::input(e.to_string()))?;
    report.elapsed_ms = elapsed_ms(start, args.timings);
    write_json(&out.join("report.json"), &report)
}

pub fn cmd_covariance(args: &CovarianceArgs) -> Result<(), CliError> {
    let data = load_timeseries(&args.input)?;
    let mut matrices = Vec::with_capacity(data.trials.len());
    for (i, trial) in data.trials.iter().enumerate() {
        let est = covariance(trial).map_err(|e| CliError::from_library(format_args!("trial {i}"), e))?;
        matrices.push(est.matrix);
    }
    let labels = data
        .labels
        .map(crate::transport::LabelSet::new)
        .transpose()
        .map_err(|e| CliError::from_library(args.input.display(), e))?;
    let ds = SpdDataset {
        dim: matrices[0].dim(),
        matrices,
        labels,
    };
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(parent)?;
    }
    write_json(&args.out, &ds.to_file())
}

/// Hex SHA-256 of a file's bytes.
pub fn file_digest(path: &Path) -> Result<String, CliError> {
    use sha2::{Digest, Sha256};
    let bytes = std::fs::read(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

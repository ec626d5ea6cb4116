//! `gmrf`: Krylov sampling, log-determinant estimation and LGCP inference for
//! Gaussian Markov random fields.

mod commands;
mod config;
mod operator;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::parser::ValueSource;
use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use gmrf_krylov::krylov::Reorthogonalization;
use gmrf_krylov::lgcp::TARGET_ACCEPTANCE;
use gmrf_krylov::operators::TorusPrior;

use config::{parse_list, parse_value, ConfigFile};
use operator::{parse_spec, OperatorSpec, PrecondKind};

#[derive(Parser, Debug)]
#[command(name = "gmrf", version, about = "Krylov methods for Gaussian Markov random fields")]
struct Cli {
    #[command(flatten)]
    global: Global,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Master seed; every random stream is derived from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,

    /// Sampler error-bound tolerance; relative tolerance of log-det quadrature.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,

    #[arg(long, global = true, default_value_t = 10_000)]
    pub maxit: usize,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// `key = value` file; its entries override command-line flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct PriorArgs {
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    #[arg(long, default_value_t = 10.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 2)]
    pub nu: u32,
}

impl PriorArgs {
    pub fn prior(&self) -> Result<TorusPrior> {
        Ok(TorusPrior::new(self.tau, self.kappa, self.nu)?)
    }
}

#[derive(Args, Debug, Clone)]
pub struct PrecondArgs {
    #[arg(long, value_enum, default_value_t = PrecondKind::None)]
    pub precond: PrecondKind,
    /// Spectral shift of the circulant preconditioner.
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    /// Drop threshold of the incomplete Cholesky preconditioner.
    #[arg(long, default_value_t = 1e-2)]
    pub drop_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Reorth {
    Full,
    None,
}

impl Reorth {
    pub fn mode(self) -> Reorthogonalization {
        match self {
            Reorth::Full => Reorthogonalization::Full,
            Reorth::None => Reorthogonalization::None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProposerKind {
    Rw,
    Mala,
    Smmala,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw samples from N(0, Q^-1) and write the convergence report.
    Sample(SampleArgs),
    /// Iteration counts with and without preconditioning.
    BenchPrecond(BenchArgs),
    /// Stochastic estimate of log det Q.
    Logdet(LogdetArgs),
    /// Run an MCMC chain for a log-Gaussian Cox process on the unit torus.
    LgcpMcmc(LgcpArgs),
    /// Simulate a log-Gaussian Cox process on the unit torus.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug, Clone)]
pub struct SampleArgs {
    #[arg(long, default_value = "torus:32")]
    pub operator: OperatorSpec,
    #[command(flatten)]
    pub prior: PriorArgs,
    #[command(flatten)]
    pub precond: PrecondArgs,
    #[arg(long, default_value_t = 1)]
    pub samples: usize,
    #[arg(long, value_enum, default_value_t = Reorth::Full)]
    pub reorth: Reorth,
}

#[derive(Args, Debug, Clone)]
pub struct BenchArgs {
    /// Torus side lengths for the preconditioned/unpreconditioned table.
    #[arg(long, value_delimiter = ',', default_value = "16,32,64,128")]
    pub grids: Vec<usize>,
    /// Log intensity offset of the smooth field that sets the likelihood curvature.
    #[arg(long, default_value_t = 1000f64.ln())]
    pub mu: f64,
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    #[command(flatten)]
    pub prior: PriorArgs,
    /// Run an incomplete Cholesky threshold sweep on `--operator` instead.
    #[arg(long, value_delimiter = ',')]
    pub drop_tols: Vec<f64>,
    #[arg(long, default_value = "rw2:30")]
    pub operator: OperatorSpec,
}

#[derive(Args, Debug, Clone)]
pub struct LogdetArgs {
    #[arg(long, default_value = "rw2:30")]
    pub operator: OperatorSpec,
    #[command(flatten)]
    pub prior: PriorArgs,
    #[command(flatten)]
    pub precond: PrecondArgs,
    /// Probe vectors (rounds over all colours when colouring).
    #[arg(long, default_value_t = 100)]
    pub probes: usize,
    /// Distance of the probing colouring; 0 gives plain Rademacher probes.
    #[arg(long, default_value_t = 0)]
    pub colour_power: usize,
}

#[derive(Args, Debug, Clone)]
pub struct LgcpArgs {
    /// Observed point pattern (`x,y` rows in [0,1)).
    #[arg(long, conflicts_with = "counts")]
    pub points: Option<PathBuf>,
    /// Observed counts as a square row-major grid.
    #[arg(long)]
    pub counts: Option<PathBuf>,
    /// Cells per side when binning `--points`.
    #[arg(long, default_value_t = 32)]
    pub grid: usize,
    /// Constant log intensity (default: log of the total count).
    #[arg(long)]
    pub mu: Option<f64>,
    #[command(flatten)]
    pub prior: PriorArgs,
    #[arg(long, value_enum, default_value_t = ProposerKind::Smmala)]
    pub proposer: ProposerKind,
    #[arg(long, default_value_t = 1000)]
    pub iters: usize,
    #[arg(long, default_value_t = 500)]
    pub warmup: usize,
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    #[arg(long, default_value_t = TARGET_ACCEPTANCE)]
    pub target_acceptance: f64,
    /// Write every `thin`-th post-warm-up state (0 writes none).
    #[arg(long, default_value_t = 0)]
    pub thin: usize,
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
}

#[derive(Args, Debug, Clone)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 32)]
    pub grid: usize,
    #[arg(long, default_value_t = 1000f64.ln())]
    pub mu: f64,
    #[command(flatten)]
    pub prior: PriorArgs,
}

/// Applies a configuration entry. `Ok(false)` means the key is not known here.
trait Configure {
    fn set(&mut self, key: &str, value: &str) -> Result<bool>;
}

impl Configure for Global {
    fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        match key {
            "seed" => self.seed = parse_value(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "tol" => self.tol = parse_value(key, value)?,
            "maxit" => self.maxit = parse_value(key, value)?,
            "threads" => self.threads = Some(parse_value(key, value)?),
            _ => return Ok(false),
        }
        Ok(true)
    }
}

impl Configure for PriorArgs {
    fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        match key {
            "tau" => self.tau = parse_value(key, value)?,
            "kappa" => self.kappa = parse_value(key, value)?,
            "nu" => self.nu = parse_value(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }
}

impl Configure for PrecondArgs {
    fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        match key {
            "precond" => self.precond = value.parse().map_err(anyhow::Error::msg)?,
            "alpha" => self.alpha = parse_value(key, value)?,
            "drop_tol" => self.drop_tol = parse_value(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }
}

fn value_enum<T: ValueEnum>(key: &str, value: &str) -> Result<T> {
    T::from_str(value, true).map_err(|e| anyhow::anyhow!("bad value for {key}: {e}"))
}

impl Configure for SampleArgs {
    fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        match key {
            "operator" => self.operator = parse_spec(key, value)?,
            "samples" => self.samples = parse_value(key, value)?,
            "reorth" => self.reorth = value_enum(key, value)?,
            _ => return Ok(self.prior.set(key, value)? || self.precond.set(key, value)?),
        }
        Ok(true)
    }
}

impl Configure for BenchArgs {
    fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        match key {
            "grids" => self.grids = parse_list(key, value)?,
            "mu" => self.mu = parse_value(key, value)?,
            "alpha" => self.alpha = parse_value(key, value)?,
            "drop_tols" => self.drop_tols = parse_list(key, value)?,
            "operator" => self.operator = parse_spec(key, value)?,
            _ => return self.prior.set(key, value),
        }
        Ok(true)
    }
}

impl Configure for LogdetArgs {
    fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        match key {
            "operator" => self.operator = parse_spec(key, value)?,
            "probes" => self.probes = parse_value(key, value)?,
            "colour_power" => self.colour_power = parse_value(key, value)?,
            _ => return Ok(self.prior.set(key, value)? || self.precond.set(key, value)?),
        }
        Ok(true)
    }
}

impl Configure for LgcpArgs {
    fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        match key {
            "points" => self.points = Some(PathBuf::from(value)),
            "counts" => self.counts = Some(PathBuf::from(value)),
            "grid" => self.grid = parse_value(key, value)?,
            "mu" => self.mu = Some(parse_value(key, value)?),
            "proposer" => self.proposer = value_enum(key, value)?,
            "iters" => self.iters = parse_value(key, value)?,
            "warmup" => self.warmup = parse_value(key, value)?,
            "delta" => self.delta = parse_value(key, value)?,
            "target_acceptance" => self.target_acceptance = parse_value(key, value)?,
            "thin" => self.thin = parse_value(key, value)?,
            "alpha" => self.alpha = parse_value(key, value)?,
            _ => return self.prior.set(key, value),
        }
        Ok(true)
    }
}

impl Configure for SimulateArgs {
    fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        match key {
            "grid" => self.grid = parse_value(key, value)?,
            "mu" => self.mu = parse_value(key, value)?,
            _ => return self.prior.set(key, value),
        }
        Ok(true)
    }
}

fn given_on_command_line(matches: &[&ArgMatches], key: &str) -> bool {
    matches.iter().any(|m| {
        m.try_get_raw(key).is_ok_and(|v| v.is_some())
            && m.value_source(key) == Some(ValueSource::CommandLine)
    })
}

fn apply_config(
    file: &ConfigFile,
    global: &mut Global,
    command: &mut dyn Configure,
    matches: &[&ArgMatches],
) -> Result<()> {
    for (key, line, value) in file.iter() {
        if key == "config" {
            bail!("line {line}: a config file cannot name another config file");
        }
        let known = global.set(key, value)? || command.set(key, value)?;
        if !known {
            bail!("line {line}: unknown key {key:?} for this subcommand");
        }
        if given_on_command_line(matches, key) {
            eprintln!("warning: config entry {key} = {value} overrides the command-line flag");
        }
    }
    Ok(())
}

fn run() -> Result<()> {
    let matches = Cli::command().get_matches();
    let mut cli = Cli::from_arg_matches(&matches)?;
    let sub = matches.subcommand().map(|(_, m)| m);
    let all: Vec<&ArgMatches> = std::iter::once(&matches).chain(sub).collect();

    if let Some(path) = cli.global.config.clone() {
        let file = ConfigFile::load(&path)?;
        let command: &mut dyn Configure = match &mut cli.command {
            Command::Sample(a) => a,
            Command::BenchPrecond(a) => a,
            Command::Logdet(a) => a,
            Command::LgcpMcmc(a) => a,
            Command::Simulate(a) => a,
        };
        apply_config(&file, &mut cli.global, command, &all)
            .with_context(|| format!("in config {}", path.display()))?;
    }

    if let Some(threads) = cli.global.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the worker pool")?;
    }
    std::fs::create_dir_all(&cli.global.out_dir)
        .with_context(|| format!("creating {}", cli.global.out_dir.display()))?;

    let g = &cli.global;
    match &cli.command {
        Command::Sample(a) => commands::sample(g, a),
        Command::BenchPrecond(a) => commands::bench_precond(g, a),
        Command::Logdet(a) => commands::logdet(g, a),
        Command::LgcpMcmc(a) => commands::lgcp_mcmc(g, a),
        Command::Simulate(a) => commands::simulate(g, a),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

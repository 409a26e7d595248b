//! Command-line front end for the `distexp` simulator: `run`, `figure` and
//! `sweep` subcommands writing versioned CSV files.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub mod config;
pub mod figures;
pub mod output;

use config::{resolve, RawConfig, Resolved};
use figures::{FigureName, FigureSettings};
use output::{run_row, Table, RUN_HEADER};

/// Failure of a command, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or arguments (exit code 2).
    Config(String),
    /// Anything that went wrong after validation (exit code 1).
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<distexp::Error> for CliError {
    fn from(e: distexp::Error) -> Self {
        match e {
            distexp::Error::InvalidArgument(_) | distexp::Error::UnsupportedArity { .. } | distexp::Error::Config(_) => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "distexp", version, about = "Distributed non-stochastic experts simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one algorithm against one adversary over a batch of seeds.
    Run(Common),
    /// Reproduce one of the experiment figures.
    Figure {
        #[arg(value_enum)]
        name: FigureName,
        #[command(flatten)]
        common: Common,
    },
    /// Repeat a run over a list of values of one parameter.
    Sweep {
        /// One of T, k, epsilon, mu, lambda, budget, beta, p_sync.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Flat key=value configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seeds: Option<String>,
    #[arg(long = "seed-base")]
    pub seed_base: Option<String>,
    /// Worker threads (falls back to DISTEXP_THREADS).
    #[arg(long)]
    pub threads: Option<String>,
    #[arg(long)]
    pub algorithm: Option<String>,
    #[arg(long)]
    pub adversary: Option<String>,
    #[arg(long = "T")]
    pub horizon: Option<String>,
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub epsilon: Option<String>,
    #[arg(long)]
    pub mu: Option<String>,
    #[arg(long)]
    pub lambda: Option<String>,
    #[arg(long)]
    pub budget: Option<String>,
    #[arg(long)]
    pub beta: Option<String>,
    #[arg(long = "p-sync")]
    pub p_sync: Option<String>,
    #[arg(long)]
    pub jitter: Option<String>,
    /// Any other field as key=value; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

impl Common {
    /// The config file, if any, with command-line overrides applied.
    pub fn raw(&self) -> Result<RawConfig, CliError> {
        let mut raw = match &self.config {
            Some(p) => RawConfig::load(p)?,
            None => RawConfig::default(),
        };
        let flags = [
            ("seeds", &self.seeds),
            ("seed_base", &self.seed_base),
            ("threads", &self.threads),
            ("algorithm", &self.algorithm),
            ("adversary", &self.adversary),
            ("T", &self.horizon),
            ("k", &self.k),
            ("n", &self.n),
            ("epsilon", &self.epsilon),
            ("mu", &self.mu),
            ("lambda", &self.lambda),
            ("budget", &self.budget),
            ("beta", &self.beta),
            ("p_sync", &self.p_sync),
            ("jitter", &self.jitter),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                raw.set(key, v)?;
            }
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
            raw.set(k.trim(), v.trim())?;
        }
        if let Some(out) = &self.out {
            raw.set("out", &out.to_string_lossy())?;
        }
        Ok(raw)
    }
}

/// Maps a sweep parameter name to its configuration key.
pub fn sweep_key(param: &str) -> Option<&'static str> {
    Some(match param {
        "T" => "T",
        "k" => "k",
        "epsilon" | "eps" | "ε" => "epsilon",
        "mu" | "μ" => "mu",
        "lambda" | "λ" => "lambda",
        "budget" | "C" => "budget",
        "beta" | "β" => "beta",
        "p_sync" | "p-sync" => "p_sync",
        _ => return None,
    })
}

/// A swept configuration key and its validated grid points.
#[derive(Debug, Clone)]
pub struct Sweep {
    pub key: &'static str,
    pub points: Vec<(String, Resolved)>,
}

/// Every grid point of a sweep, validated before anything runs.
pub fn sweep_points(base: &RawConfig, param: &str, values: &str) -> Result<Sweep, CliError> {
    let key = sweep_key(param).ok_or_else(|| {
        CliError::Config(format!("unknown sweep parameter `{param}` (expected T, k, epsilon, mu, lambda, budget, beta, p_sync)"))
    })?;
    let values: Vec<&str> = values.split(',').map(str::trim).filter(|v| !v.is_empty()).collect();
    if values.is_empty() {
        return Err(CliError::Config(format!("sweep over `{key}` has no values")));
    }
    let points = values
        .into_iter()
        .map(|v| {
            let mut raw = base.clone();
            raw.set(key, v)?;
            let r = resolve(&raw).map_err(|e| match e {
                CliError::Config(m) => CliError::Config(format!("{key}={v}: {m}")),
                other => other,
            })?;
            Ok((v.to_string(), r))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(Sweep { key, points })
}

fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var("DISTEXP_THREADS") {
        Ok(v) if !v.trim().is_empty() => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config(format!("DISTEXP_THREADS must be a positive integer, got `{v}`"))),
        },
        _ => Ok(None),
    }
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let threads = match threads {
        Some(t) => Some(t),
        None => threads_from_env()?,
    };
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Runtime(format!("cannot start {n} threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn out_path(raw: &RawConfig, default: &str) -> PathBuf {
    raw.get("out").map(PathBuf::from).unwrap_or_else(|| PathBuf::from(default))
}

fn print_summary(label: &str, s: &distexp::BatchSummary) {
    println!(
        "{label}: regret {:.3} ± {:.3}, messages {:.1} ± {:.1} over {} seeds",
        s.mean_regret,
        s.std_regret,
        s.mean_messages,
        s.std_messages,
        s.rows.len()
    );
    for w in &s.warnings {
        eprintln!("warning: {w}");
    }
}

fn describe(r: &Resolved) -> String {
    let cfg = &r.experiment;
    format!("{} on {}", cfg.algorithm, cfg.adversary)
}

/// Runs one batch and returns its CSV.
pub fn run_table(r: &Resolved) -> Result<(Table, distexp::BatchSummary), CliError> {
    let summary = with_threads(r.threads, || distexp::run_batch::<f64>(&r.experiment))??;
    let mut t = Table::new(RUN_HEADER);
    for (k, v) in &r.effective {
        t.comment(k, v);
    }
    t.rows = summary.rows.iter().map(|row| run_row(&r.experiment, row)).collect();
    Ok((t, summary))
}

pub fn cmd_run(common: &Common) -> Result<PathBuf, CliError> {
    let raw = common.raw()?;
    let r = resolve(&raw)?;
    let (table, summary) = run_table(&r)?;
    let out = out_path(&raw, "run.csv");
    table.save(&out)?;
    print_summary(&describe(&r), &summary);
    Ok(out)
}

pub fn sweep_table(sweep: &Sweep) -> Result<(Table, Vec<distexp::BatchSummary>), CliError> {
    let Sweep { key, points } = sweep;
    let key = *key;
    let mut header = vec!["sweep_param", "sweep_value"];
    header.extend_from_slice(RUN_HEADER);
    let mut t = Table::new(&header);
    t.comment("sweep_param", key);
    t.comment("sweep_values", points.iter().map(|(v, _)| v.as_str()).collect::<Vec<_>>().join(","));
    // the swept key varies; echo the rest from the first point
    for (k, v) in &points[0].1.effective {
        if k != key {
            t.comment(k, v);
        }
    }
    let mut summaries = Vec::new();
    for (value, r) in points {
        let summary = with_threads(r.threads, || distexp::run_batch::<f64>(&r.experiment))??;
        for row in &summary.rows {
            let mut fields = vec![key.to_string(), value.clone()];
            fields.extend(run_row(&r.experiment, row));
            t.rows.push(fields);
        }
        summaries.push(summary);
    }
    Ok((t, summaries))
}

pub fn cmd_sweep(param: &str, values: &str, common: &Common) -> Result<PathBuf, CliError> {
    let raw = common.raw()?;
    let sweep = sweep_points(&raw, param, values)?;
    let (table, summaries) = sweep_table(&sweep)?;
    let Sweep { key, points } = sweep;
    let out = out_path(&raw, "sweep.csv");
    table.save(&out)?;
    for ((value, r), s) in points.iter().zip(&summaries) {
        print_summary(&format!("{key}={value}: {}", describe(r)), s);
    }
    Ok(out)
}

pub fn cmd_figure(name: FigureName, common: &Common) -> Result<PathBuf, CliError> {
    let raw = common.raw()?;
    let settings = FigureSettings::from_raw(name, &raw)?;
    let threads = config::threads(&raw)?;
    let out = out_path(&raw, &format!("{}.csv", name.as_str()));
    let table = match name {
        FigureName::FigA => {
            let points = with_threads(threads, || figures::fig_a(&settings))??;
            for p in &points {
                print_summary(&format!("{} lambda={}", p.algorithm, p.lambda), &p.summary);
            }
            figures::fig_a_table(&settings, &points)
        }
        FigureName::FigB => {
            let rows = with_threads(threads, || figures::fig_b(&settings))??;
            for s in &rows {
                for wc in [&s.dfpl, &s.minibatch.worst, &s.counter.worst] {
                    println!(
                        "epsilon={} {}: worst regret {:.3}, worst messages {:.1}",
                        s.epsilon, wc.algorithm, wc.worst_regret, wc.worst_messages
                    );
                }
            }
            figures::fig_b_table(&settings, &rows)
        }
    };
    table.save(&out)?;
    Ok(out)
}

/// Dispatches a parsed command line; returns the written CSV path.
pub fn execute(cli: &Cli) -> Result<PathBuf, CliError> {
    match &cli.command {
        Command::Run(common) => cmd_run(common),
        Command::Figure { name, common } => cmd_figure(*name, common),
        Command::Sweep { param, values, common } => cmd_sweep(param, values, common),
    }
}

pub fn read_table(path: &Path) -> Result<Table, CliError> {
    output::parse(&std::fs::read_to_string(path)?)
}

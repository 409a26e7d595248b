use rayon::prelude::*;

use crate::adversaries::AdversarySpec;
use crate::error::{invalid, Error, Result};
use crate::protocol::ModelKind;
use crate::scalar::Scalar;

use super::algorithm::AlgorithmSpec;
use super::run::{run_once, JitterConfig, RunOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub algorithm: AlgorithmSpec,
    pub adversary: AdversarySpec,
    pub model: Option<ModelKind>,
    pub horizon: usize,
    pub sites: usize,
    pub experts: usize,
    pub seeds: Vec<u64>,
    pub jitter: JitterConfig,
}

impl ExperimentConfig {
    /// Seeds `0..count`, two experts, no jitter.
    pub fn new(algorithm: AlgorithmSpec, adversary: AdversarySpec, horizon: usize, sites: usize, count: u64) -> Self {
        Self {
            algorithm,
            adversary,
            model: None,
            horizon,
            sites,
            experts: 2,
            seeds: (0..count).collect(),
            jitter: JitterConfig::default(),
        }
    }

    pub fn with_seeds(mut self, seeds: impl IntoIterator<Item = u64>) -> Self {
        self.seeds = seeds.into_iter().collect();
        self
    }

    pub fn options(&self) -> RunOptions {
        RunOptions {
            horizon: self.horizon,
            sites: self.sites,
            experts: self.experts,
            model: self.model,
            jitter: self.jitter,
            record_trace: false,
        }
    }
}

/// One run's outcome, as exported per CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedRow {
    pub seed: u64,
    pub regret: f64,
    pub messages: u64,
    pub reals_sent: u64,
    pub algorithm_payoff: f64,
    pub best_expert_payoff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchSummary {
    pub rows: Vec<SeedRow>,
    pub mean_regret: f64,
    pub std_regret: f64,
    pub mean_messages: f64,
    pub std_messages: f64,
    pub mean_payoff: f64,
    pub warnings: Vec<String>,
}

fn mean_std(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.clone().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

impl BatchSummary {
    /// Aggregates rows in the given order (sample standard deviation).
    pub fn from_rows(rows: Vec<SeedRow>, warnings: Vec<String>) -> Self {
        let (mean_regret, std_regret) = mean_std(rows.iter().map(|r| r.regret));
        let (mean_messages, std_messages) = mean_std(rows.iter().map(|r| r.messages as f64));
        let (mean_payoff, _) = mean_std(rows.iter().map(|r| r.algorithm_payoff));
        Self { rows, mean_regret, std_regret, mean_messages, std_messages, mean_payoff, warnings }
    }
}

/// Runs every seed independently (in parallel) and aggregates in seed order.
/// The first failing seed, in that order, aborts the batch.
pub fn run_batch<S: Scalar>(config: &ExperimentConfig) -> Result<BatchSummary> {
    if config.seeds.is_empty() {
        return Err(Error::Config("at least one seed is required".into()));
    }
    let options = config.options();
    let outcomes: Vec<Result<(SeedRow, Vec<String>)>> = config
        .seeds
        .par_iter()
        .map(|&seed| {
            let trace = run_once::<S>(&config.algorithm, &config.adversary, &options, seed)
                .map_err(|e| Error::Run { seed, source: Box::new(e) })?;
            let r = &trace.result;
            let row = SeedRow {
                seed,
                regret: r.regret.as_f64(),
                messages: r.ledger.messages,
                reals_sent: r.ledger.reals_sent,
                algorithm_payoff: r.algorithm_payoff.as_f64(),
                best_expert_payoff: r.best_expert_payoff.as_f64(),
            };
            Ok((row, trace.warnings))
        })
        .collect();
    let mut rows = Vec::with_capacity(outcomes.len());
    let mut warnings: Vec<String> = Vec::new();
    for outcome in outcomes {
        let (row, w) = outcome?;
        for w in w {
            if !warnings.contains(&w) {
                warnings.push(w);
            }
        }
        rows.push(row);
    }
    Ok(BatchSummary::from_rows(rows, warnings))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub adversary: AdversarySpec,
    pub summary: BatchSummary,
}

/// Worst case over an adversary grid: the largest mean regret and the
/// largest mean message count (possibly at different grid points).
#[derive(Debug, Clone, PartialEq)]
pub struct WorstCase {
    pub algorithm: AlgorithmSpec,
    pub worst_regret: f64,
    pub worst_messages: f64,
    pub points: Vec<SweepPoint>,
}

pub fn worst_case_sweep<S: Scalar>(
    algorithms: &[AlgorithmSpec],
    grid: &[AdversarySpec],
    base: &ExperimentConfig,
) -> Result<Vec<WorstCase>> {
    if grid.is_empty() {
        return invalid("the adversary grid is empty");
    }
    algorithms
        .iter()
        .map(|algorithm| {
            let mut points = Vec::with_capacity(grid.len());
            for adversary in grid {
                let config = ExperimentConfig { algorithm: algorithm.clone(), adversary: adversary.clone(), ..base.clone() };
                points.push(SweepPoint { adversary: adversary.clone(), summary: run_batch::<S>(&config)? });
            }
            let worst_regret = points.iter().map(|p| p.summary.mean_regret).fold(f64::NEG_INFINITY, f64::max);
            let worst_messages = points.iter().map(|p| p.summary.mean_messages).fold(f64::NEG_INFINITY, f64::max);
            Ok(WorstCase { algorithm: algorithm.clone(), worst_regret, worst_messages, points })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub worst: WorstCase,
    /// Evaluations spent searching.
    pub evaluations: usize,
}

impl Calibration {
    pub fn relative_error(&self, target: f64) -> f64 {
        (self.worst.worst_messages - target).abs() / target
    }
}

/// Tunes the communication knob of a mini-batch or counter baseline so its
/// worst-case message count over `grid` approaches `target`. Messages scale
/// like `p_sync` and like `1/beta`, so the knob is rescaled by the measured
/// ratio until it lands within `tolerance` (relative) or `max_evaluations`
/// runs out; the closest setting is returned.
pub fn calibrate_knob<S: Scalar>(
    algorithm: &AlgorithmSpec,
    grid: &[AdversarySpec],
    base: &ExperimentConfig,
    target: f64,
    tolerance: f64,
    max_evaluations: usize,
) -> Result<Calibration> {
    if !(target > 0.0) {
        return invalid(format!("target message count must be positive, got {target}"));
    }
    let (mut knob, exponent, make): (f64, f64, fn(f64) -> AlgorithmSpec) = match algorithm {
        AlgorithmSpec::MiniBatch { .. } => {
            let p = target / (2.0 * base.sites as f64 * base.horizon as f64);
            (p.min(1.0), 1.0, |p| AlgorithmSpec::MiniBatch { p_sync: p.min(1.0) })
        }
        AlgorithmSpec::Counter { .. } => {
            // one flush (k + 1 messages) per `beta / k` units of payoff at a site
            let k = base.sites as f64;
            let beta = k * (k + 1.0) * base.horizon as f64 / target;
            (beta, -1.0, |b| AlgorithmSpec::Counter { beta: b })
        }
        other => return invalid(format!("{} has no communication knob to calibrate", other.name())),
    };
    let mut best: Option<WorstCase> = None;
    let mut evaluations = 0;
    while evaluations < max_evaluations.max(1) {
        let wc = worst_case_sweep::<S>(&[make(knob)], grid, base)?.remove(0);
        evaluations += 1;
        let err = |w: &WorstCase| (w.worst_messages - target).abs() / target;
        let done = err(&wc) <= tolerance;
        if best.as_ref().is_none_or(|b| err(&wc) < err(b)) {
            best = Some(wc.clone());
        }
        if done || wc.worst_messages <= 0.0 {
            break;
        }
        knob *= (target / wc.worst_messages).powf(exponent);
    }
    Ok(Calibration { worst: best.expect("at least one evaluation"), evaluations })
}

//! The two experiment recipes: regret against correlation on Markov-chain
//! payoffs, and worst-case regret against communication.

use distexp::simulator::{calibrate_knob, BatchSummary, Calibration, WorstCase};
use distexp::{run_batch, worst_case_sweep, AdversarySpec, AlgorithmSpec, ExperimentConfig, JitterConfig};

use crate::config::{dfpl_expected_messages, parse_jitter, RawConfig};
use crate::output::Table;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FigureName {
    #[value(name = "fig_a")]
    FigA,
    #[value(name = "fig_b")]
    FigB,
}

impl FigureName {
    pub fn as_str(self) -> &'static str {
        match self {
            FigureName::FigA => "fig_a",
            FigureName::FigB => "fig_b",
        }
    }
}

const FIGURE_KEYS: &[&str] = &["T", "k", "seeds", "seed_base", "jitter", "epsilon", "mu", "lambda", "out", "threads"];

#[derive(Debug, Clone, PartialEq)]
pub struct FigureSettings {
    pub horizon: usize,
    pub sites: usize,
    pub seeds: u64,
    pub seed_base: u64,
    pub jitter: JitterConfig,
    pub epsilons: Vec<f64>,
    /// Zig-zag half-periods (fig_b only).
    pub mus: Vec<usize>,
    /// Markov-chain correlations.
    pub lambdas: Vec<f64>,
    /// Relative tolerance and evaluation budget when matching message counts.
    pub tolerance: f64,
    pub max_evaluations: usize,
}

impl FigureSettings {
    pub fn defaults(name: FigureName) -> Self {
        let (epsilons, lambdas) = match name {
            FigureName::FigA => (vec![0.1], vec![2.0, 5.0, 10.0, 20.0, 50.0, 100.0]),
            FigureName::FigB => (vec![0.05, 0.1, 0.15], vec![5.0, 20.0, 80.0]),
        };
        Self {
            horizon: 20_000,
            sites: 20,
            seeds: 100,
            seed_base: 0,
            jitter: JitterConfig::default(),
            epsilons,
            mus: vec![10, 50, 250, 1250],
            lambdas,
            tolerance: 0.05,
            max_evaluations: 6,
        }
    }

    pub fn from_raw(name: FigureName, raw: &RawConfig) -> Result<Self, CliError> {
        for key in crate::config::KEYS {
            if raw.contains(key) && !FIGURE_KEYS.contains(key) {
                return Err(CliError::Config(format!("field `{key}` is not used by {}", name.as_str())));
            }
        }
        let mut s = Self::defaults(name);
        s.horizon = raw.parsed_or("T", s.horizon)?;
        s.sites = raw.parsed_or("k", s.sites)?;
        s.seeds = raw.parsed_or("seeds", s.seeds)?;
        s.seed_base = raw.parsed_or("seed_base", s.seed_base)?;
        if let Some(j) = raw.get("jitter") {
            s.jitter = parse_jitter(j).map_err(|m| CliError::Config(format!("field `jitter`: {m}")))?;
        }
        s.epsilons = raw.list("epsilon")?.unwrap_or(s.epsilons);
        s.mus = raw.list("mu")?.unwrap_or(s.mus);
        s.lambdas = raw.list("lambda")?.unwrap_or(s.lambdas);
        if name == FigureName::FigA && s.epsilons.len() != 1 {
            return Err(CliError::Config("field `epsilon`: fig_a takes a single value".into()));
        }
        if s.horizon == 0 || s.sites == 0 || s.seeds == 0 {
            return Err(CliError::Config("T, k and seeds must be positive".into()));
        }
        validate_settings(&s)?;
        Ok(s)
    }

    fn base(&self, algorithm: AlgorithmSpec, adversary: AdversarySpec) -> ExperimentConfig {
        ExperimentConfig {
            jitter: self.jitter,
            ..ExperimentConfig::new(algorithm, adversary, self.horizon, self.sites, self.seeds)
                .with_seeds(self.seed_base..self.seed_base + self.seeds)
        }
    }

    fn grid_b(&self) -> Vec<AdversarySpec> {
        let mut g: Vec<AdversarySpec> = self.mus.iter().map(|m| AdversarySpec::zigzag(*m)).collect();
        g.extend(self.lambdas.iter().map(|l| AdversarySpec::markov(*l)));
        g
    }

    fn comments(&self, name: FigureName, t: &mut Table) {
        t.comment("figure", name.as_str());
        t.comment("T", self.horizon);
        t.comment("k", self.sites);
        t.comment("n", 2);
        t.comment("seeds", self.seeds);
        t.comment("seed_base", self.seed_base);
        t.comment("jitter", if self.jitter.enabled { self.jitter.relative_slack.to_string() } else { "off".into() });
        t.comment("epsilon", join(&self.epsilons));
        if name == FigureName::FigB {
            t.comment("mu", join(&self.mus));
        }
        t.comment("lambda", join(&self.lambdas));
    }
}

fn validate_settings(s: &FigureSettings) -> Result<(), CliError> {
    for eps in &s.epsilons {
        dfpl_expected_messages(s.horizon, s.sites, *eps)?;
    }
    let mut grid = s.grid_b();
    grid.push(AdversarySpec::markov(1.0));
    for adversary in grid {
        crate::config::validate(&s.base(AlgorithmSpec::Full, adversary))?;
    }
    Ok(())
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn algo_params(a: &AlgorithmSpec) -> String {
    a.params().into_iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
}

/// The five algorithms of the correlation figure. The mini-batch and counter
/// knobs are set so their expected message counts match DFPL's.
pub fn fig_a_algorithms(s: &FigureSettings) -> Result<Vec<AlgorithmSpec>, CliError> {
    let eps = s.epsilons[0];
    let m = dfpl_expected_messages(s.horizon, s.sites, eps)?;
    let (k, t) = (s.sites as f64, s.horizon as f64);
    Ok(vec![
        AlgorithmSpec::Full,
        AlgorithmSpec::None,
        AlgorithmSpec::MiniBatch { p_sync: (m / (2.0 * k * t)).min(1.0) },
        AlgorithmSpec::Counter { beta: k * (k + 1.0) * t / m },
        AlgorithmSpec::dfpl(eps),
    ])
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigAPoint {
    pub algorithm: AlgorithmSpec,
    pub lambda: f64,
    pub summary: BatchSummary,
}

pub fn fig_a(s: &FigureSettings) -> Result<Vec<FigAPoint>, CliError> {
    let mut points = Vec::new();
    for algorithm in fig_a_algorithms(s)? {
        for &lambda in &s.lambdas {
            let cfg = s.base(algorithm.clone(), AdversarySpec::markov(lambda));
            let summary = run_batch::<f64>(&cfg)?;
            points.push(FigAPoint { algorithm: algorithm.clone(), lambda, summary });
        }
    }
    Ok(points)
}

pub fn fig_a_table(s: &FigureSettings, points: &[FigAPoint]) -> Table {
    let mut t = Table::new(&[
        "algo", "adversary", "params", "lambda", "T", "k", "n", "seeds", "mean_regret", "std_regret", "mean_messages",
        "std_messages",
    ]);
    s.comments(FigureName::FigA, &mut t);
    for p in points {
        t.rows.push(vec![
            p.algorithm.name().into(),
            "markov".into(),
            algo_params(&p.algorithm),
            p.lambda.to_string(),
            s.horizon.to_string(),
            s.sites.to_string(),
            "2".into(),
            s.seeds.to_string(),
            p.summary.mean_regret.to_string(),
            p.summary.std_regret.to_string(),
            p.summary.mean_messages.to_string(),
            p.summary.std_messages.to_string(),
        ]);
    }
    t
}

/// One communication setting: DFPL at one `epsilon` and the two baselines
/// calibrated to its worst-case message count.
#[derive(Debug, Clone, PartialEq)]
pub struct FigBSetting {
    pub epsilon: f64,
    pub dfpl: WorstCase,
    pub minibatch: Calibration,
    pub counter: Calibration,
}

pub fn fig_b(s: &FigureSettings) -> Result<Vec<FigBSetting>, CliError> {
    let grid = s.grid_b();
    let base = s.base(AlgorithmSpec::Full, grid[0].clone());
    s.epsilons
        .iter()
        .map(|&epsilon| {
            let dfpl = worst_case_sweep::<f64>(&[AlgorithmSpec::dfpl(epsilon)], &grid, &base)?.remove(0);
            let target = dfpl.worst_messages;
            let calibrate = |a: AlgorithmSpec| {
                calibrate_knob::<f64>(&a, &grid, &base, target, s.tolerance, s.max_evaluations)
            };
            let minibatch = calibrate(AlgorithmSpec::MiniBatch { p_sync: 0.0 })?;
            let counter = calibrate(AlgorithmSpec::Counter { beta: 1.0 })?;
            Ok(FigBSetting { epsilon, dfpl, minibatch, counter })
        })
        .collect()
}

pub fn fig_b_table(s: &FigureSettings, settings: &[FigBSetting]) -> Table {
    let mut t = Table::new(&[
        "algo", "params", "setting", "T", "k", "n", "seeds", "worst_regret", "worst_messages", "target_messages",
        "evaluations",
    ]);
    s.comments(FigureName::FigB, &mut t);
    for st in settings {
        let target = st.dfpl.worst_messages;
        let entries = [(&st.dfpl, 1), (&st.minibatch.worst, st.minibatch.evaluations), (&st.counter.worst, st.counter.evaluations)];
        for (wc, evals) in entries {
            t.rows.push(vec![
                wc.algorithm.name().into(),
                algo_params(&wc.algorithm),
                format!("epsilon={}", st.epsilon),
                s.horizon.to_string(),
                s.sites.to_string(),
                "2".into(),
                s.seeds.to_string(),
                wc.worst_regret.to_string(),
                wc.worst_messages.to_string(),
                target.to_string(),
                evals.to_string(),
            ]);
        }
    }
    t
}

//! Flat `key=value` experiment configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use distexp::baselines::LefForecaster;
use distexp::dfpl::DfplParams;
use distexp::{AdversaryKind, AdversarySpec, AlgorithmSpec, ExperimentConfig, JitterConfig, ModelKind, SiteAllocation};

use crate::CliError;

pub const KEYS: &[&str] = &[
    "algorithm",
    "adversary",
    "model",
    "T",
    "k",
    "n",
    "seeds",
    "seed_base",
    "jitter",
    "epsilon",
    "block_len",
    "q",
    "p_sync",
    "beta",
    "budget",
    "forecaster",
    "mu",
    "lambda",
    "block",
    "index",
    "gap",
    "values",
    "allocation",
    "out",
    "threads",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Flag,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Flag => f.write_str("command line"),
        }
    }
}

/// Unvalidated settings, remembering where each came from.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, Origin)>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut raw = RawConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let n = i + 1;
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Config(format!("line {n}: expected key=value, got `{line}`")));
            };
            let key = key.trim();
            if raw.entries.contains_key(key) {
                return Err(CliError::Config(format!("line {n}: `{key}` is set twice")));
            }
            raw.insert(key, value.trim(), Origin::Line(n))?;
        }
        Ok(raw)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    fn insert(&mut self, key: &str, value: &str, origin: Origin) -> Result<(), CliError> {
        if !KEYS.contains(&key) {
            return Err(CliError::Config(format!("{origin}: unknown key `{key}`")));
        }
        self.entries.insert(key.to_string(), (value.to_string(), origin));
        Ok(())
    }

    /// Sets or replaces a value from the command line.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        self.insert(key, value, Origin::Flag)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn field_error(&self, key: &str, msg: impl fmt::Display) -> CliError {
        match self.entries.get(key) {
            Some((_, origin)) => CliError::Config(format!("{origin}: field `{key}`: {msg}")),
            None => CliError::Config(format!("field `{key}`: {msg}")),
        }
    }

    /// Parses `key` if present.
    pub fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|e| self.field_error(key, format!("cannot parse `{v}`: {e}"))),
        }
    }

    pub fn parsed_or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: fmt::Display,
    {
        Ok(self.parsed(key)?.unwrap_or(default))
    }

    /// Comma-separated list, e.g. a figure grid.
    pub fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, CliError>
    where
        T::Err: fmt::Display,
    {
        let Some(v) = self.get(key) else { return Ok(None) };
        let items: Result<Vec<T>, _> = v
            .split([',', ':'])
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<T>().map_err(|e| self.field_error(key, format!("cannot parse `{s}`: {e}"))))
            .collect();
        let items = items?;
        if items.is_empty() {
            return Err(self.field_error(key, "empty list"));
        }
        Ok(Some(items))
    }

    fn require(&self, key: &str) -> Result<&str, CliError> {
        self.get(key).ok_or_else(|| CliError::Config(format!("missing required field `{key}`")))
    }
}

pub fn parse_jitter(value: &str) -> Result<JitterConfig, String> {
    match value {
        "off" | "false" | "no" | "0" => Ok(JitterConfig::default()),
        "on" | "true" | "yes" => Ok(JitterConfig { enabled: true, ..JitterConfig::default() }),
        s => match s.parse::<f64>() {
            Ok(x) if (0.0..1.0).contains(&x) && x > 0.0 => Ok(JitterConfig::with_slack(x)),
            _ => Err(format!("expected off, on or a slack in (0,1), got `{s}`")),
        },
    }
}

fn jitter_string(j: &JitterConfig) -> String {
    if j.enabled {
        j.relative_slack.to_string()
    } else {
        "off".into()
    }
}

/// A validated experiment plus the settings that reproduce it.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub experiment: ExperimentConfig,
    pub effective: Vec<(String, String)>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

pub fn resolve(raw: &RawConfig) -> Result<Resolved, CliError> {
    let horizon: usize = raw.parsed_or("T", 20_000)?;
    let sites: usize = raw.parsed_or("k", 20)?;
    let experts: usize = raw.parsed_or("n", 2)?;
    let count: u64 = raw.parsed_or("seeds", 100)?;
    let seed_base: u64 = raw.parsed_or("seed_base", 0)?;
    if horizon == 0 {
        return Err(raw.field_error("T", "must be positive"));
    }
    if sites == 0 {
        return Err(raw.field_error("k", "must be positive"));
    }
    if experts < 2 {
        return Err(raw.field_error("n", "need at least 2 experts"));
    }
    if count == 0 {
        return Err(raw.field_error("seeds", "need at least one seed"));
    }
    let jitter = match raw.get("jitter") {
        None => JitterConfig::default(),
        Some(v) => parse_jitter(v).map_err(|m| raw.field_error("jitter", m))?,
    };
    let mut effective: Vec<(String, String)> = Vec::new();

    let algo_name = raw.require("algorithm")?;
    let algorithm = match algo_name {
        "full" | "full_comm" => AlgorithmSpec::Full,
        "none" | "no_comm" => AlgorithmSpec::None,
        "minibatch" | "mini-batch" => AlgorithmSpec::MiniBatch { p_sync: raw.parsed_or("p_sync", 0.01)? },
        "counter" | "hyz" => AlgorithmSpec::Counter { beta: raw.parsed_or("beta", sites as f64)? },
        "counter_snapshot" => AlgorithmSpec::SnapshotCounter { beta: raw.parsed_or("beta", sites as f64)? },
        "dfpl" => AlgorithmSpec::Dfpl {
            epsilon: raw.parsed_or("epsilon", 0.1)?,
            block_len: raw.parsed("block_len")?,
            step_probability: raw.parsed("q")?,
        },
        "lef" | "label_efficient" => {
            let forecaster = LefForecaster::parse(raw.get("forecaster").unwrap_or("ewf"))
                .map_err(|e| raw.field_error("forecaster", e))?;
            AlgorithmSpec::LabelEfficient { budget: raw.parsed_or("budget", (horizon / 10).max(1))?, forecaster }
        }
        other => return Err(raw.field_error("algorithm", format!("unknown algorithm `{other}`"))),
    };

    let adv_name = raw.require("adversary")?;
    let kind = match adv_name {
        "zigzag" => AdversaryKind::Zigzag { mu: raw.parsed_or("mu", 250)? },
        "markov" | "mc" => AdversaryKind::Markov { lambda: raw.parsed_or("lambda", 20.0)? },
        "block_coin" => AdversaryKind::BlockCoin { block: raw.parsed_or("block", sites)? },
        "adaptive_block" => AdversaryKind::AdaptiveBlock,
        "counter_permutation" => AdversaryKind::CounterPermutation,
        "appendix_d" => AdversaryKind::AppendixD { index: raw.parsed_or("index", 0)?, lambda: raw.parsed_or("lambda", 20)? },
        "iid_bernoulli" => AdversaryKind::IidBernoulli { gap: raw.parsed_or("gap", 0.2)? },
        "iid_uniform" => AdversaryKind::IidUniform,
        "constant" => {
            let values = raw.list::<f64>("values")?.ok_or_else(|| raw.field_error("values", "required for constant"))?;
            AdversaryKind::Constant { values }
        }
        other => return Err(raw.field_error("adversary", format!("unknown adversary `{other}`"))),
    };
    let mut adversary = AdversarySpec::new(kind);
    if let Some(a) = raw.get("allocation") {
        adversary.allocation = Some(SiteAllocation::parse(a).map_err(|e| raw.field_error("allocation", e))?);
    }

    let model = match raw.get("model") {
        None => algorithm.model(),
        Some(m) => m.parse::<ModelKind>().map_err(|e| raw.field_error("model", e))?,
    };
    if model != algorithm.model() {
        return Err(raw.field_error(
            "model",
            format!("{} runs in the {} model", algorithm.name(), algorithm.model()),
        ));
    }

    effective.push(("algorithm".into(), algorithm.name().into()));
    effective.extend(algorithm.params().into_iter().map(|(k, v)| (k.into(), v)));
    effective.push(("adversary".into(), adversary.kind.name().into()));
    effective.extend(adversary.params().into_iter().map(|(k, v)| (k.into(), v)));
    if let Some(a) = &adversary.allocation {
        effective.push(("allocation".into(), a.name()));
    }
    effective.push(("model".into(), model.as_str().into()));
    for (k, v) in [
        ("T", horizon.to_string()),
        ("k", sites.to_string()),
        ("n", experts.to_string()),
        ("seeds", count.to_string()),
        ("seed_base", seed_base.to_string()),
        ("jitter", jitter_string(&jitter)),
    ] {
        effective.push((k.into(), v));
    }

    let experiment = ExperimentConfig {
        algorithm,
        adversary,
        model: Some(model),
        horizon,
        sites,
        experts,
        seeds: (seed_base..seed_base + count).collect(),
        jitter,
    };
    validate(&experiment)?;
    Ok(Resolved { experiment, effective, out: raw.get("out").map(PathBuf::from), threads: threads(raw)? })
}

pub fn threads(raw: &RawConfig) -> Result<Option<usize>, CliError> {
    match raw.parsed::<usize>("threads")? {
        Some(0) => Err(raw.field_error("threads", "must be positive")),
        t => Ok(t),
    }
}

/// Builds the algorithm and adversary once so bad arguments surface before
/// any run starts.
pub fn validate(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let seed = cfg.seeds.first().copied().unwrap_or(0);
    cfg.algorithm
        .build::<f64>(cfg.horizon, cfg.sites, cfg.experts, seed, cfg.jitter)
        .map_err(|e| CliError::Config(format!("algorithm {}: {e}", cfg.algorithm)))?;
    cfg.adversary
        .build::<f64>(cfg.horizon, cfg.sites, cfg.experts, seed)
        .map_err(|e| CliError::Config(format!("adversary {}: {e}", cfg.adversary)))?;
    if cfg.adversary.is_adaptive() && cfg.algorithm.model() != ModelKind::SitePrediction {
        return Err(CliError::Config("adaptive adversaries need the site prediction model".into()));
    }
    Ok(())
}

/// Expected DFPL message count for the default recipe parameters.
pub fn dfpl_expected_messages(horizon: usize, sites: usize, epsilon: f64) -> Result<f64, CliError> {
    let d = DfplParams::<f64>::derive(horizon, sites, epsilon).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(d.params.expected_messages(sites))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_reports_lines() {
        let raw = RawConfig::parse("# c\nalgorithm = dfpl\n\nadversary=markov\nlambda=5\n").unwrap();
        let r = resolve(&raw).unwrap();
        assert_eq!(r.experiment.algorithm, AlgorithmSpec::dfpl(0.1));
        assert_eq!(r.experiment.seeds.len(), 100);
        let err = RawConfig::parse("algorithm=dfpl\nbogus=1\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let err = RawConfig::parse("algorithm=dfpl\nadversary\n").unwrap_err();
        assert!(err.to_string().contains("line 2"));
        let raw = RawConfig::parse("algorithm=dfpl\nadversary=markov\nlambda=x\n").unwrap();
        let err = resolve(&raw).unwrap_err();
        assert!(err.to_string().contains("line 3") && err.to_string().contains("lambda"), "{err}");
    }

    #[test]
    fn missing_fields_are_named() {
        let err = resolve(&RawConfig::parse("adversary=markov").unwrap()).unwrap_err();
        assert!(err.to_string().contains("algorithm"));
        let err = resolve(&RawConfig::parse("algorithm=full").unwrap()).unwrap_err();
        assert!(err.to_string().contains("adversary"));
    }

    #[test]
    fn effective_config_round_trips() {
        let mut raw = RawConfig::parse("algorithm=counter\nadversary=block_coin\nT=400\nk=4\n").unwrap();
        raw.set("seeds", "3").unwrap();
        let r = resolve(&raw).unwrap();
        let text: String = r.effective.iter().map(|(k, v)| format!("{k}={v}\n")).collect();
        let again = resolve(&RawConfig::parse(&text).unwrap()).unwrap();
        assert_eq!(again.experiment, r.experiment);
        assert_eq!(again.effective, r.effective);
    }

    #[test]
    fn jitter_values() {
        assert!(!parse_jitter("off").unwrap().enabled);
        assert_eq!(parse_jitter("on").unwrap().relative_slack, 0.01);
        assert_eq!(parse_jitter("0.05").unwrap(), JitterConfig::with_slack(0.05));
        assert!(parse_jitter("2").is_err());
    }

    #[test]
    fn invalid_arguments_fail_validation() {
        for text in [
            "algorithm=counter\nadversary=markov\nbeta=0",
            "algorithm=dfpl\nadversary=markov\nepsilon=0.5",
            "algorithm=full\nadversary=markov\nlambda=0.1",
            "algorithm=full\nadversary=appendix_d\nlambda=7\nT=100",
            "algorithm=lef\nadversary=adaptive_block",
            "algorithm=full\nadversary=markov\nmodel=coordinator",
        ] {
            let raw = RawConfig::parse(text).unwrap();
            assert!(matches!(resolve(&raw), Err(CliError::Config(_))), "{text}");
        }
    }
}

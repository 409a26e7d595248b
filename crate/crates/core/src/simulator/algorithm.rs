use std::fmt;
use std::sync::Arc;

use crate::baselines::{CounterForecaster, FullCommunication, LabelEfficient, LefConfig, LefForecaster, MiniBatch, NoCommunication};
use crate::dfpl::{block_schedule, DfplParams, DfplProtocol, MetaTree};
use crate::error::{invalid, Result};
use crate::protocol::{ModelKind, Protocol};
use crate::rng::{RngStream, StreamId};
use crate::scalar::Scalar;

use super::run::JitterConfig;

/// An algorithm and its knobs.
#[derive(Debug, Clone, PartialEq)]
pub enum AlgorithmSpec {
    Full,
    None,
    MiniBatch { p_sync: f64 },
    Counter { beta: f64 },
    /// Counter whose totals are refreshed only every `floor(beta)` steps.
    SnapshotCounter { beta: f64 },
    /// `block_len` overrides `k^(1+eps)`; `step_probability` overrides the tuned `q`.
    Dfpl { epsilon: f64, block_len: Option<usize>, step_probability: Option<f64> },
    LabelEfficient { budget: usize, forecaster: LefForecaster },
}

/// A constructed protocol together with notes raised while deriving its parameters.
pub struct BuiltAlgorithm<S: Scalar> {
    pub protocol: Box<dyn Protocol<S>>,
    pub warnings: Vec<String>,
}

impl AlgorithmSpec {
    pub fn dfpl(epsilon: f64) -> Self {
        AlgorithmSpec::Dfpl { epsilon, block_len: None, step_probability: None }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmSpec::Full => "full",
            AlgorithmSpec::None => "none",
            AlgorithmSpec::MiniBatch { .. } => "minibatch",
            AlgorithmSpec::Counter { .. } => "counter",
            AlgorithmSpec::SnapshotCounter { .. } => "counter_snapshot",
            AlgorithmSpec::Dfpl { .. } => "dfpl",
            AlgorithmSpec::LabelEfficient { .. } => "lef",
        }
    }

    pub fn model(&self) -> ModelKind {
        match self {
            AlgorithmSpec::LabelEfficient { .. } => ModelKind::CoordinatorPrediction,
            _ => ModelKind::SitePrediction,
        }
    }

    pub fn params(&self) -> Vec<(&'static str, String)> {
        match self {
            AlgorithmSpec::Full | AlgorithmSpec::None => vec![],
            AlgorithmSpec::MiniBatch { p_sync } => vec![("p_sync", p_sync.to_string())],
            AlgorithmSpec::Counter { beta } | AlgorithmSpec::SnapshotCounter { beta } => {
                vec![("beta", beta.to_string())]
            }
            AlgorithmSpec::Dfpl { epsilon, block_len, step_probability } => {
                let mut v = vec![("epsilon", epsilon.to_string())];
                if let Some(l) = block_len {
                    v.push(("block_len", l.to_string()));
                }
                if let Some(q) = step_probability {
                    v.push(("q", q.to_string()));
                }
                v
            }
            AlgorithmSpec::LabelEfficient { budget, forecaster } => {
                vec![("budget", budget.to_string()), ("forecaster", forecaster.as_str().to_string())]
            }
        }
    }

    pub fn build<S: Scalar>(
        &self,
        horizon: usize,
        sites: usize,
        experts: usize,
        seed: u64,
        jitter: JitterConfig,
    ) -> Result<BuiltAlgorithm<S>> {
        let mut warnings = Vec::new();
        let protocol: Box<dyn Protocol<S>> = match self {
            AlgorithmSpec::Full => Box::new(FullCommunication::new(horizon, sites, experts, seed)?),
            AlgorithmSpec::None => Box::new(NoCommunication::new(horizon, sites, experts, seed)?),
            AlgorithmSpec::MiniBatch { p_sync } => Box::new(MiniBatch::new(horizon, sites, experts, *p_sync, seed)?),
            AlgorithmSpec::Counter { beta } => Box::new(CounterForecaster::new(horizon, sites, experts, *beta, seed)?),
            AlgorithmSpec::SnapshotCounter { beta } => {
                Box::new(CounterForecaster::block_snapshot(horizon, sites, experts, *beta, seed)?)
            }
            AlgorithmSpec::LabelEfficient { budget, forecaster } => {
                let config = LefConfig::new(*budget, horizon, *forecaster)?;
                Box::new(LabelEfficient::new(horizon, sites, experts, config, seed)?)
            }
            AlgorithmSpec::Dfpl { epsilon, block_len, step_probability } => {
                let mut params = match block_len {
                    Some(ell) => {
                        if *ell == 0 || *ell > horizon {
                            return invalid(format!("block_len must lie in 1..={horizon}, got {ell}"));
                        }
                        let used = horizon - horizon % ell;
                        if used != horizon {
                            warnings.push(format!("block_len={ell} does not divide T={horizon}; last block is partial"));
                        }
                        DfplParams::<S>::with_tuned_noise(used, *ell)?
                    }
                    None => {
                        let derived = DfplParams::<S>::derive(horizon, sites, *epsilon)?;
                        warnings.extend(derived.warnings.iter().map(|w| w.to_string()));
                        derived.params
                    }
                };
                if let Some(q) = step_probability {
                    params = params.with_step_probability(*q)?;
                } else if params.raw_step_probability() > 1.0 && block_len.is_some() {
                    warnings.push(format!("step probability {:.4} clamped to 1", params.raw_step_probability()));
                }
                let schedule: Arc<[usize]> = if jitter.enabled {
                    let mut rng = RngStream::new(seed, StreamId::Schedule);
                    block_schedule(horizon, params.block_len, Some((jitter.relative_slack, &mut rng))).into()
                } else {
                    block_schedule(horizon, params.block_len, None).into()
                };
                Box::new(DfplProtocol::new(MetaTree::new(experts, params, schedule, seed)?))
            }
        };
        Ok(BuiltAlgorithm { protocol, warnings })
    }
}

impl fmt::Display for AlgorithmSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())?;
        let params = self.params();
        if !params.is_empty() {
            let joined: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            write!(f, "({})", joined.join(","))?;
        }
        Ok(())
    }
}

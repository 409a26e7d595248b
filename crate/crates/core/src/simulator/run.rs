use crate::adversaries::{Adversary, AdversarySpec};
use crate::domain::{compute_regret, ExpertIndex, PayoffVector, RegretAccumulator, RegretSummary, RunResult};
use crate::error::{invalid, Error, Result};
use crate::protocol::{CommObservation, ModelKind, Network, Protocol, StarChannel};
use crate::scalar::Scalar;

use super::algorithm::AlgorithmSpec;

/// Randomized block lengths for DFPL.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JitterConfig {
    pub enabled: bool,
    pub relative_slack: f64,
}

impl Default for JitterConfig {
    fn default() -> Self {
        Self { enabled: false, relative_slack: 0.01 }
    }
}

impl JitterConfig {
    pub fn with_slack(relative_slack: f64) -> Self {
        Self { enabled: true, relative_slack }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub horizon: usize,
    pub sites: usize,
    pub experts: usize,
    /// Must match the algorithm's model when set.
    pub model: Option<ModelKind>,
    pub jitter: JitterConfig,
    pub record_trace: bool,
}

impl RunOptions {
    pub fn new(horizon: usize, sites: usize, experts: usize) -> Self {
        Self { horizon, sites, experts, model: None, jitter: JitterConfig::default(), record_trace: false }
    }

    pub fn traced(mut self) -> Self {
        self.record_trace = true;
        self
    }

    pub fn with_jitter(mut self, jitter: JitterConfig) -> Self {
        self.jitter = jitter;
        self
    }

    pub fn with_model(mut self, model: ModelKind) -> Self {
        self.model = Some(model);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord<S> {
    pub t: usize,
    pub site: usize,
    pub action: ExpertIndex,
    pub payoff: PayoffVector<S>,
    pub messages: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace<S> {
    pub result: RunResult<S>,
    pub summary: RegretSummary<S>,
    /// Present only when requested.
    pub records: Option<Vec<StepRecord<S>>>,
    pub warnings: Vec<String>,
}

impl<S: Scalar> RunTrace<S> {
    /// Recomputes the regret from the stored records.
    pub fn replay_regret(&self) -> Result<RegretSummary<S>> {
        let Some(records) = &self.records else {
            return invalid("trace was not recorded");
        };
        let payoffs: Vec<PayoffVector<S>> = records.iter().map(|r| r.payoff.clone()).collect();
        let actions: Vec<ExpertIndex> = records.iter().map(|r| r.action).collect();
        compute_regret(&payoffs, &actions)
    }

    pub fn payoffs(&self) -> Option<Vec<PayoffVector<S>>> {
        self.records.as_ref().map(|r| r.iter().map(|x| x.payoff.clone()).collect())
    }
}

/// Builds the algorithm and adversary for `seed` and runs them over an exact
/// star network.
pub fn run_once<S: Scalar>(
    algorithm: &AlgorithmSpec,
    adversary: &AdversarySpec,
    options: &RunOptions,
    seed: u64,
) -> Result<RunTrace<S>> {
    let RunOptions { horizon, sites, experts, .. } = *options;
    if horizon == 0 || sites == 0 {
        return Err(Error::Config(format!("T and k must be positive (T={horizon}, k={sites})")));
    }
    let built = algorithm.build::<S>(horizon, sites, experts, seed, options.jitter)?;
    if let Some(model) = options.model {
        if model != built.protocol.model() {
            return Err(Error::Config(format!(
                "{} runs in the {} model, not the {model} model",
                algorithm.name(),
                built.protocol.model()
            )));
        }
    }
    let mut protocol = built.protocol;
    let mut adv = adversary.build::<S>(horizon, sites, experts, seed)?;
    let mut network = StarChannel::new(sites, experts);
    let mut trace = run_with_network(protocol.as_mut(), adv.as_mut(), &mut network, options, seed)?;
    trace.warnings = built.warnings;
    Ok(trace)
}

/// Drives `protocol` against `adversary` over any [`Network`].
///
/// Per step: the adversary picks the site and payoff (adaptive adversaries
/// see the communication view), the protocol chooses, then the payoff is
/// revealed at the site. Messages sent during a step are delivered before
/// the next query.
pub fn run_with_network<S: Scalar>(
    protocol: &mut dyn Protocol<S>,
    adversary: &mut dyn Adversary<S>,
    network: &mut dyn Network,
    options: &RunOptions,
    seed: u64,
) -> Result<RunTrace<S>> {
    let RunOptions { horizon, sites, experts, record_trace, .. } = *options;
    let adaptive = adversary.is_adaptive();
    if adaptive && protocol.model() != ModelKind::SitePrediction {
        return Err(Error::Config("adaptive adversaries need the site prediction model".into()));
    }
    let mut acc = RegretAccumulator::new(experts);
    let mut records = record_trace.then(|| Vec::with_capacity(horizon));
    for t in 1..=horizon {
        network.begin_step(t);
        let view: Option<&dyn CommObservation> = if adaptive { Some(&*network) } else { None };
        let query = adversary.next(t, view)?;
        if query.site >= sites {
            return Err(Error::Protocol { step: t, detail: format!("query at site {} of {sites}", query.site) });
        }
        if query.payoff.len() != experts {
            return Err(Error::Protocol {
                step: t,
                detail: format!("payoff has {} entries for {experts} experts", query.payoff.len()),
            });
        }
        let action = protocol.choose(t, query.site, network)?;
        if action.get() > experts {
            return Err(Error::Protocol { step: t, detail: format!("expert {action} out of range") });
        }
        protocol.observe(t, query.site, &query.payoff, network)?;
        acc.push(&query.payoff, action)?;
        if let Some(r) = records.as_mut() {
            r.push(StepRecord {
                t,
                site: query.site,
                action,
                payoff: query.payoff,
                messages: network.messages_this_step(),
            });
        }
    }
    let summary = acc.finish();
    Ok(RunTrace {
        result: RunResult::from_summary(&summary, network.ledger(), seed),
        summary,
        records,
        warnings: Vec::new(),
    })
}

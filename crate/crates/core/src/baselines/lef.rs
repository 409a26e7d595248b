use crate::domain::{ExpertIndex, PayoffVector};
use crate::error::{invalid, Error, Result};
use crate::forecasters::{perturbed_choice, EwfState};
use crate::protocol::{Channel, ModelKind, Protocol, RoundGuard};
use crate::rng::{RngStream, StreamId};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LefForecaster {
    /// Exponential weights with rate `sqrt(8 ln n * p / T)`.
    Ewf,
    /// FPL on importance-weighted gaps with noise `sqrt(T / p)`; two experts only.
    Fpl,
}

impl LefForecaster {
    pub fn as_str(self) -> &'static str {
        match self {
            LefForecaster::Ewf => "ewf",
            LefForecaster::Fpl => "fpl",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ewf" => Ok(LefForecaster::Ewf),
            "fpl" => Ok(LefForecaster::Fpl),
            other => Err(Error::Config(format!("unknown forecaster `{other}` (expected ewf or fpl)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LefConfig {
    pub budget: usize,
    pub sample_probability: f64,
    pub forecaster: LefForecaster,
}

impl LefConfig {
    pub fn new(budget: usize, horizon: usize, forecaster: LefForecaster) -> Result<Self> {
        if budget == 0 || budget > horizon {
            return invalid(format!("budget must lie in 1..={horizon}, got {budget}"));
        }
        Ok(Self { budget, sample_probability: budget as f64 / horizon as f64, forecaster })
    }
}

#[derive(Debug, Clone)]
enum Inner<S> {
    Ewf { state: EwfState<S>, rng: RngStream },
    Fpl { gap: S, eta: S, rng: RngStream },
}

/// Coordinator-model forecaster: the coordinator plays from its forecaster;
/// the observing site forwards the payoff with probability `C/T` (one
/// message), and the forecaster takes it with importance weight `T/C`.
#[derive(Debug, Clone)]
pub struct LabelEfficient<S> {
    inner: Inner<S>,
    config: LefConfig,
    weight: S,
    samplers: Vec<RngStream>,
    experts: usize,
    samples: u64,
    guard: RoundGuard,
}

impl<S: Scalar> LabelEfficient<S> {
    pub fn new(horizon: usize, sites: usize, experts: usize, config: LefConfig, seed: u64) -> Result<Self> {
        if sites == 0 {
            return invalid("at least one site is required");
        }
        let p = config.sample_probability;
        if !(p > 0.0 && p <= 1.0) {
            return invalid(format!("sample probability must lie in (0,1], got {p}"));
        }
        let rng = RngStream::new(seed, StreamId::Learner(0));
        let inner = match config.forecaster {
            LefForecaster::Ewf => {
                let lr = EwfState::<S>::default_learning_rate(experts, horizon, p);
                Inner::Ewf { state: EwfState::new(experts, lr)?, rng }
            }
            LefForecaster::Fpl => {
                if experts != 2 {
                    return Err(Error::UnsupportedArity { expected: 2, got: experts });
                }
                Inner::Fpl { gap: S::zero(), eta: S::lit((horizon as f64 / p).sqrt()), rng }
            }
        };
        Ok(Self {
            inner,
            config,
            weight: S::lit(1.0 / p),
            samplers: (0..sites).map(|i| RngStream::new(seed, StreamId::Sampler(i as u32))).collect(),
            experts,
            samples: 0,
            guard: RoundGuard::default(),
        })
    }

    pub fn config(&self) -> &LefConfig {
        &self.config
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }
}

impl<S: Scalar> Protocol<S> for LabelEfficient<S> {
    fn name(&self) -> &'static str {
        "lef"
    }

    fn model(&self) -> ModelKind {
        ModelKind::CoordinatorPrediction
    }

    fn choose(&mut self, t: usize, _site: usize, _channel: &mut dyn Channel) -> Result<ExpertIndex> {
        self.guard.begin(t)?;
        match &mut self.inner {
            Inner::Ewf { state, rng } => Ok(state.choose(rng)),
            Inner::Fpl { gap, eta, rng } => perturbed_choice(*gap, *eta, rng),
        }
    }

    fn observe(&mut self, t: usize, site: usize, payoff: &PayoffVector<S>, channel: &mut dyn Channel) -> Result<()> {
        self.guard.end(t)?;
        if payoff.len() != self.experts {
            return invalid(format!("payoff dimension {} does not match {}", payoff.len(), self.experts));
        }
        if !self.samplers[site].bernoulli(self.config.sample_probability) {
            return Ok(());
        }
        channel.to_coordinator(site, self.experts);
        self.samples += 1;
        match &mut self.inner {
            Inner::Ewf { state, .. } => state.update(payoff, self.weight),
            Inner::Fpl { gap, .. } => {
                *gap = *gap + payoff.gap() * self.weight;
                Ok(())
            }
        }
    }
}

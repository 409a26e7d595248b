use crate::domain::{ExpertIndex, PayoffVector};
use crate::error::Result;
use crate::forecasters::FplState;
use crate::protocol::{Channel, ModelKind, Protocol, RoundGuard};
use crate::rng::{RngStream, StreamId};
use crate::scalar::Scalar;

use super::{check_shape, sqrt_horizon_noise};

/// Every step the queried site fetches the global cumulative payoff and
/// returns its payoff afterwards: `2T` messages, and the choices are those
/// of a single FPL(`sqrt T`) run.
#[derive(Debug, Clone)]
pub struct FullCommunication<S> {
    fpl: FplState<S>,
    experts: usize,
    guard: RoundGuard,
}

impl<S: Scalar> FullCommunication<S> {
    pub fn new(horizon: usize, sites: usize, experts: usize, seed: u64) -> Result<Self> {
        check_shape(sites, experts)?;
        let eta = sqrt_horizon_noise(horizon)?;
        let fpl = FplState::new(experts, eta, RngStream::new(seed, StreamId::Learner(0)))?;
        Ok(Self { fpl, experts, guard: RoundGuard::default() })
    }

    pub fn state(&self) -> &FplState<S> {
        &self.fpl
    }
}

impl<S: Scalar> Protocol<S> for FullCommunication<S> {
    fn name(&self) -> &'static str {
        "full"
    }

    fn model(&self) -> ModelKind {
        ModelKind::SitePrediction
    }

    fn choose(&mut self, t: usize, site: usize, channel: &mut dyn Channel) -> Result<ExpertIndex> {
        self.guard.begin(t)?;
        channel.to_site(site, self.experts);
        self.fpl.choose()
    }

    fn observe(&mut self, t: usize, site: usize, payoff: &PayoffVector<S>, channel: &mut dyn Channel) -> Result<()> {
        self.guard.end(t)?;
        channel.to_coordinator(site, self.experts);
        self.fpl.update(payoff)
    }
}

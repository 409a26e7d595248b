use crate::domain::{ExpertIndex, PayoffVector};
use crate::error::Result;
use crate::forecasters::perturbed_choice;
use crate::protocol::{Channel, ModelKind, Protocol, RoundGuard};
use crate::rng::{RngStream, StreamId};
use crate::scalar::Scalar;

use super::{check_payoff, check_shape, sqrt_horizon_noise};

/// `k` isolated FPL(`sqrt T`) learners, each seeing only its own queries.
#[derive(Debug, Clone)]
pub struct NoCommunication<S> {
    gaps: Vec<S>,
    rngs: Vec<RngStream>,
    eta: S,
    guard: RoundGuard,
}

impl<S: Scalar> NoCommunication<S> {
    pub fn new(horizon: usize, sites: usize, experts: usize, seed: u64) -> Result<Self> {
        check_shape(sites, experts)?;
        Ok(Self {
            gaps: vec![S::zero(); sites],
            rngs: (0..sites).map(|i| RngStream::new(seed, StreamId::Learner(i as u32))).collect(),
            eta: sqrt_horizon_noise(horizon)?,
            guard: RoundGuard::default(),
        })
    }

    /// Local cumulative gap of every site.
    pub fn local_gaps(&self) -> &[S] {
        &self.gaps
    }
}

impl<S: Scalar> Protocol<S> for NoCommunication<S> {
    fn name(&self) -> &'static str {
        "none"
    }

    fn model(&self) -> ModelKind {
        ModelKind::SitePrediction
    }

    fn choose(&mut self, t: usize, site: usize, _channel: &mut dyn Channel) -> Result<ExpertIndex> {
        self.guard.begin(t)?;
        perturbed_choice(self.gaps[site], self.eta, &mut self.rngs[site])
    }

    fn observe(&mut self, t: usize, site: usize, payoff: &PayoffVector<S>, _channel: &mut dyn Channel) -> Result<()> {
        self.guard.end(t)?;
        self.gaps[site] = self.gaps[site] + check_payoff(payoff)?;
        Ok(())
    }
}

use crate::domain::{ExpertIndex, PayoffVector};
use crate::error::{invalid, Result};
use crate::forecasters::perturbed_choice;
use crate::protocol::{Channel, ModelKind, Protocol, RoundGuard};
use crate::rng::{RngStream, StreamId};
use crate::scalar::Scalar;

use super::{check_payoff, check_shape, sqrt_horizon_noise};

/// With probability `p_sync` after each step, the coordinator collects every
/// site's unsynced payoffs and broadcasts the sum (`2k` messages). Sites play
/// FPL(`sqrt T`) on the last synced global plus their own unsynced payoffs.
#[derive(Debug, Clone)]
pub struct MiniBatch<S> {
    synced: S,
    local: Vec<S>,
    rngs: Vec<RngStream>,
    sync_rng: RngStream,
    p_sync: f64,
    eta: S,
    experts: usize,
    syncs: u64,
    guard: RoundGuard,
}

impl<S: Scalar> MiniBatch<S> {
    pub fn new(horizon: usize, sites: usize, experts: usize, p_sync: f64, seed: u64) -> Result<Self> {
        check_shape(sites, experts)?;
        if !(0.0..=1.0).contains(&p_sync) {
            return invalid(format!("p_sync must lie in [0,1], got {p_sync}"));
        }
        Ok(Self {
            synced: S::zero(),
            local: vec![S::zero(); sites],
            rngs: (0..sites).map(|i| RngStream::new(seed, StreamId::Learner(i as u32))).collect(),
            sync_rng: RngStream::new(seed, StreamId::Sync),
            p_sync,
            eta: sqrt_horizon_noise(horizon)?,
            experts,
            syncs: 0,
            guard: RoundGuard::default(),
        })
    }

    pub fn syncs(&self) -> u64 {
        self.syncs
    }

    /// The gap a site currently acts on.
    pub fn view(&self, site: usize) -> S {
        self.synced + self.local[site]
    }
}

impl<S: Scalar> Protocol<S> for MiniBatch<S> {
    fn name(&self) -> &'static str {
        "minibatch"
    }

    fn model(&self) -> ModelKind {
        ModelKind::SitePrediction
    }

    fn choose(&mut self, t: usize, site: usize, _channel: &mut dyn Channel) -> Result<ExpertIndex> {
        self.guard.begin(t)?;
        perturbed_choice(self.view(site), self.eta, &mut self.rngs[site])
    }

    fn observe(&mut self, t: usize, site: usize, payoff: &PayoffVector<S>, channel: &mut dyn Channel) -> Result<()> {
        self.guard.end(t)?;
        self.local[site] = self.local[site] + check_payoff(payoff)?;
        if self.sync_rng.bernoulli(self.p_sync) {
            for (j, local) in self.local.iter_mut().enumerate() {
                channel.to_coordinator(j, self.experts);
                self.synced = self.synced + *local;
                *local = S::zero();
            }
            channel.broadcast(self.experts);
            self.syncs += 1;
        }
        Ok(())
    }
}

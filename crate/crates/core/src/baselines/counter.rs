use crate::adversaries::counter_permutation_sites;
use crate::domain::{ExpertIndex, PayoffVector};
use crate::error::{invalid, Error, Result};
use crate::forecasters::perturbed_choice;
use crate::protocol::{Channel, ModelKind, Protocol, RoundGuard};
use crate::rng::{RngStream, StreamId};
use crate::scalar::Scalar;

use super::{check_shape, sqrt_horizon_noise};

/// Deterministic drift counter over `n` coordinates. A site flushes a
/// coordinate once its uncommitted delta reaches the threshold, so every
/// coordinate of the committed totals is within `k * threshold` of the truth.
#[derive(Debug, Clone)]
pub struct ApproxCounterState<S> {
    deltas: Vec<Vec<S>>,
    committed: Vec<S>,
    truth: Vec<S>,
    threshold: S,
}

impl<S: Scalar> ApproxCounterState<S> {
    pub fn new(sites: usize, experts: usize, threshold: S) -> Result<Self> {
        if !(threshold > S::zero()) || !threshold.is_finite() {
            return invalid(format!("flush threshold must be positive and finite, got {threshold}"));
        }
        if sites == 0 || experts == 0 {
            return invalid("counter needs at least one site and one coordinate");
        }
        Ok(Self {
            deltas: vec![vec![S::zero(); experts]; sites],
            committed: vec![S::zero(); experts],
            truth: vec![S::zero(); experts],
            threshold,
        })
    }

    pub fn threshold(&self) -> S {
        self.threshold
    }

    pub fn committed(&self) -> &[S] {
        &self.committed
    }

    pub fn truth(&self) -> &[S] {
        &self.truth
    }

    pub fn delta(&self, site: usize) -> &[S] {
        &self.deltas[site]
    }

    /// Adds `p` at `site`; returns the coordinates it flushed.
    pub fn record(&mut self, site: usize, p: &PayoffVector<S>) -> Result<Vec<usize>> {
        if p.len() != self.truth.len() {
            return invalid(format!("payoff dimension {} does not match {}", p.len(), self.truth.len()));
        }
        let Some(delta) = self.deltas.get_mut(site) else {
            return invalid(format!("site {site} out of range"));
        };
        let mut flushed = vec![];
        for (a, &x) in p.as_slice().iter().enumerate() {
            self.truth[a] = self.truth[a] + x;
            delta[a] = delta[a] + x;
            if delta[a] >= self.threshold {
                self.committed[a] = self.committed[a] + delta[a];
                delta[a] = S::zero();
                flushed.push(a);
            }
        }
        Ok(flushed)
    }

    /// Largest per-coordinate gap between truth and committed totals.
    pub fn max_error(&self) -> S {
        self.truth
            .iter()
            .zip(&self.committed)
            .map(|(&t, &c)| (t - c).abs())
            .fold(S::zero(), S::max)
    }

    /// Fails if the error exceeds `k * threshold`, up to rounding.
    pub fn check(&self, step: usize) -> Result<()> {
        let bound = self.threshold * S::from_usize_lossy(self.deltas.len());
        let scale = self.truth.iter().fold(bound, |m, &t| m.max(t.abs()));
        let slack = S::epsilon() * S::lit(64.0) * scale;
        let err = self.max_error();
        if err > bound + slack {
            return Err(Error::Protocol { step, detail: format!("counter error {err} exceeds bound {bound}") });
        }
        Ok(())
    }
}

/// Totals published only at the end of every block of `block` steps: during
/// a block every site sees the totals as of the previous block end. With
/// payoffs in `[0, 1]` the lag is at most `block` per coordinate.
#[derive(Debug, Clone)]
pub struct BlockSnapshotState<S> {
    block: usize,
    committed: Vec<S>,
    truth: Vec<S>,
    dirty: Vec<bool>,
}

impl<S: Scalar> BlockSnapshotState<S> {
    pub fn new(sites: usize, experts: usize, block: usize) -> Result<Self> {
        if block == 0 {
            return invalid("snapshot block must be positive");
        }
        Ok(Self {
            block,
            committed: vec![S::zero(); experts],
            truth: vec![S::zero(); experts],
            dirty: vec![false; sites],
        })
    }

    pub fn block(&self) -> usize {
        self.block
    }

    pub fn committed(&self) -> &[S] {
        &self.committed
    }

    pub fn truth(&self) -> &[S] {
        &self.truth
    }

    /// Adds `p` observed at `site` on step `t`; on a block end returns the
    /// sites that report before the new totals are broadcast.
    pub fn record(&mut self, t: usize, site: usize, p: &PayoffVector<S>) -> Result<Option<Vec<usize>>> {
        if p.len() != self.truth.len() {
            return invalid(format!("payoff dimension {} does not match {}", p.len(), self.truth.len()));
        }
        let Some(d) = self.dirty.get_mut(site) else {
            return invalid(format!("site {site} out of range"));
        };
        *d = true;
        for (acc, &x) in self.truth.iter_mut().zip(p.as_slice()) {
            *acc = *acc + x;
        }
        if !t.is_multiple_of(self.block) {
            return Ok(None);
        }
        self.committed.clone_from(&self.truth);
        let reporting = (0..self.dirty.len()).filter(|&i| self.dirty[i]).collect();
        self.dirty.iter_mut().for_each(|d| *d = false);
        Ok(Some(reporting))
    }
}

#[derive(Debug, Clone)]
enum Totals<S> {
    Threshold(ApproxCounterState<S>),
    Snapshot(BlockSnapshotState<S>),
}

/// FPL(`sqrt T`) on `beta`-accurate totals.
///
/// The default counter flushes a site's coordinate once its delta reaches
/// `beta / k`: one message carrying the crossing coordinates, then a
/// broadcast of the new totals. The snapshot variant instead publishes the
/// totals every `floor(beta)` steps (one message per site that saw a payoff,
/// then a broadcast), the stalest counts the accuracy allows.
#[derive(Debug, Clone)]
pub struct CounterForecaster<S> {
    totals: Totals<S>,
    rngs: Vec<RngStream>,
    eta: S,
    beta: S,
    flushes: u64,
    guard: RoundGuard,
}

impl<S: Scalar> CounterForecaster<S> {
    pub fn new(horizon: usize, sites: usize, experts: usize, beta: f64, seed: u64) -> Result<Self> {
        check_shape(sites, experts)?;
        if !(beta > 0.0) || !beta.is_finite() {
            return invalid(format!("beta must be positive and finite, got {beta}"));
        }
        let threshold = S::lit(beta / sites as f64);
        Self::with_totals(horizon, sites, beta, seed, Totals::Threshold(ApproxCounterState::new(sites, experts, threshold)?))
    }

    pub fn block_snapshot(horizon: usize, sites: usize, experts: usize, beta: f64, seed: u64) -> Result<Self> {
        check_shape(sites, experts)?;
        if !(beta >= 1.0) || !beta.is_finite() {
            return invalid(format!("snapshot counter needs a finite beta of at least 1, got {beta}"));
        }
        let state = BlockSnapshotState::new(sites, experts, beta.floor() as usize)?;
        Self::with_totals(horizon, sites, beta, seed, Totals::Snapshot(state))
    }

    fn with_totals(horizon: usize, sites: usize, beta: f64, seed: u64, totals: Totals<S>) -> Result<Self> {
        Ok(Self {
            totals,
            rngs: (0..sites).map(|i| RngStream::new(seed, StreamId::Learner(i as u32))).collect(),
            eta: sqrt_horizon_noise(horizon)?,
            beta: S::lit(beta),
            flushes: 0,
            guard: RoundGuard::default(),
        })
    }

    /// The threshold counter, or `None` for the snapshot variant.
    pub fn counter(&self) -> Option<&ApproxCounterState<S>> {
        match &self.totals {
            Totals::Threshold(c) => Some(c),
            Totals::Snapshot(_) => None,
        }
    }

    pub fn committed(&self) -> &[S] {
        match &self.totals {
            Totals::Threshold(c) => c.committed(),
            Totals::Snapshot(s) => s.committed(),
        }
    }

    pub fn beta(&self) -> S {
        self.beta
    }

    pub fn flushes(&self) -> u64 {
        self.flushes
    }
}

impl<S: Scalar> Protocol<S> for CounterForecaster<S> {
    fn name(&self) -> &'static str {
        "counter"
    }

    fn model(&self) -> ModelKind {
        ModelKind::SitePrediction
    }

    fn choose(&mut self, t: usize, site: usize, _channel: &mut dyn Channel) -> Result<ExpertIndex> {
        self.guard.begin(t)?;
        let c = self.committed();
        perturbed_choice(c[0] - c[1], self.eta, &mut self.rngs[site])
    }

    fn observe(&mut self, t: usize, site: usize, payoff: &PayoffVector<S>, channel: &mut dyn Channel) -> Result<()> {
        self.guard.end(t)?;
        let n = payoff.len();
        match &mut self.totals {
            Totals::Threshold(counter) => {
                let flushed = counter.record(site, payoff)?;
                if !flushed.is_empty() {
                    channel.to_coordinator(site, flushed.len());
                    channel.broadcast(n);
                    self.flushes += 1;
                }
                counter.check(t)
            }
            Totals::Snapshot(state) => {
                if let Some(reporting) = state.record(t, site, payoff)? {
                    for j in reporting {
                        channel.to_coordinator(j, n);
                    }
                    channel.broadcast(n);
                    self.flushes += 1;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StaleReport {
    pub queries: u64,
    pub violations: u64,
}

impl StaleReport {
    pub fn rate(&self) -> f64 {
        if self.queries == 0 {
            0.0
        } else {
            self.violations as f64 / self.queries as f64
        }
    }
}

/// Unit increments with a fresh site permutation per block of `k`. Each site
/// may sync only when it is queried, so its estimate is the count it learned
/// at its previous query. Counts the queries (after the first block) at
/// which that estimate is more than `beta` off the true count.
pub fn stale_estimate_violations(sites: usize, horizon: usize, beta: f64, seed: u64) -> Result<StaleReport> {
    if !(beta > 0.0) {
        return invalid(format!("beta must be positive, got {beta}"));
    }
    let order = counter_permutation_sites(sites, horizon, seed)?;
    let mut last_seen: Vec<Option<usize>> = vec![None; sites];
    let mut report = StaleReport { queries: 0, violations: 0 };
    for (i, &site) in order.iter().enumerate() {
        let truth = i;
        if let Some(estimate) = last_seen[site] {
            report.queries += 1;
            if (truth - estimate) as f64 > beta {
                report.violations += 1;
            }
        }
        last_seen[site] = Some(truth + 1);
    }
    Ok(report)
}

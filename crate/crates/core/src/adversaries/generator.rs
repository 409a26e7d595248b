use std::marker::PhantomData;

use crate::domain::PayoffVector;
use crate::error::{invalid, Error, Result};
use crate::protocol::CommObservation;
use crate::rng::RngStream;
use crate::scalar::Scalar;

use super::allocation::{Allocator, SiteAllocation};
use super::sequences::{appendix_d_check, appendix_d_payoff, zigzag_payoff};
use super::{two_experts, Adversary, AdversaryKind, Query};

#[derive(Debug, Clone)]
enum Source {
    Zigzag { mu: usize },
    Markov { switch: f64, leader_first: bool },
    BlockCoin { block: usize, coin: bool },
    Adaptive { block: usize, start: usize, coin: bool },
    Unit,
    AppendixD { index: usize, lambda: usize },
    IidBernoulli { gap: f64 },
    IidUniform,
    Constant(Vec<f64>),
}

/// Streaming generator for every [`AdversaryKind`]. Each round first draws
/// the site, then the payoff, from a single stream.
#[derive(Debug, Clone)]
pub struct GeneratedAdversary<S> {
    source: Source,
    allocator: Allocator,
    rng: RngStream,
    experts: usize,
    horizon: usize,
    _scalar: PhantomData<fn() -> S>,
}

impl<S: Scalar> GeneratedAdversary<S> {
    pub fn new(
        kind: &AdversaryKind,
        allocation: SiteAllocation,
        horizon: usize,
        sites: usize,
        experts: usize,
        rng: RngStream,
    ) -> Result<Self> {
        if experts < 2 {
            return invalid(format!("need at least 2 experts, got {experts}"));
        }
        if horizon == 0 {
            return invalid("horizon must be positive");
        }
        let source = match kind {
            AdversaryKind::Zigzag { mu } => {
                two_experts(experts)?;
                if *mu == 0 {
                    return invalid("zigzag needs mu >= 1");
                }
                Source::Zigzag { mu: *mu }
            }
            AdversaryKind::Markov { lambda } => {
                two_experts(experts)?;
                if !lambda.is_finite() || *lambda < 0.5 {
                    return invalid(format!("markov needs lambda >= 1/2, got {lambda}"));
                }
                Source::Markov { switch: 1.0 / (2.0 * lambda), leader_first: false }
            }
            AdversaryKind::BlockCoin { block } => {
                two_experts(experts)?;
                if *block == 0 {
                    return invalid("block_coin needs block >= 1");
                }
                Source::BlockCoin { block: *block, coin: false }
            }
            AdversaryKind::AdaptiveBlock => {
                two_experts(experts)?;
                if !horizon.is_multiple_of(sites) {
                    return invalid(format!("adaptive_block needs T={horizon} divisible by k={sites}"));
                }
                Source::Adaptive { block: sites, start: 1, coin: false }
            }
            AdversaryKind::CounterPermutation => Source::Unit,
            AdversaryKind::AppendixD { index, lambda } => {
                two_experts(experts)?;
                appendix_d_check(*index, *lambda, horizon)?;
                Source::AppendixD { index: *index, lambda: *lambda }
            }
            AdversaryKind::IidBernoulli { gap } => {
                if !(0.0..=1.0).contains(gap) {
                    return invalid(format!("iid_bernoulli gap must lie in [0,1], got {gap}"));
                }
                Source::IidBernoulli { gap: *gap }
            }
            AdversaryKind::IidUniform => Source::IidUniform,
            AdversaryKind::Constant { values } => {
                if values.len() != experts {
                    return invalid(format!("constant payoff has {} entries for {experts} experts", values.len()));
                }
                PayoffVector::<f64>::new(values.clone())?;
                Source::Constant(values.clone())
            }
        };
        let allocator = Allocator::new(allocation, sites, horizon)?;
        Ok(Self { source, allocator, rng, experts, horizon, _scalar: PhantomData })
    }

    fn payoff(&mut self, t: usize, comm: Option<&dyn CommObservation>) -> Result<Vec<f64>> {
        let rng = &mut self.rng;
        let pair = |first: bool| if first { vec![1.0, 0.0] } else { vec![0.0, 1.0] };
        Ok(match &mut self.source {
            Source::Zigzag { mu } => pair(zigzag_payoff(t, *mu)),
            Source::Markov { switch, leader_first } => {
                if t == 1 {
                    *leader_first = rng.coin();
                } else if rng.bernoulli(*switch) {
                    *leader_first = !*leader_first;
                }
                pair(*leader_first)
            }
            Source::BlockCoin { block, coin } => {
                if (t - 1).is_multiple_of(*block) {
                    *coin = rng.coin();
                }
                pair(*coin)
            }
            Source::Adaptive { block, start, coin } => {
                let comm = comm.ok_or_else(|| {
                    Error::Config("adaptive_block needs a view of the algorithm's communication".into())
                })?;
                if (t - 1).is_multiple_of(*block) {
                    *start = t;
                    *coin = rng.coin();
                } else if comm.any_messages_since(*start) {
                    *coin = rng.coin();
                }
                pair(*coin)
            }
            Source::Unit => vec![1.0; self.experts],
            Source::AppendixD { index, lambda } => pair(appendix_d_payoff(t, *index, *lambda)),
            Source::IidBernoulli { gap } => {
                let hi = 0.5 * (1.0 + *gap);
                let lo = 0.5 * (1.0 - *gap);
                (0..self.experts)
                    .map(|e| if rng.bernoulli(if e == 0 { hi } else { lo }) { 1.0 } else { 0.0 })
                    .collect()
            }
            Source::IidUniform => (0..self.experts).map(|_| rng.unit()).collect(),
            Source::Constant(values) => values.clone(),
        })
    }
}

impl<S: Scalar> Adversary<S> for GeneratedAdversary<S> {
    fn next(&mut self, t: usize, comm: Option<&dyn CommObservation>) -> Result<Query<S>> {
        if t == 0 || t > self.horizon {
            return invalid(format!("step {t} outside 1..={}", self.horizon));
        }
        let site = self.allocator.site(t, &mut self.rng);
        let values = self.payoff(t, comm)?;
        let payoff = PayoffVector::new(values.into_iter().map(S::lit).collect())?;
        Ok(Query { site, payoff })
    }

    fn is_adaptive(&self) -> bool {
        matches!(self.source, Source::Adaptive { .. })
    }
}

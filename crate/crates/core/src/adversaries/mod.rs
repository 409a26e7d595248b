//! Payoff and site-allocation generators.
//!
//! Every generator streams one [`Query`] per step. All of them except
//! [`AdversaryKind::AdaptiveBlock`] are oblivious: their output is a pure
//! function of the spec and the seed.

mod allocation;
mod generator;
mod sequences;

use std::fmt;

use crate::domain::PayoffVector;
use crate::error::{Error, Result};
use crate::protocol::CommObservation;
use crate::rng::{RngStream, StreamId};
use crate::scalar::Scalar;

pub use allocation::SiteAllocation;
pub use generator::GeneratedAdversary;
pub use sequences::{
    appendix_d_sequence, appendix_d_sign, block_coin, counter_permutation_sites, markov, materialize, zigzag,
    zigzag_gap, ReplayAdversary,
};

/// One round as decided by the adversary: the site that is queried (and sees
/// the payoff) and the payoff vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Query<S> {
    pub site: usize,
    pub payoff: PayoffVector<S>,
}

pub trait Adversary<S: Scalar>: Send {
    /// Produces round `t` (1-based). Adaptive adversaries require `comm`.
    fn next(&mut self, t: usize, comm: Option<&dyn CommObservation>) -> Result<Query<S>>;

    fn is_adaptive(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AdversaryKind {
    /// `(1,0)` for `mu` steps, then alternating runs of `2 mu`.
    Zigzag { mu: usize },
    /// Two-state chain switching with probability `1/(2 lambda)`.
    Markov { lambda: f64 },
    /// One fair coin per block of `block` steps.
    BlockCoin { block: usize },
    /// Coin per block of `k` steps, re-tossed per step once the algorithm has
    /// communicated inside the block.
    AdaptiveBlock,
    /// Unit increments `(1,1)`, sites in a fresh random order each block of `k`.
    CounterPermutation,
    /// The `p_(i)` family built from runs of length `lambda`.
    AppendixD { index: usize, lambda: usize },
    /// Independent Bernoulli payoffs: expert 1 has mean `(1+gap)/2`, the rest `(1-gap)/2`.
    IidBernoulli { gap: f64 },
    /// Independent uniform `[0,1]` payoffs.
    IidUniform,
    /// The same payoff vector every round.
    Constant { values: Vec<f64> },
}

impl AdversaryKind {
    pub fn name(&self) -> &'static str {
        match self {
            AdversaryKind::Zigzag { .. } => "zigzag",
            AdversaryKind::Markov { .. } => "markov",
            AdversaryKind::BlockCoin { .. } => "block_coin",
            AdversaryKind::AdaptiveBlock => "adaptive_block",
            AdversaryKind::CounterPermutation => "counter_permutation",
            AdversaryKind::AppendixD { .. } => "appendix_d",
            AdversaryKind::IidBernoulli { .. } => "iid_bernoulli",
            AdversaryKind::IidUniform => "iid_uniform",
            AdversaryKind::Constant { .. } => "constant",
        }
    }
}

/// Declarative description of an adversary.
#[derive(Debug, Clone, PartialEq)]
pub struct AdversarySpec {
    pub kind: AdversaryKind,
    /// Overrides the kind's default site allocation.
    pub allocation: Option<SiteAllocation>,
}

impl AdversarySpec {
    pub fn new(kind: AdversaryKind) -> Self {
        Self { kind, allocation: None }
    }

    pub fn with_allocation(mut self, allocation: SiteAllocation) -> Self {
        self.allocation = Some(allocation);
        self
    }

    pub fn zigzag(mu: usize) -> Self {
        Self::new(AdversaryKind::Zigzag { mu })
    }

    pub fn markov(lambda: f64) -> Self {
        Self::new(AdversaryKind::Markov { lambda })
    }

    pub fn block_coin(block: usize) -> Self {
        Self::new(AdversaryKind::BlockCoin { block })
    }

    pub fn is_adaptive(&self) -> bool {
        matches!(self.kind, AdversaryKind::AdaptiveBlock)
    }

    /// Allocation used when none is given: single site for `p_(i)`, a fresh
    /// permutation per block for unit increments, cyclic over `min(block, k)`
    /// sites for block coins, and cyclic over all sites otherwise.
    pub fn default_allocation(&self, sites: usize) -> SiteAllocation {
        match &self.kind {
            AdversaryKind::AppendixD { .. } => SiteAllocation::SingleSite,
            AdversaryKind::CounterPermutation => SiteAllocation::PermutationPerBlock,
            AdversaryKind::BlockCoin { block } => SiteAllocation::CyclicOver((*block).min(sites).max(1)),
            _ => SiteAllocation::Cyclic,
        }
    }

    /// Name-value pairs of the kind's parameters, in a stable order.
    pub fn params(&self) -> Vec<(&'static str, String)> {
        match &self.kind {
            AdversaryKind::Zigzag { mu } => vec![("mu", mu.to_string())],
            AdversaryKind::Markov { lambda } => vec![("lambda", lambda.to_string())],
            AdversaryKind::BlockCoin { block } => vec![("block", block.to_string())],
            AdversaryKind::AppendixD { index, lambda } => {
                vec![("index", index.to_string()), ("lambda", lambda.to_string())]
            }
            AdversaryKind::IidBernoulli { gap } => vec![("gap", gap.to_string())],
            AdversaryKind::Constant { values } => vec![(
                "values",
                values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(":"),
            )],
            AdversaryKind::AdaptiveBlock | AdversaryKind::CounterPermutation | AdversaryKind::IidUniform => vec![],
        }
    }

    /// Builds the streaming generator. Its randomness comes from the
    /// adversary stream of `seed`.
    pub fn build<S: Scalar>(&self, horizon: usize, sites: usize, experts: usize, seed: u64) -> Result<Box<dyn Adversary<S>>> {
        let rng = RngStream::new(seed, StreamId::Adversary);
        let allocation = self.allocation.clone().unwrap_or_else(|| self.default_allocation(sites));
        Ok(Box::new(GeneratedAdversary::new(&self.kind, allocation, horizon, sites, experts, rng)?))
    }
}

impl fmt::Display for AdversarySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind.name())?;
        let params = self.params();
        if !params.is_empty() {
            let joined: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            write!(f, "({})", joined.join(","))?;
        }
        Ok(())
    }
}

pub(crate) fn two_experts(experts: usize) -> Result<()> {
    if experts != 2 {
        return Err(Error::UnsupportedArity { expected: 2, got: experts });
    }
    Ok(())
}

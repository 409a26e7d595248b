use crate::domain::PayoffVector;
use crate::error::{invalid, Result};
use crate::protocol::CommObservation;
use crate::rng::{RngStream, StreamId};
use crate::scalar::Scalar;

use super::allocation::SiteAllocation;
use super::generator::GeneratedAdversary;
use super::{Adversary, AdversaryKind, Query};

/// Whether expert 1 gets the unit payoff at step `t` of the zigzag.
pub(crate) fn zigzag_payoff(t: usize, mu: usize) -> bool {
    if t <= mu {
        return true;
    }
    ((t - mu - 1) / (2 * mu)) % 2 == 1
}

/// Cumulative gap `G(t) = L_1(t) - L_2(t)` of the zigzag.
pub fn zigzag_gap(t: usize, mu: usize) -> i64 {
    let mu_i = mu as i64;
    if t <= mu {
        return t as i64;
    }
    let u = t - mu;
    let (run, off) = (u / (2 * mu), (u % (2 * mu)) as i64);
    if run % 2 == 0 {
        mu_i - off
    } else {
        off - mu_i
    }
}

/// Sign of `p_(0)` at step `t`: runs of `lambda` steps with signs
/// `-, +, +, -, -, +, +, ...`.
pub fn appendix_d_sign(t: usize, lambda: usize) -> i8 {
    let run = (t - 1) / lambda;
    if run.div_ceil(2) % 2 == 1 {
        1
    } else {
        -1
    }
}

pub(crate) fn appendix_d_payoff(t: usize, index: usize, lambda: usize) -> bool {
    if index == 0 || t <= (2 * index - 1) * lambda {
        appendix_d_sign(t, lambda) > 0
    } else {
        index.is_multiple_of(2)
    }
}

pub(crate) fn appendix_d_check(index: usize, lambda: usize, horizon: usize) -> Result<()> {
    if lambda == 0 {
        return invalid("appendix_d needs lambda >= 1");
    }
    if index == 0 {
        if !horizon.is_multiple_of(lambda) || (horizon / lambda) % 4 != 3 {
            let m = ((horizon as f64 / lambda as f64 - 3.0) / 4.0).round().max(0.0) as usize;
            let nearest = (4 * m + 3) * lambda;
            return invalid(format!(
                "p_(0) needs T = (4m+3)*lambda; T={horizon} with lambda={lambda} is not of that form (nearest: {nearest})"
            ));
        }
    } else if (2 * index - 1) * lambda > horizon {
        return invalid(format!("p_({index}) needs (2i-1)*lambda <= T, got lambda={lambda}, T={horizon}"));
    }
    Ok(())
}

/// Replays a fixed list of queries.
#[derive(Debug, Clone)]
pub struct ReplayAdversary<S> {
    queries: Vec<Query<S>>,
}

impl<S: Scalar> ReplayAdversary<S> {
    pub fn new(queries: Vec<Query<S>>) -> Self {
        Self { queries }
    }

    /// All rounds at site 0.
    pub fn single_site(payoffs: Vec<PayoffVector<S>>) -> Self {
        Self::new(payoffs.into_iter().map(|payoff| Query { site: 0, payoff }).collect())
    }

    /// Round `t` at site `(t - 1) mod sites`.
    pub fn cyclic(payoffs: Vec<PayoffVector<S>>, sites: usize) -> Self {
        let sites = sites.max(1);
        Self::new(payoffs.into_iter().enumerate().map(|(i, payoff)| Query { site: i % sites, payoff }).collect())
    }
}

impl<S: Scalar> Adversary<S> for ReplayAdversary<S> {
    fn next(&mut self, t: usize, _comm: Option<&dyn CommObservation>) -> Result<Query<S>> {
        match t.checked_sub(1).and_then(|i| self.queries.get(i)) {
            Some(q) => Ok(q.clone()),
            None => invalid(format!("no query recorded for step {t}")),
        }
    }
}

/// Runs an oblivious adversary for `horizon` rounds.
pub fn materialize<S: Scalar>(adversary: &mut dyn Adversary<S>, horizon: usize) -> Result<Vec<Query<S>>> {
    (1..=horizon).map(|t| adversary.next(t, None)).collect()
}

fn payoffs<S: Scalar>(kind: AdversaryKind, horizon: usize, seed: u64) -> Result<Vec<PayoffVector<S>>> {
    let rng = RngStream::new(seed, StreamId::Adversary);
    let mut adv = GeneratedAdversary::<S>::new(&kind, SiteAllocation::SingleSite, horizon, 1, 2, rng)?;
    Ok(materialize(&mut adv, horizon)?.into_iter().map(|q| q.payoff).collect())
}

pub fn zigzag<S: Scalar>(mu: usize, horizon: usize) -> Result<Vec<PayoffVector<S>>> {
    payoffs(AdversaryKind::Zigzag { mu }, horizon, 0)
}

pub fn markov<S: Scalar>(lambda: f64, horizon: usize, seed: u64) -> Result<Vec<PayoffVector<S>>> {
    payoffs(AdversaryKind::Markov { lambda }, horizon, seed)
}

pub fn block_coin<S: Scalar>(block: usize, horizon: usize, seed: u64) -> Result<Vec<PayoffVector<S>>> {
    payoffs(AdversaryKind::BlockCoin { block }, horizon, seed)
}

pub fn appendix_d_sequence<S: Scalar>(index: usize, lambda: usize, horizon: usize) -> Result<Vec<PayoffVector<S>>> {
    payoffs(AdversaryKind::AppendixD { index, lambda }, horizon, 0)
}

/// The site order of the unit-increment adversary: each block of `k` steps
/// is a fresh uniform permutation of the sites.
pub fn counter_permutation_sites(sites: usize, horizon: usize, seed: u64) -> Result<Vec<usize>> {
    let rng = RngStream::new(seed, StreamId::Adversary);
    let mut adv = GeneratedAdversary::<f64>::new(
        &AdversaryKind::CounterPermutation,
        SiteAllocation::PermutationPerBlock,
        horizon,
        sites,
        2,
        rng,
    )?;
    Ok(materialize(&mut adv, horizon)?.into_iter().map(|q| q.site).collect())
}

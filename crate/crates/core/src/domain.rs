//! Shared domain types and regret/communication accounting.

use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// Payoffs of the `n` experts in one round; every entry lies in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffVector<S> {
    values: Vec<S>,
}

impl<S: Scalar> PayoffVector<S> {
    pub fn new(values: Vec<S>) -> Result<Self> {
        if values.len() < 2 {
            return invalid(format!("a payoff vector needs at least 2 experts, got {}", values.len()));
        }
        if let Some(bad) = values.iter().find(|v| !(**v >= S::zero() && **v <= S::one())) {
            return invalid(format!("payoff {bad} outside [0, 1]"));
        }
        Ok(Self { values })
    }

    pub fn pair(first: S, second: S) -> Result<Self> {
        Self::new(vec![first, second])
    }

    pub fn zeros(n: usize) -> Self {
        Self { values: vec![S::zero(); n.max(2)] }
    }

    /// `(1, 0, ..., 0)`-style unit vector for expert `expert`.
    pub fn unit(expert: ExpertIndex, n: usize) -> Self {
        let mut values = vec![S::zero(); n.max(2)];
        values[expert.zero_based()] = S::one();
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, expert: ExpertIndex) -> S {
        self.values[expert.zero_based()]
    }

    pub fn as_slice(&self) -> &[S] {
        &self.values
    }

    /// `p[1] - p[2]` for two-expert vectors.
    pub fn gap(&self) -> S {
        self.values[0] - self.values[1]
    }
}

/// 1-based expert index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExpertIndex(u32);

impl ExpertIndex {
    pub const FIRST: ExpertIndex = ExpertIndex(1);
    pub const SECOND: ExpertIndex = ExpertIndex(2);

    pub fn new(index: usize, experts: usize) -> Result<Self> {
        if index == 0 || index > experts {
            return invalid(format!("expert index {index} outside [1, {experts}]"));
        }
        Ok(Self(index as u32))
    }

    pub fn from_zero_based(i: usize) -> Self {
        Self(i as u32 + 1)
    }

    pub fn get(self) -> usize {
        self.0 as usize
    }

    pub fn zero_based(self) -> usize {
        self.0 as usize - 1
    }
}

impl fmt::Display for ExpertIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Running per-expert payoff sums.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativePayoff<S> {
    totals: Vec<S>,
    updates: usize,
}

impl<S: Scalar> CumulativePayoff<S> {
    pub fn zeros(n: usize) -> Self {
        Self { totals: vec![S::zero(); n], updates: 0 }
    }

    pub fn add(&mut self, p: &PayoffVector<S>) -> Result<()> {
        if p.len() != self.totals.len() {
            return invalid(format!(
                "payoff dimension {} does not match cumulative dimension {}",
                p.len(),
                self.totals.len()
            ));
        }
        for (t, v) in self.totals.iter_mut().zip(p.as_slice()) {
            *t = *t + *v;
        }
        self.updates += 1;
        Ok(())
    }

    pub fn merge(&mut self, other: &CumulativePayoff<S>) {
        for (t, v) in self.totals.iter_mut().zip(&other.totals) {
            *t = *t + *v;
        }
        self.updates += other.updates;
    }

    pub fn as_slice(&self) -> &[S] {
        &self.totals
    }

    pub fn len(&self) -> usize {
        self.totals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.totals.is_empty()
    }

    pub fn updates(&self) -> usize {
        self.updates
    }

    pub fn gap(&self) -> S {
        self.totals[0] - self.totals[1]
    }
}

/// Exact message count of a run. Each message carries at most `experts` reals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CommLedger {
    pub messages: u64,
    pub reals_sent: u64,
    experts: usize,
}

impl CommLedger {
    pub fn new(experts: usize) -> Self {
        Self { messages: 0, reals_sent: 0, experts }
    }

    /// Records `count` messages carrying `reals_each` reals apiece.
    pub fn record(&mut self, count: u64, reals_each: usize) {
        assert!(
            reals_each <= self.experts,
            "message of {reals_each} reals exceeds the {}-real cap",
            self.experts
        );
        self.messages += count;
        self.reals_sent += count * reals_each as u64;
    }

    pub fn experts(&self) -> usize {
        self.experts
    }

    pub fn absorb(&mut self, other: &CommLedger) {
        self.messages += other.messages;
        self.reals_sent += other.reals_sent;
        self.experts = self.experts.max(other.experts);
    }
}

/// Regret decomposition of one payoff/action sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegretSummary<S> {
    pub regret: S,
    pub best_expert_payoff: S,
    pub best_expert: ExpertIndex,
    pub algorithm_payoff: S,
    pub rounds: usize,
}

/// Online regret bookkeeping. Sums accumulate in round order, so a replay of
/// the same sequence through [`compute_regret`] is bit-identical.
#[derive(Debug, Clone)]
pub struct RegretAccumulator<S> {
    column_sums: Vec<S>,
    algorithm_payoff: S,
    rounds: usize,
}

impl<S: Scalar> RegretAccumulator<S> {
    pub fn new(experts: usize) -> Self {
        Self { column_sums: vec![S::zero(); experts], algorithm_payoff: S::zero(), rounds: 0 }
    }

    pub fn push(&mut self, p: &PayoffVector<S>, action: ExpertIndex) -> Result<()> {
        if p.len() != self.column_sums.len() {
            return invalid(format!(
                "payoff dimension {} does not match {} experts",
                p.len(),
                self.column_sums.len()
            ));
        }
        if action.get() > p.len() {
            return invalid(format!("action {action} outside [1, {}]", p.len()));
        }
        for (c, v) in self.column_sums.iter_mut().zip(p.as_slice()) {
            *c = *c + *v;
        }
        self.algorithm_payoff = self.algorithm_payoff + p.get(action);
        self.rounds += 1;
        Ok(())
    }

    pub fn column_sums(&self) -> &[S] {
        &self.column_sums
    }

    pub fn finish(&self) -> RegretSummary<S> {
        // ties go to the lowest index
        let mut best = 0;
        for (i, v) in self.column_sums.iter().enumerate() {
            if *v > self.column_sums[best] {
                best = i;
            }
        }
        let best_expert_payoff = self.column_sums[best];
        RegretSummary {
            regret: best_expert_payoff - self.algorithm_payoff,
            best_expert_payoff,
            best_expert: ExpertIndex::from_zero_based(best),
            algorithm_payoff: self.algorithm_payoff,
            rounds: self.rounds,
        }
    }
}

/// Outcome of one simulated run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult<S> {
    pub regret: S,
    pub best_expert_payoff: S,
    pub algorithm_payoff: S,
    pub ledger: CommLedger,
    pub seed: u64,
}

impl<S: Scalar> RunResult<S> {
    pub fn from_summary(summary: &RegretSummary<S>, ledger: CommLedger, seed: u64) -> Self {
        Self {
            regret: summary.regret,
            best_expert_payoff: summary.best_expert_payoff,
            algorithm_payoff: summary.algorithm_payoff,
            ledger,
            seed,
        }
    }
}

/// `M(v)`: expert 1 iff `v[1] > v[2]` strictly, otherwise expert 2.
pub fn argmax_selector<S: Scalar>(v: &[S]) -> Result<ExpertIndex> {
    if v.len() != 2 {
        return Err(Error::UnsupportedArity { expected: 2, got: v.len() });
    }
    if !v[0].is_finite() || !v[1].is_finite() {
        return invalid(format!("selector input must be finite, got ({}, {})", v[0], v[1]));
    }
    Ok(if v[0] > v[1] { ExpertIndex::FIRST } else { ExpertIndex::SECOND })
}

/// Regret of playing `actions` against `payoffs`: the best column sum minus
/// the payoff collected. May be negative.
pub fn compute_regret<S: Scalar>(payoffs: &[PayoffVector<S>], actions: &[ExpertIndex]) -> Result<RegretSummary<S>> {
    if payoffs.len() != actions.len() {
        return invalid(format!("{} payoff vectors but {} actions", payoffs.len(), actions.len()));
    }
    if payoffs.is_empty() {
        return invalid("regret needs at least one round");
    }
    let mut acc = RegretAccumulator::new(payoffs[0].len());
    for (p, a) in payoffs.iter().zip(actions) {
        acc.push(p, *a)?;
    }
    Ok(acc.finish())
}

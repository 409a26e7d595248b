use crate::domain::{ExpertIndex, PayoffVector};
use crate::error::{invalid, Error, Result};
use crate::rng::RngStream;
use crate::scalar::Scalar;

/// Exponentially weighted forecaster over payoffs (weights grow with payoff).
///
/// Weights are held in the log domain and shifted so the largest is zero
/// after every update.
#[derive(Debug, Clone)]
pub struct EwfState<S> {
    log_weights: Vec<S>,
    learning_rate: S,
}

impl<S: Scalar> EwfState<S> {
    pub fn new(experts: usize, learning_rate: S) -> Result<Self> {
        Self::from_weights(vec![S::one(); experts], learning_rate)
    }

    pub fn from_weights(weights: Vec<S>, learning_rate: S) -> Result<Self> {
        if weights.len() < 2 {
            return invalid(format!("EWF needs at least 2 experts, got {}", weights.len()));
        }
        if !(learning_rate > S::zero()) || !learning_rate.is_finite() {
            return invalid(format!("learning rate must be positive, got {learning_rate}"));
        }
        if weights.iter().any(|w| !(*w > S::zero()) || !w.is_finite()) {
            return invalid("EWF weights must be positive and finite");
        }
        let mut state = Self { log_weights: weights.iter().map(|w| w.ln()).collect(), learning_rate };
        state.renormalize();
        Ok(state)
    }

    /// `sqrt(8 ln(n) p / T)`: the Hedge tuning for `T` rounds, scaled by the
    /// square root of the sampling probability `p` because each sampled
    /// payoff enters with importance weight `1/p`.
    pub fn default_learning_rate(experts: usize, horizon: usize, sample_probability: f64) -> S {
        let n = experts.max(2) as f64;
        S::lit((8.0 * n.ln() * sample_probability / horizon.max(1) as f64).sqrt())
    }

    pub fn learning_rate(&self) -> S {
        self.learning_rate
    }

    pub fn experts(&self) -> usize {
        self.log_weights.len()
    }

    /// Weights scaled so the largest equals one.
    pub fn weights(&self) -> Vec<S> {
        self.log_weights.iter().map(|l| l.exp().max(S::min_positive_value())).collect()
    }

    pub fn probabilities(&self) -> Vec<S> {
        let w: Vec<S> = self.log_weights.iter().map(|l| l.exp()).collect();
        let total: S = w.iter().copied().sum();
        w.into_iter().map(|x| x / total).collect()
    }

    pub fn choose(&self, rng: &mut RngStream) -> ExpertIndex {
        let probs = self.probabilities();
        let u = S::lit(rng.unit());
        let mut acc = S::zero();
        for (i, p) in probs.iter().enumerate() {
            acc = acc + *p;
            if u < acc {
                return ExpertIndex::from_zero_based(i);
            }
        }
        // rounding left a sliver above the last cumulative mass
        let last = probs.iter().rposition(|p| *p > S::zero()).unwrap_or(probs.len() - 1);
        ExpertIndex::from_zero_based(last)
    }

    /// Multiplies `weight[a]` by `exp(learning_rate * importance_weight * p[a])`.
    pub fn update(&mut self, p: &PayoffVector<S>, importance_weight: S) -> Result<()> {
        if p.len() != self.log_weights.len() {
            return invalid(format!("payoff dimension {} does not match {} experts", p.len(), self.log_weights.len()));
        }
        if !(importance_weight >= S::one()) {
            return invalid(format!("importance weight must be at least 1, got {importance_weight}"));
        }
        let scale = self.learning_rate * importance_weight;
        for (l, v) in self.log_weights.iter_mut().zip(p.as_slice()) {
            *l = *l + scale * *v;
        }
        if self.log_weights.iter().any(|l| !l.is_finite()) {
            return Err(Error::Overflow(format!("EWF log-weights left the finite range (scale {scale})")));
        }
        self.renormalize();
        Ok(())
    }

    fn renormalize(&mut self) {
        let max = self.log_weights.iter().copied().fold(S::neg_infinity(), S::max);
        for l in self.log_weights.iter_mut() {
            *l = *l - max;
        }
    }
}

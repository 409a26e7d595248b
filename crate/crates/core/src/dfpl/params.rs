use std::fmt;

use crate::error::{invalid, Result};
use crate::rng::RngStream;
use crate::scalar::Scalar;

/// Block structure and noise levels of one DFPL instance.
#[derive(Debug, Clone, PartialEq)]
pub struct DfplParams<S> {
    pub horizon: usize,
    pub block_len: usize,
    /// Block-phase noise.
    pub eta: S,
    /// Step-phase noise, `sqrt(block_len)`.
    pub eta_prime: S,
    /// Probability that a block runs in the step phase, clamped to `[0, 1]`.
    pub step_probability: S,
    pub blocks: usize,
    raw_step_probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParamWarning {
    /// `T < 2 k^2.3`: the regret guarantee's regime does not apply.
    OutsideRegime { horizon: usize, sites: usize, required: f64 },
    /// `2 ell^3 T^2 / eta^5` exceeded one.
    StepProbabilityClamped { raw: f64 },
    /// No divisor of `T` lies near `k^(1+eps)`; only `used` steps fill whole blocks.
    HorizonTruncated { requested: usize, used: usize, block_len: usize },
}

impl fmt::Display for ParamWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamWarning::OutsideRegime { horizon, sites, required } => {
                write!(f, "T={horizon} is below 2k^2.3={required:.1} for k={sites}")
            }
            ParamWarning::StepProbabilityClamped { raw } => write!(f, "step probability {raw:.4} clamped to 1"),
            ParamWarning::HorizonTruncated { requested, used, block_len } => write!(
                f,
                "no block length near the target divides T={requested}; using ell={block_len} over T={used}"
            ),
        }
    }
}

/// Parameters together with any warnings raised while deriving them.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedParams<S> {
    pub params: DfplParams<S>,
    pub warnings: Vec<ParamWarning>,
}

impl<S: Scalar> DfplParams<S> {
    /// `b = T/ell`, `eta' = sqrt(ell)`, `q = min(1, 2 ell^3 T^2 / eta^5)`.
    pub fn new(horizon: usize, block_len: usize, eta: S) -> Result<Self> {
        if block_len == 0 {
            return invalid("block length must be positive");
        }
        if horizon < block_len {
            return invalid(format!("horizon {horizon} is shorter than one block of {block_len}"));
        }
        if !horizon.is_multiple_of(block_len) {
            return invalid(format!("block length {block_len} does not divide horizon {horizon}"));
        }
        if !(eta > S::zero()) || !eta.is_finite() {
            return invalid(format!("block noise must be positive, got {eta}"));
        }
        let ell = block_len as f64;
        let t = horizon as f64;
        let raw = 2.0 * ell.powi(3) * t * t / eta.as_f64().powi(5);
        Ok(Self {
            horizon,
            block_len,
            eta,
            eta_prime: S::lit(ell.sqrt()),
            step_probability: S::lit(raw.clamp(0.0, 1.0)),
            blocks: horizon / block_len,
            raw_step_probability: raw,
        })
    }

    /// The tuned block noise `ell^(5/12) T^(1/2)`.
    pub fn with_tuned_noise(horizon: usize, block_len: usize) -> Result<Self> {
        let eta = (block_len as f64).powf(5.0 / 12.0) * (horizon as f64).sqrt();
        Self::new(horizon, block_len, S::lit(eta))
    }

    /// Overrides the step-phase probability (tests and ablations).
    pub fn with_step_probability(mut self, q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return invalid(format!("step probability {q} outside [0, 1]"));
        }
        self.step_probability = S::lit(q);
        self.raw_step_probability = q;
        Ok(self)
    }

    /// `ell = k^(1+eps)` lowered to a divisor of `T`, with tuned noise.
    pub fn derive(horizon: usize, sites: usize, epsilon: f64) -> Result<DerivedParams<S>> {
        if !(epsilon > 0.0 && epsilon < 0.2) {
            return invalid(format!("epsilon must lie in (0, 1/5), got {epsilon}"));
        }
        if sites < 2 {
            return invalid(format!("DFPL needs at least 2 sites, got {sites}"));
        }
        let mut warnings = Vec::new();
        let required = 2.0 * (sites as f64).powf(2.3);
        if (horizon as f64) < required {
            warnings.push(ParamWarning::OutsideRegime { horizon, sites, required });
        }
        let target = (sites as f64).powf(1.0 + epsilon);
        let max_len = (target.floor() as usize).max(1);
        if horizon < max_len {
            return invalid(format!("horizon {horizon} is shorter than the block length {max_len}"));
        }
        let min_len = ((0.75 * target).ceil() as usize).max(1);
        let divisor = (min_len..=max_len).rev().find(|d| horizon.is_multiple_of(*d));
        let (block_len, used) = match divisor {
            Some(d) => (d, horizon),
            None => {
                let used = horizon - horizon % max_len;
                warnings.push(ParamWarning::HorizonTruncated { requested: horizon, used, block_len: max_len });
                (max_len, used)
            }
        };
        let params = Self::with_tuned_noise(used, block_len)?;
        if params.raw_step_probability > 1.0 {
            warnings.push(ParamWarning::StepProbabilityClamped { raw: params.raw_step_probability });
        }
        Ok(DerivedParams { params, warnings })
    }

    /// `2 ell^3 T^2 / eta^5` before clamping.
    pub fn raw_step_probability(&self) -> f64 {
        self.raw_step_probability
    }

    /// Expected messages over a full run with `sites` sites: `2k` per block
    /// plus two per step-phase step.
    pub fn expected_messages(&self, sites: usize) -> f64 {
        let b = self.blocks as f64;
        2.0 * sites as f64 * b + self.step_probability.as_f64() * b * 2.0 * self.block_len as f64
    }
}

/// Block lengths covering `horizon` steps. Without jitter every block has
/// `block_len` steps; with relative slack `s`, each length is drawn uniformly
/// from the integers in `[(1-s) ell, (1+s) ell]`. A trailing partial block
/// absorbs any remainder.
pub fn block_schedule(horizon: usize, block_len: usize, jitter: Option<(f64, &mut RngStream)>) -> Vec<usize> {
    let block_len = block_len.max(1);
    let mut lengths = Vec::with_capacity(horizon / block_len + 1);
    let mut covered = 0;
    let (lo, hi, mut rng) = match jitter {
        Some((slack, rng)) => {
            let lo = ((1.0 - slack) * block_len as f64).ceil().max(1.0) as usize;
            let hi = ((1.0 + slack) * block_len as f64).floor() as usize;
            if lo <= hi {
                (lo, hi, Some(rng))
            } else {
                (block_len, block_len, None)
            }
        }
        None => (block_len, block_len, None),
    };
    while covered < horizon {
        let len = match rng.as_deref_mut() {
            Some(r) if hi > lo => lo + r.index(hi - lo + 1),
            _ => lo,
        };
        let len = len.min(horizon - covered);
        lengths.push(len);
        covered += len;
    }
    lengths
}

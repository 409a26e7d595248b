//! Comparison algorithms: full and no communication, mini-batch syncing, a
//! threshold-counter forecaster and the label-efficient forecaster.

mod counter;
mod full;
mod lef;
mod minibatch;
mod none;

pub use counter::{stale_estimate_violations, ApproxCounterState, BlockSnapshotState, CounterForecaster, StaleReport};
pub use full::FullCommunication;
pub use lef::{LabelEfficient, LefConfig, LefForecaster};
pub use minibatch::MiniBatch;
pub use none::NoCommunication;

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// Noise scale `sqrt(T)` shared by the FPL-based baselines.
pub fn sqrt_horizon_noise<S: Scalar>(horizon: usize) -> Result<S> {
    if horizon == 0 {
        return invalid("horizon must be positive");
    }
    Ok(S::lit((horizon as f64).sqrt()))
}

fn check_shape(sites: usize, experts: usize) -> Result<()> {
    if sites == 0 {
        return invalid("at least one site is required");
    }
    if experts != 2 {
        return Err(Error::UnsupportedArity { expected: 2, got: experts });
    }
    Ok(())
}

fn check_payoff<S: Scalar>(p: &crate::domain::PayoffVector<S>) -> Result<S> {
    if p.len() != 2 {
        return Err(Error::UnsupportedArity { expected: 2, got: p.len() });
    }
    Ok(p.gap())
}

//! Simulator for distributed prediction with expert advice over a star
//! network of `k` sites and one coordinator.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix it to `f64`.
//!
//! ```
//! use distexp::{AdversarySpec, AlgorithmSpec, RunOptions};
//!
//! let opts = RunOptions::new(1000, 4, 2);
//! let trace = distexp::run_once::<f64>(&AlgorithmSpec::Full, &AdversarySpec::markov(10.0), &opts, 7).unwrap();
//! assert_eq!(trace.result.ledger.messages, 2000);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adversaries;
pub mod baselines;
pub mod dfpl;
pub mod domain;
pub mod error;
pub mod forecasters;
pub mod protocol;
pub mod rng;
pub mod scalar;
pub mod simulator;

pub use adversaries::{Adversary, AdversaryKind, AdversarySpec, Query, SiteAllocation};
pub use domain::{argmax_selector, compute_regret, CommLedger, CumulativePayoff, ExpertIndex, RegretSummary};
pub use error::{Error, Result};
pub use protocol::{Channel, CommObservation, ModelKind, Network, Protocol, StarChannel};
pub use rng::{RngStream, StreamId};
pub use scalar::Scalar;
pub use simulator::{
    run_batch, run_once, worst_case_sweep, AlgorithmSpec, BatchSummary, ExperimentConfig, JitterConfig, RunOptions,
};

pub type PayoffVector = domain::PayoffVector<f64>;
pub type RunResult = domain::RunResult<f64>;
pub type RunTrace = simulator::RunTrace<f64>;
pub type FplState = forecasters::FplState<f64>;
pub type EwfState = forecasters::EwfState<f64>;
pub type DfplParams = dfpl::DfplParams<f64>;
pub type DfplState = dfpl::DfplState<f64>;

pub type PayoffVectorF32 = domain::PayoffVector<f32>;
pub type RunResultF32 = domain::RunResult<f32>;

//! Event loop, algorithm construction and batch aggregation.

mod algorithm;
mod batch;
mod run;

pub use algorithm::{AlgorithmSpec, BuiltAlgorithm};
pub use batch::{
    calibrate_knob, run_batch, worst_case_sweep, BatchSummary, Calibration, ExperimentConfig, SeedRow, SweepPoint,
    WorstCase,
};
pub use run::{run_once, run_with_network, JitterConfig, RunOptions, RunTrace, StepRecord};

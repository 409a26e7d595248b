//! Distributed follow the perturbed leader.
//!
//! Time is cut into blocks of length `ell`. Each block independently runs, with
//! probability `q`, a *step phase* (a fresh FPL with noise `sqrt(ell)`,
//! synchronised after every step) and otherwise a *block phase* (one perturbed
//! leader over block-level totals, played for the whole block and synchronised
//! only at block boundaries). More than two experts are handled by a balanced
//! tree of two-expert instances.

mod params;
mod state;
mod tree;

pub use params::{block_schedule, DerivedParams, DfplParams, ParamWarning};
pub use state::{BlockEvent, DfplState, Phase};
pub use tree::{DfplProtocol, MetaTree};

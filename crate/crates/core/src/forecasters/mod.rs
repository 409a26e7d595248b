//! Non-distributed building blocks: follow the perturbed leader, the
//! exponentially weighted forecaster, and FPL's closed-form choice law.

mod ewf;
mod fpl;
mod transform;

pub use ewf::EwfState;
pub use fpl::{perturbed_choice, FplState};
pub use transform::{difference_transform, fpl_choice_probability};

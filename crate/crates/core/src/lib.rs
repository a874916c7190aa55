//! Preferential attachment with location-ranked choice.
//!
//! Each new vertex draws `r` existing vertices with probability proportional
//! to `degree + alpha`, orders them by their location in `[0, 1]`, and joins
//! the one at rank `k` with probability `xi_k`. The crate provides the
//! simulator ([`graph`], [`trajectory`]), the drift kernels ([`choice`]),
//! root and phase analysis ([`roots`], [`phase`]) and the diagnostics that
//! connect the two ([`harness`], [`figures`]).

pub mod choice;
pub mod error;
pub mod figures;
pub mod graph;
pub mod harness;
pub mod model;
pub mod parallel;
pub mod phase;
pub mod roots;
pub mod trajectory;
pub mod weights;

pub use choice::ChoiceVector;
pub use error::{Error, Result};
pub use graph::GraphState;
pub use model::{CheckpointSchedule, InitialLocations, ModelConfig};
pub use phase::{condensation_predict, PhaseReport};
pub use trajectory::{run, Trajectory};

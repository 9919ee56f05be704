//! Simulation of an atom crossing a two-mode cavity with a time-dependent
//! atom-cavity detuning, and analysis of the resulting interference fringes.
//!
//! The state space is the eight-dimensional product of a two-level atom and
//! two cavity modes truncated at one photon each. Three detuning models are
//! available: an instantaneous switch between the modes, a finite smooth
//! switch, and a finite switch with an effective coupling between the modes.

// `!(x >= y)` is used on purpose so NaN inputs are rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod linalg;
pub mod propagators;
pub mod pulse;
pub mod sequences;

pub use analysis::{
    fit_cosine, sample_probability, sweep_switch_time, unwrap_phase, FitModel, FitResult, Interval,
    SweepRow,
};
pub use error::{Error, Result};
pub use linalg::{compose, BasisLabel, Propagator, StateVector, C64};
pub use propagators::{OdeSettings, RabiFunctions};
pub use pulse::{
    DetuningProfile, ExperimentParams, Model, ProfileShape, SwitchFunctions, SwitchShape,
    WindowFrame,
};
pub use sequences::{ideal_probability, run_full, run_source, Experiment, SequenceResult};

//! Kerr evolution with phase diffusion on a truncated Fock space.
//!
//! The crate integrates the Lindblad master equation for three model
//! presets (pure Kerr, Kerr with phase diffusion, Kerr with zero-temperature
//! damping), evaluates exact moments used as numerical oracles, and provides
//! the cat-state diagnostics and experiment recipes that the `kerrcat` CLI
//! exposes.

pub mod closed_forms;
pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod fock;
pub mod models;
pub mod propagator;

pub use error::{KerrError, Result};
pub use fock::{
    annihilation_op, coherent_state, creation_op, expectation, fidelity_pure, number_op, ys_state,
    DensityMatrix, Moments, Operator, StateVector, TruncatedFockSpace, TruncationWarning, C64,
};
pub use models::{generator_apply, preset, Channel, ChannelKind, FeedbackGain, ModelSpec, Preset};
pub use propagator::{evolve, evolve_observed, step, IntegrationPlan, SampleRecord, Trajectory};

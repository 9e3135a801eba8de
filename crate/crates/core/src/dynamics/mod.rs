//! Event-driven evolution of the infection process.
//!
//! Every particle carries its own walk clock and, under a finite recovery
//! rate, its own mark clock. Events are processed in `(time, particle id,
//! kind)` order; after each one the active infection rule and, for `λ = ∞`,
//! the recover-when-alone closure are applied.

mod path;
mod state;
mod trace;
mod trial;

pub use path::{sample_recovery_marks, MarkClock, RecoveryMarks, Trajectory, WalkClock};
pub use state::{
    initial_state, EventKind, ProcessParams, Recovery, SimState, StepInfo, Variant, MAX_HORIZON,
};
pub use trace::{
    record_trace, sample_cloud_trace, wander_margin, ParticleTrace, SpaceTimeWindow, TraceSet,
};
pub use trial::{run_trial, TrialOutcome};

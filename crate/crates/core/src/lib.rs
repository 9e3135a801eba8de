//! Simulation and renormalization toolkit for infection with recovery on a
//! Poisson cloud of continuous-time random walkers on the integer lattice.
//!
//! * [`model`] and [`rng`]: lattice, particle labels, Poisson initial data and
//!   keyed random streams.
//! * [`dynamics`]: the event-driven process, trials and trajectory traces.
//! * [`coupling`]: shared-randomness couplings in density and recovery regime.
//! * [`tessellation`]: cells, super cells and the base-height indexing.
//! * [`cell_events`]: acceptable and good cells, good points, closed-form bounds.
//! * [`surface`]: Lipschitz surface extraction from cell-event fields.
//! * [`harness`]: Monte Carlo estimators, sweeps, thinning checks, manifests.
//! * [`cli`]: the `latticefire` command line.

pub mod error;
pub mod lattice;
pub mod model;
pub mod rng;
pub mod stats;
pub mod dynamics;
pub mod coupling;
pub mod tessellation;
pub mod cell_events;
pub mod surface;
pub mod harness;
pub mod cli;

pub use error::{Error, Result};
pub use lattice::{Boundary, LatticeDomain, Site, MAX_DIM};
pub use model::{dominance_check, sample_initial_configuration, Configuration, ParticleId};
pub use rng::{make_stream, Purpose, RngStream};

use super::state::{initial_state, ProcessParams, SimState};
use crate::error::Result;

/// Summary of one horizon-truncated trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    /// First time the infected count hit zero.
    pub extinct_at: Option<f64>,
    pub survived_to_horizon: bool,
    /// Disjoint, sorted intervals during which the origin hosted an infected particle.
    pub origin_infected_intervals: Vec<(f64, f64)>,
    pub boundary_contaminated: bool,
    pub events: u64,
    pub final_infected: usize,
}

impl TrialOutcome {
    pub fn from_state(st: &SimState) -> Self {
        TrialOutcome {
            extinct_at: st.extinct_at(),
            survived_to_horizon: st.extinct_at().is_none(),
            origin_infected_intervals: st.origin_intervals(),
            boundary_contaminated: st.boundary_contaminated(),
            events: st.events_processed(),
            final_infected: st.num_infected(),
        }
    }

    /// Number of separate origin-infection episodes.
    pub fn origin_visits(&self) -> usize {
        self.origin_infected_intervals.len()
    }
}

/// Run one trial to its horizon, stopping early once the infection is extinct.
/// A deterministic function of `(params, seed)`.
pub fn run_trial(params: &ProcessParams, seed: u64) -> Result<TrialOutcome> {
    let mut st = initial_state(params, seed)?;
    let horizon = params.horizon;
    while st.extinct_at().is_none() {
        if st.step(horizon)?.is_none() {
            break;
        }
    }
    if st.extinct_at().is_none() {
        st.evolve(horizon)?;
    }
    Ok(TrialOutcome::from_state(&st))
}

//! Monte Carlo orchestration: survival and local-survival estimators,
//! phase-plane sweeps, the thinning verifier and run manifests.

mod cells;
mod manifest;
mod sweep;
mod thinning;

pub use cells::{CellEvent, CellFieldSpec, EventFields};
pub use manifest::Manifest;
pub use sweep::{record_errors, sweep, write_sweep_csv, SweepRow, SweepSpec, SWEEP_HEADER};
pub use thinning::{
    e_tilde_failure_frequency, good_point_frequency, point_counts, verify_thinning, CountFit, ThinningReport,
};

pub use crate::stats::Estimate;

use rayon::prelude::*;

use crate::dynamics::{run_trial, ProcessParams, Recovery, TrialOutcome, Variant};
use crate::error::{param, Error, Result};
use crate::lattice::{Boundary, LatticeDomain};
use crate::rng::derive_seed;

/// Everything that determines a batch of trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentSpec {
    pub d: usize,
    /// Side `L` of the observed box (or of the torus).
    pub side: u32,
    pub boundary: Boundary,
    /// Halo width; `None` uses the default `ceil(4 · horizon)`.
    pub halo_margin: Option<u32>,
    pub rho: f64,
    /// `0`, a positive rate, or `inf`.
    pub lambda: f64,
    pub variant: Variant,
    pub horizon: f64,
    pub replicas: u64,
    pub seed: u64,
    /// Origin-infection episodes required for the local-survival proxy.
    pub k_visits: usize,
    /// Drop replicas whose infection reached the halo shell.
    pub strict_boundary: bool,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            d: 1,
            side: 64,
            boundary: Boundary::Halo,
            halo_margin: None,
            rho: 1.0,
            lambda: 0.0,
            variant: Variant::InstantaneousContact,
            horizon: 100.0,
            replicas: 100,
            seed: 1,
            k_visits: 5,
            strict_boundary: false,
        }
    }
}

impl ExperimentSpec {
    pub fn domain(&self) -> Result<LatticeDomain> {
        match self.boundary {
            Boundary::Periodic => LatticeDomain::periodic(self.d, self.side),
            Boundary::Halo => LatticeDomain::halo(
                self.d,
                self.side,
                self.halo_margin.unwrap_or_else(|| LatticeDomain::default_margin(self.horizon)),
            ),
        }
    }

    pub fn params(&self) -> Result<ProcessParams> {
        if self.replicas == 0 {
            return param("at least one replica is required");
        }
        if !(self.horizon > 0.0) {
            return param(format!("horizon must be positive, got {}", self.horizon));
        }
        let p = ProcessParams {
            rho: self.rho,
            recovery: Recovery::from_lambda(self.lambda)?,
            variant: self.variant,
            domain: self.domain()?,
            horizon: self.horizon,
        };
        p.validate()?;
        Ok(p)
    }

    /// Seed of replica `r`. It does not depend on `rho` or `lambda`, so runs
    /// at different grid points are coupled replica by replica.
    pub fn replica_seed(&self, r: u64) -> u64 {
        derive_seed(self.seed, &[r as i64])
    }

    /// Flat key-value description for manifests.
    pub fn describe(&self, m: &mut Manifest) {
        m.push("d", self.d);
        m.push("L", self.side);
        m.push("boundary", boundary_name(self.boundary));
        m.push(
            "halo_margin",
            self.domain().map(|dm| dm.halo_margin.to_string()).unwrap_or_else(|_| "invalid".into()),
        );
        m.push("rho", self.rho);
        m.push("lambda", self.lambda);
        m.push("variant", variant_name(self.variant));
        m.push("horizon", self.horizon);
        m.push("replicas", self.replicas);
        m.push("seed", self.seed);
        m.push("k_visits", self.k_visits);
        m.push("strict_boundary", self.strict_boundary);
    }
}

pub fn variant_name(v: Variant) -> &'static str {
    match v {
        Variant::InstantaneousContact => "contact",
        Variant::JumpTime => "jump",
    }
}

pub fn boundary_name(b: Boundary) -> &'static str {
    match b {
        Boundary::Halo => "halo",
        Boundary::Periodic => "periodic",
    }
}

/// Run every replica of `spec` in parallel; results come back in replica order.
pub fn run_replicas(spec: &ExperimentSpec) -> Result<Vec<TrialOutcome>> {
    let params = spec.params()?;
    (0..spec.replicas)
        .into_par_iter()
        .map(|r| run_trial(&params, spec.replica_seed(r)))
        .collect()
}

/// Survival and conditional local-survival estimates from one batch.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimates {
    pub survival: Estimate,
    /// `None` when no replica survived.
    pub local_given_survival: Option<Estimate>,
}

/// Summarize outcomes, honoring the strict-boundary setting.
pub fn summarize(spec: &ExperimentSpec, outcomes: &[TrialOutcome]) -> Result<Estimates> {
    let flagged = outcomes.iter().filter(|o| o.boundary_contaminated).count() as u64;
    let kept: Vec<&TrialOutcome> = outcomes
        .iter()
        .filter(|o| !(spec.strict_boundary && o.boundary_contaminated))
        .collect();
    if kept.is_empty() {
        return Err(Error::Estimation("no replicas left after excluding contaminated runs".into()));
    }
    let survivors: Vec<&&TrialOutcome> = kept.iter().filter(|o| o.survived_to_horizon).collect();
    let mut survival = Estimate::from_counts(survivors.len() as u64, kept.len() as u64);
    survival.flagged = flagged;
    let local_given_survival = (!survivors.is_empty()).then(|| {
        let local = survivors.iter().filter(|o| o.origin_visits() >= spec.k_visits).count();
        let mut e = Estimate::from_counts(local as u64, survivors.len() as u64);
        e.flagged = survivors.iter().filter(|o| o.boundary_contaminated).count() as u64;
        e
    });
    Ok(Estimates {
        survival,
        local_given_survival,
    })
}

pub fn estimate(spec: &ExperimentSpec) -> Result<Estimates> {
    summarize(spec, &run_replicas(spec)?)
}

/// Fraction of replicas with infected particles at the horizon.
pub fn estimate_survival(spec: &ExperimentSpec) -> Result<Estimate> {
    Ok(estimate(spec)?.survival)
}

/// Among surviving replicas, the fraction whose origin hosted infection in at
/// least `k_visits` separate episodes.
pub fn estimate_local_survival(spec: &ExperimentSpec) -> Result<Estimate> {
    estimate(spec)?
        .local_given_survival
        .ok_or_else(|| Error::Estimation("no replica survived; the conditional estimate is undefined".into()))
}

#[cfg(test)]
mod tests;

//! Shared-randomness couplings.
//!
//! Both members of a pair are built from the same master seed. Walks and
//! recovery marks are keyed by particle label, so every particle present in
//! both states follows the same path and carries the same marks. Initial
//! occupancies come from a per-site Poisson process in the density variable
//! (see [`crate::model::site_occupancy`]), so the higher-density state holds
//! every particle of the lower-density one plus an independent Poisson
//! surplus.

use std::collections::BTreeSet;

use crate::dynamics::{initial_state, ProcessParams, Recovery, SimState, TrialOutcome};
use crate::error::{param, Result};
use crate::lattice::Site;
use crate::model::ParticleId;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CouplingKind {
    Density { rho: f64, rho_prime: f64 },
    Recovery { lambda: f64 },
}

/// What the lockstep run observed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CouplingReport {
    /// Distinct event times at which the pair was compared.
    pub checks: u64,
    /// Sites where the low state held more particles than the high state.
    pub dominance_violations: u64,
    /// Particles infected in the low state but healthy in the high state.
    pub containment_violations: u64,
    pub first_violation: Option<String>,
}

impl CouplingReport {
    pub fn holds(&self) -> bool {
        self.dominance_violations == 0 && self.containment_violations == 0
    }
}

/// A coupled pair after a lockstep run. For the recovery kind `low` is the
/// `λ = ∞` state and `high` the finite-`λ` one.
#[derive(Debug, Clone)]
pub struct CoupledPair {
    pub low: SimState,
    pub high: SimState,
    pub shared_seed: u64,
    pub kind: CouplingKind,
    pub report: CouplingReport,
}

impl CoupledPair {
    pub fn low_outcome(&self) -> TrialOutcome {
        TrialOutcome::from_state(&self.low)
    }

    pub fn high_outcome(&self) -> TrialOutcome {
        TrialOutcome::from_state(&self.high)
    }
}

/// Density coupling: `low` at `base.rho`, `high` at `rho_prime`, same seed.
pub fn coupled_density_run(base: &ProcessParams, rho_prime: f64, seed: u64) -> Result<CoupledPair> {
    if !(base.rho <= rho_prime) {
        return param(format!("need rho <= rho', got {} > {rho_prime}", base.rho));
    }
    let mut hi = *base;
    hi.rho = rho_prime;
    let low = initial_state(base, seed)?;
    let high = initial_state(&hi, seed)?;
    let kind = CouplingKind::Density {
        rho: base.rho,
        rho_prime,
    };
    run_lockstep(low, high, seed, kind, true)
}

/// Recovery coupling: the finite-`λ` process of `base` against the `λ = ∞`
/// process with the same walks, initial data and mark streams.
pub fn coupled_recovery_run(base: &ProcessParams, seed: u64) -> Result<CoupledPair> {
    let Recovery::Rate(lambda) = base.recovery else {
        return param("recovery coupling needs a finite positive recovery rate");
    };
    let mut inf = *base;
    inf.recovery = Recovery::Instantaneous;
    let low = initial_state(&inf, seed)?;
    let high = initial_state(base, seed)?;
    run_lockstep(low, high, seed, CouplingKind::Recovery { lambda }, false)
}

fn note(report: &mut CouplingReport, msg: impl FnOnce() -> String) {
    if report.first_violation.is_none() {
        report.first_violation = Some(msg());
    }
}

fn check_sites(low: &SimState, high: &SimState, sites: &BTreeSet<Site>, check_counts: bool, report: &mut CouplingReport) {
    for &x in sites {
        if check_counts && low.count_at(x) > high.count_at(x) {
            report.dominance_violations += 1;
            note(report, || {
                format!(
                    "t={}: site {x} holds {} > {}",
                    low.time(),
                    low.count_at(x),
                    high.count_at(x)
                )
            });
        }
        for id in low.particles_at(x) {
            if low.is_infected(&id) == Some(true) && high.is_infected(&id) != Some(true) {
                report.containment_violations += 1;
                note(report, || format!("t={}: {id:?} infected only in the low state", low.time()));
            }
        }
    }
}

fn full_check(low: &SimState, high: &SimState, check_counts: bool, report: &mut CouplingReport) {
    let mut sites: BTreeSet<Site> = low.configuration().counts.keys().copied().collect();
    sites.extend(high.configuration().counts.keys().copied());
    check_sites(low, high, &sites, check_counts, report);
    let hi_inf: BTreeSet<ParticleId> = high.infected_ids().into_iter().collect();
    for id in low.infected_ids() {
        if !hi_inf.contains(&id) {
            report.containment_violations += 1;
            note(report, || format!("t={}: {id:?} infected only in the low state", low.time()));
        }
    }
}

/// Advance both states through their merged event stream. Events sharing a
/// timestamp are processed in both states before the pair is compared.
fn run_lockstep(
    mut low: SimState,
    mut high: SimState,
    seed: u64,
    kind: CouplingKind,
    check_counts: bool,
) -> Result<CoupledPair> {
    let horizon = low.horizon();
    let mut report = CouplingReport::default();
    full_check(&low, &high, check_counts, &mut report);
    report.checks += 1;
    loop {
        let next = match (low.peek_time(), high.peek_time()) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (None, None) => break,
        };
        if next > horizon {
            break;
        }
        let mut touched = BTreeSet::new();
        while low.peek_time() == Some(next) {
            let info = low.step(horizon)?.expect("pending event");
            touched.insert(info.from);
            touched.insert(info.to);
        }
        while high.peek_time() == Some(next) {
            let info = high.step(horizon)?.expect("pending event");
            touched.insert(info.from);
            touched.insert(info.to);
        }
        check_sites(&low, &high, &touched, check_counts, &mut report);
        report.checks += 1;
    }
    low.evolve(horizon)?;
    high.evolve(horizon)?;
    full_check(&low, &high, check_counts, &mut report);
    Ok(CoupledPair {
        low,
        high,
        shared_seed: seed,
        kind,
        report,
    })
}

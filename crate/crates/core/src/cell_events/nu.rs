use rayon::prelude::*;

use crate::dynamics::{MarkClock, ParticleTrace, Recovery, RecoveryMarks, SpaceTimeWindow, TraceSet, WalkClock};
use crate::error::{param, Error, Result};
use crate::model::{site_occupancy, ParticleId};
use crate::rng::{derive_seed, make_stream, Purpose};
use crate::stats::Estimate;
use crate::tessellation::{displacement_in, RationalBox};

/// A particle needing this many proposals has empirical acceptance below
/// `1e-6`; estimation is aborted.
pub const MAX_REJECTION_ATTEMPTS: u64 = 1_000_000;

/// Conditioning for an event-probability estimate: density-`rho` particles
/// on the sites of `x`, each with displacement in `x_prime` over `[0, s]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NuSpec {
    pub rho: f64,
    pub lambda: Recovery,
    pub x: RationalBox,
    pub x_prime: RationalBox,
    pub s: f64,
    pub replicas: u64,
    pub seed: u64,
}

impl NuSpec {
    fn validate(&self) -> Result<()> {
        if !(self.rho.is_finite() && self.rho > 0.0) {
            return param(format!("density must be positive, got {}", self.rho));
        }
        if !(self.s.is_finite() && self.s >= 0.0) {
            return param(format!("time span must be non-negative, got {}", self.s));
        }
        if self.replicas == 0 {
            return param("at least one replica is required");
        }
        if self.x.d != self.x_prime.d {
            return param("regions have different dimensions");
        }
        if !self.x_prime.contains(crate::lattice::Site::ORIGIN) {
            return Err(Error::Rejection(
                "the displacement region excludes 0, so no path can be accepted".into(),
            ));
        }
        Ok(())
    }
}

/// One conditioned sample: every particle is redrawn from fresh walk streams
/// until its displacement stays in `x_prime`.
fn conditioned_trace(spec: &NuSpec, replica: u64) -> Result<TraceSet> {
    let d = spec.x.d;
    let seed = derive_seed(spec.seed, &[replica as i64]);
    let (lo, hi) = spec.x.integer_hull();
    let mut particles = Vec::new();
    for x in spec.x.sites() {
        for n in 1..=site_occupancy(seed, x, d, spec.rho) {
            let id = ParticleId::new(x, n);
            let mut key = id.key(d);
            key.push(0);
            let mut attempt = 0u64;
            let path = loop {
                *key.last_mut().unwrap() = attempt as i64;
                let path = WalkClock::new(make_stream(seed, Purpose::Walk, &key), d).trajectory(None, x, 0.0, spec.s);
                if displacement_in(&path, 0.0, spec.s, &spec.x_prime)? {
                    break path;
                }
                attempt += 1;
                if attempt >= MAX_REJECTION_ATTEMPTS {
                    return Err(Error::Rejection(format!(
                        "particle {:?} rejected {attempt} times (acceptance below 1e-6) in replica {replica}",
                        x.coords(d)
                    )));
                }
            };
            let marks = match spec.lambda {
                Recovery::Rate(l) => MarkClock::for_particle(seed, &id, d, l).marks_until(spec.s),
                _ => RecoveryMarks::default(),
            };
            particles.push(ParticleTrace { id, path, marks });
        }
    }
    Ok(TraceSet {
        window: SpaceTimeWindow::new(d, &lo.0[..d], &hi.0[..d], 0.0, spec.s),
        particles,
    })
}

/// Monte Carlo estimate of the probability that `event` holds under the
/// conditioned law of `spec`. Replicas run in parallel; the result does not
/// depend on the number of threads.
pub fn estimate_nu_e<F>(event: F, spec: &NuSpec) -> Result<Estimate>
where
    F: Fn(&TraceSet) -> Result<bool> + Sync,
{
    spec.validate()?;
    let outcomes: Vec<Result<bool>> = (0..spec.replicas)
        .into_par_iter()
        .map(|r| event(&conditioned_trace(spec, r)?))
        .collect();
    let mut hits = 0u64;
    for o in outcomes {
        hits += u64::from(o?);
    }
    Ok(Estimate::from_counts(hits, spec.replicas))
}

//! Particle identities, configurations and the Poisson initial condition.

use std::collections::BTreeMap;

use crate::error::{param, Error, Result};
use crate::lattice::{LatticeDomain, Site};
use crate::rng::{make_stream, Purpose};

/// Label `(x, n)`: the `n`-th particle that started at site `x` (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParticleId {
    pub origin: Site,
    pub index: u32,
}

impl ParticleId {
    pub fn new(origin: Site, index: u32) -> Self {
        ParticleId { origin, index }
    }

    /// Key words used for this particle's walk and recovery streams.
    pub fn key(&self, d: usize) -> Vec<i64> {
        let mut k: Vec<i64> = self.origin.key_words(d).collect();
        k.push(self.index as i64);
        k
    }
}

/// Occupancy snapshot: particle counts and infected counts per site.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    pub domain: LatticeDomain,
    pub time: f64,
    pub counts: BTreeMap<Site, u32>,
    pub infected: BTreeMap<Site, u32>,
}

impl Configuration {
    pub fn empty(domain: LatticeDomain, time: f64) -> Self {
        Configuration {
            domain,
            time,
            counts: BTreeMap::new(),
            infected: BTreeMap::new(),
        }
    }

    pub fn count(&self, x: Site) -> u32 {
        self.counts.get(&x).copied().unwrap_or(0)
    }

    pub fn infected_at(&self, x: Site) -> u32 {
        self.infected.get(&x).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().map(|&c| c as u64).sum()
    }

    pub fn total_infected(&self) -> u64 {
        self.infected.values().map(|&c| c as u64).sum()
    }

    /// Checks `counts(x) >= infected(x)` everywhere.
    pub fn is_consistent(&self) -> bool {
        self.infected.iter().all(|(x, &i)| i <= self.count(*x))
    }

    /// Every site is either fully healthy or fully infected.
    pub fn is_site_pure(&self) -> bool {
        self.infected
            .iter()
            .all(|(x, &i)| i == 0 || i == self.count(*x))
    }
}

/// Number of particles at `site` under density `rho`.
///
/// Counts the points below `rho` of a unit-rate Poisson process drawn from the
/// site's initial stream. For a fixed seed the count is non-decreasing in
/// `rho`, and the increment between two densities is an independent Poisson
/// variable, so every density is coupled to every other one through the seed.
pub fn site_occupancy(master_seed: u64, site: Site, d: usize, rho: f64) -> u32 {
    let key: Vec<i64> = site.key_words(d).collect();
    let mut s = make_stream(master_seed, Purpose::Initial, &key);
    let mut acc = s.exp1();
    let mut n = 0;
    while acc <= rho {
        n += 1;
        acc += s.exp1();
    }
    n
}

fn check_rho(rho: f64) -> Result<()> {
    if !rho.is_finite() || rho <= 0.0 {
        return param(format!("density must be positive and finite, got {rho}"));
    }
    Ok(())
}

/// Particle labels of the initial cloud: Poisson(`rho`) per site of the
/// simulated region, plus the extra particle `(0, eta_0(0) + 1)` at the origin.
pub fn initial_particles(rho: f64, domain: &LatticeDomain, master_seed: u64) -> Result<Vec<ParticleId>> {
    check_rho(rho)?;
    let mut out = Vec::new();
    let mut origin_seen = false;
    for x in domain.sites() {
        let n = site_occupancy(master_seed, x, domain.d, rho);
        out.extend((1..=n).map(|k| ParticleId::new(x, k)));
        if x == Site::ORIGIN {
            out.push(ParticleId::new(x, n + 1));
            origin_seen = true;
        }
    }
    if !origin_seen {
        return Err(Error::Internal("origin outside the simulated region".into()));
    }
    Ok(out)
}

/// Time-zero configuration: Poisson(`rho`) counts, one extra particle at the
/// origin, every particle at the origin infected.
pub fn sample_initial_configuration(
    rho: f64,
    domain: &LatticeDomain,
    master_seed: u64,
) -> Result<Configuration> {
    let particles = initial_particles(rho, domain, master_seed)?;
    let mut cfg = Configuration::empty(*domain, 0.0);
    for p in &particles {
        *cfg.counts.entry(p.origin).or_insert(0) += 1;
    }
    let at_origin = cfg.count(Site::ORIGIN);
    cfg.infected.insert(Site::ORIGIN, at_origin);
    Ok(cfg)
}

/// `a ⪯ b`: pointwise `a.counts(x) <= b.counts(x)`.
pub fn dominance_check(a: &Configuration, b: &Configuration) -> Result<bool> {
    if a.domain != b.domain {
        return Err(Error::Comparison("configurations live on different domains".into()));
    }
    if a.time != b.time {
        return Err(Error::Comparison(format!(
            "configurations taken at different times ({} vs {})",
            a.time, b.time
        )));
    }
    Ok(a.counts.iter().all(|(x, &c)| c <= b.count(*x)))
}

use super::path::{MarkClock, RecoveryMarks, Trajectory, WalkClock};
use super::state::{Recovery, SimState};
use crate::error::{param, Error, Result};
use crate::lattice::{box_sites, Site, MAX_DIM};
use crate::model::{site_occupancy, ParticleId};
use rustc_hash::FxHashMap;

/// Closed integer space box `lo..=hi` times the time window `[t0, t1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceTimeWindow {
    pub d: usize,
    pub lo: Site,
    pub hi: Site,
    pub t0: f64,
    pub t1: f64,
}

impl SpaceTimeWindow {
    pub fn new(d: usize, lo: &[i32], hi: &[i32], t0: f64, t1: f64) -> Self {
        SpaceTimeWindow {
            d,
            lo: Site::new(lo),
            hi: Site::new(hi),
            t0,
            t1,
        }
    }

    pub fn contains_site(&self, x: Site) -> bool {
        (0..self.d).all(|k| x.0[k] >= self.lo.0[k] && x.0[k] <= self.hi.0[k])
    }

    pub fn contains_box(&self, lo: Site, hi: Site) -> bool {
        (0..self.d).all(|k| lo.0[k] >= self.lo.0[k] && hi.0[k] <= self.hi.0[k])
    }

    pub fn is_empty(&self) -> bool {
        (0..self.d).any(|k| self.lo.0[k] > self.hi.0[k])
    }
}

/// One particle's path and recovery marks over a window.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleTrace {
    pub id: ParticleId,
    pub path: Trajectory,
    pub marks: RecoveryMarks,
}

/// Paths of every particle found in `window`'s box at time `window.t0`,
/// known over `[window.t0, window.t1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSet {
    pub window: SpaceTimeWindow,
    pub particles: Vec<ParticleTrace>,
}

impl TraceSet {
    pub fn d(&self) -> usize {
        self.window.d
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    /// Site → indices of particles there at time `t`.
    pub fn occupancy_at(&self, t: f64) -> FxHashMap<Site, Vec<usize>> {
        let mut m: FxHashMap<Site, Vec<usize>> = FxHashMap::default();
        for (k, p) in self.particles.iter().enumerate() {
            m.entry(p.path.position_at(t)).or_default().push(k);
        }
        m
    }

    /// Indices of particles at `x` at time `t`.
    pub fn at(&self, x: Site, t: f64) -> Vec<usize> {
        self.particles
            .iter()
            .enumerate()
            .filter(|(_, p)| p.path.position_at(t) == x)
            .map(|(k, _)| k)
            .collect()
    }

    /// Remove the given particle indices (used for monotonicity checks).
    pub fn without(&self, drop: &[usize]) -> TraceSet {
        let particles = self
            .particles
            .iter()
            .enumerate()
            .filter(|(k, _)| !drop.contains(k))
            .map(|(_, p)| p.clone())
            .collect();
        TraceSet {
            window: self.window,
            particles,
        }
    }
}

/// Traces of the particles present in `window`'s box at its start time,
/// restricted to the window. Recording must have been enabled no later than
/// `window.t0` and the state must have reached `window.t1`.
pub fn record_trace(state: &SimState, window: SpaceTimeWindow) -> Result<TraceSet> {
    let since = state
        .recording_since()
        .ok_or_else(|| Error::Precondition("trajectory recording was never enabled".into()))?;
    if window.t0 < since || window.t1 > state.time() || window.t0 > window.t1 {
        return Err(Error::Range(format!(
            "window [{}, {}] not inside recorded span [{since}, {}]",
            window.t0,
            window.t1,
            state.time()
        )));
    }
    let dom = state.domain();
    let (lo, hi) = dom.outer_range();
    if window.d != dom.d
        || (!window.is_empty() && (0..dom.d).any(|k| window.lo.0[k] < lo || window.hi.0[k] > hi))
    {
        return Err(Error::Range("window box outside the simulated region".into()));
    }
    let lambda = match state.recovery() {
        Recovery::Rate(l) => Some(l),
        _ => None,
    };
    let mut particles = Vec::new();
    for (id, path, _) in state.recorded() {
        let path = path.expect("recording enabled for every particle");
        if !window.contains_site(path.position_at(window.t0)) {
            continue;
        }
        let marks = match lambda {
            Some(l) => MarkClock::for_particle(state.master_seed(), &id, dom.d, l)
                .marks_until(window.t1)
                .restrict(window.t0, window.t1),
            None => RecoveryMarks::default(),
        };
        particles.push(ParticleTrace {
            id,
            path: path.restrict(window.t0, window.t1),
            marks,
        });
    }
    Ok(TraceSet { window, particles })
}

/// Smallest `m` with `P(Poisson(mean) > m) < tol`: a bound on how far a
/// rate-1 walker can wander in time `mean`, up to probability `tol`.
pub fn wander_margin(mean: f64, tol: f64) -> u32 {
    let mut pmf = (-mean).exp();
    let mut cdf = pmf;
    let mut m = 0u32;
    while 1.0 - cdf >= tol && m < 100_000 {
        m += 1;
        pmf *= mean / m as f64;
        cdf += pmf;
    }
    m
}

/// A free cloud of walkers at density `rho` (no infection, no extra particle):
/// Poisson(`rho`) particles on the box `lo - margin ..= hi + margin`, each with
/// its walk on `[0, horizon]` and, when `lambda` is finite and positive, its
/// recovery marks. The returned window is the inner box `lo..=hi` over
/// `[0, horizon]`; completeness inside it holds up to the margin's truncation.
#[allow(clippy::too_many_arguments)]
pub fn sample_cloud_trace(
    rho: f64,
    lambda: f64,
    d: usize,
    lo: &[i32],
    hi: &[i32],
    margin: u32,
    horizon: f64,
    seed: u64,
) -> Result<TraceSet> {
    if !(rho.is_finite() && rho > 0.0) {
        return param(format!("density must be positive, got {rho}"));
    }
    if d == 0 || d > MAX_DIM || lo.len() != d || hi.len() != d {
        return param("box corners must have length d");
    }
    let m = margin as i32;
    let olo: Vec<i32> = lo.iter().map(|c| c - m).collect();
    let ohi: Vec<i32> = hi.iter().map(|c| c + m).collect();
    let marks_on = lambda.is_finite() && lambda > 0.0;
    let mut particles = Vec::new();
    for x in box_sites(d, &olo, &ohi) {
        let n = site_occupancy(seed, x, d, rho);
        for k in 1..=n {
            let id = ParticleId::new(x, k);
            let path = WalkClock::for_particle(seed, &id, d).trajectory(None, x, 0.0, horizon);
            let marks = if marks_on {
                MarkClock::for_particle(seed, &id, d, lambda).marks_until(horizon)
            } else {
                RecoveryMarks::default()
            };
            particles.push(ParticleTrace { id, path, marks });
        }
    }
    Ok(TraceSet {
        window: SpaceTimeWindow::new(d, lo, hi, 0.0, horizon),
        particles,
    })
}

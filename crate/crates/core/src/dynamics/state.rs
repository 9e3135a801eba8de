use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use super::path::{MarkClock, Trajectory, WalkClock};
use crate::error::{param, Error, Result};
use crate::lattice::{LatticeDomain, Site};
use crate::model::{initial_particles, Configuration, ParticleId};

/// Longest supported horizon.
pub const MAX_HORIZON: f64 = 1e6;

/// How infection is transmitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Healthy particles are infected the instant they share a site with an infected one.
    InstantaneousContact,
    /// Infection passes only when a particle jumps; sites may be mixed.
    JumpTime,
}

/// Recovery mechanism.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Recovery {
    /// `λ = 0`: infected particles never recover.
    None,
    /// Finite `λ > 0`: recovery at Poisson marks.
    Rate(f64),
    /// `λ = ∞`: an infected particle recovers as soon as it is alone.
    Instantaneous,
}

impl Recovery {
    pub fn from_lambda(lambda: f64) -> Result<Recovery> {
        if lambda == 0.0 {
            Ok(Recovery::None)
        } else if lambda == f64::INFINITY {
            Ok(Recovery::Instantaneous)
        } else if lambda.is_finite() && lambda > 0.0 {
            Ok(Recovery::Rate(lambda))
        } else {
            param(format!("recovery rate must be 0, positive, or inf; got {lambda}"))
        }
    }

    pub fn lambda(&self) -> f64 {
        match *self {
            Recovery::None => 0.0,
            Recovery::Rate(l) => l,
            Recovery::Instantaneous => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EventKind {
    Jump,
    Mark,
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    particle: u32,
    kind: EventKind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Event {}
impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.particle.cmp(&other.particle))
            .then(self.kind.cmp(&other.kind))
    }
}

#[derive(Debug, Clone)]
struct Particle {
    id: ParticleId,
    pos: Site,
    infected: bool,
    walk: WalkClock,
    next_jump: (f64, usize),
    marks: Option<MarkClock>,
    mark_pending: bool,
    path: Option<Trajectory>,
}

#[derive(Debug, Clone, Default)]
struct SiteCell {
    members: SmallVec<[u32; 6]>,
    infected: u32,
}

/// What one processed event did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub time: f64,
    pub kind: EventKind,
    pub particle: ParticleId,
    pub from: Site,
    pub to: Site,
}

/// Full state of one infection process.
#[derive(Debug, Clone)]
pub struct SimState {
    domain: LatticeDomain,
    variant: Variant,
    recovery: Recovery,
    horizon: f64,
    master_seed: u64,
    time: f64,
    particles: Vec<Particle>,
    sites: FxHashMap<Site, SiteCell>,
    queue: BinaryHeap<Reverse<Event>>,
    n_infected: usize,
    contaminated: bool,
    extinct_at: Option<f64>,
    origin_open: Option<f64>,
    origin_intervals: Vec<(f64, f64)>,
    events: u64,
    recording: Option<f64>,
}

/// Everything needed to set up a process, apart from the seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessParams {
    pub rho: f64,
    pub recovery: Recovery,
    pub variant: Variant,
    pub domain: LatticeDomain,
    pub horizon: f64,
}

impl ProcessParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho.is_finite() && self.rho > 0.0) {
            return param(format!("density must be positive, got {}", self.rho));
        }
        if !(self.horizon >= 0.0 && self.horizon <= MAX_HORIZON) {
            return param(format!("horizon must lie in [0, {MAX_HORIZON}], got {}", self.horizon));
        }
        Recovery::from_lambda(self.recovery.lambda())?;
        Ok(())
    }
}

impl SimState {
    /// Poisson(`rho`) cloud plus the infected extra particle at the origin.
    pub fn new(params: &ProcessParams, master_seed: u64) -> Result<SimState> {
        params.validate()?;
        let ids = initial_particles(params.rho, &params.domain, master_seed)?;
        let placements = ids
            .into_iter()
            .map(|id| (id, id.origin, id.origin == Site::ORIGIN))
            .collect();
        SimState::from_particles(
            params.domain,
            placements,
            params.variant,
            params.recovery,
            params.horizon,
            master_seed,
        )
    }

    /// Build a state from explicit `(id, position, infected)` placements at time zero.
    /// Walks and marks are drawn from the streams of each id under `master_seed`.
    pub fn from_particles(
        domain: LatticeDomain,
        mut placements: Vec<(ParticleId, Site, bool)>,
        variant: Variant,
        recovery: Recovery,
        horizon: f64,
        master_seed: u64,
    ) -> Result<SimState> {
        if !(horizon >= 0.0 && horizon <= MAX_HORIZON) {
            return param(format!("horizon must lie in [0, {MAX_HORIZON}], got {horizon}"));
        }
        placements.sort_by_key(|p| p.0);
        if placements.windows(2).any(|w| w[0].0 == w[1].0) {
            return param("duplicate particle id");
        }
        let d = domain.d;
        let lambda = match recovery {
            Recovery::Rate(l) => Some(l),
            _ => None,
        };
        let infected: Vec<ParticleId> = placements.iter().filter(|p| p.2).map(|p| p.0).collect();
        let mut particles = Vec::with_capacity(placements.len());
        for (id, pos, _) in placements {
            let mut walk = WalkClock::for_particle(master_seed, &id, d);
            let next_jump = walk.next_jump(0.0);
            particles.push(Particle {
                id,
                pos: domain.wrap(pos),
                infected: false,
                walk,
                next_jump,
                marks: lambda.map(|l| MarkClock::for_particle(master_seed, &id, d, l)),
                mark_pending: false,
                path: None,
            });
        }
        let mut state = SimState {
            domain,
            variant,
            recovery,
            horizon,
            master_seed,
            time: 0.0,
            particles,
            sites: FxHashMap::default(),
            queue: BinaryHeap::new(),
            n_infected: 0,
            contaminated: false,
            extinct_at: None,
            origin_open: None,
            origin_intervals: Vec::new(),
            events: 0,
            recording: None,
        };
        for k in 0..state.particles.len() {
            let p = &state.particles[k];
            let (pos, jt) = (p.pos, p.next_jump.0);
            state.sites.entry(pos).or_default().members.push(k as u32);
            state.queue.push(Reverse(Event {
                time: jt,
                particle: k as u32,
                kind: EventKind::Jump,
            }));
        }
        state.seed_infection(&infected);
        Ok(state)
    }

    /// Mark the given particles infected at the current time and settle the state.
    pub fn seed_infection(&mut self, infected: &[ParticleId]) {
        for id in infected {
            if let Ok(k) = self.particles.binary_search_by_key(id, |p| p.id) {
                self.infect(k);
            }
        }
        let touched: Vec<Site> = infected
            .iter()
            .filter_map(|id| self.index_of(id).map(|k| self.particles[k].pos))
            .collect();
        if self.variant == Variant::InstantaneousContact {
            for &x in &touched {
                self.infect_site(x);
            }
        }
        self.settle(&touched);
        self.after_event();
    }

    pub fn domain(&self) -> &LatticeDomain {
        &self.domain
    }
    pub fn variant(&self) -> Variant {
        self.variant
    }
    pub fn recovery(&self) -> Recovery {
        self.recovery
    }
    pub fn horizon(&self) -> f64 {
        self.horizon
    }
    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }
    pub fn time(&self) -> f64 {
        self.time
    }
    pub fn num_particles(&self) -> usize {
        self.particles.len()
    }
    pub fn num_infected(&self) -> usize {
        self.n_infected
    }
    pub fn events_processed(&self) -> u64 {
        self.events
    }
    pub fn boundary_contaminated(&self) -> bool {
        self.contaminated
    }
    pub fn extinct_at(&self) -> Option<f64> {
        self.extinct_at
    }

    pub fn index_of(&self, id: &ParticleId) -> Option<usize> {
        self.particles.binary_search_by_key(id, |p| p.id).ok()
    }

    pub fn particle_ids(&self) -> impl Iterator<Item = ParticleId> + '_ {
        self.particles.iter().map(|p| p.id)
    }

    pub fn position(&self, id: &ParticleId) -> Option<Site> {
        self.index_of(id).map(|k| self.particles[k].pos)
    }

    pub fn is_infected(&self, id: &ParticleId) -> Option<bool> {
        self.index_of(id).map(|k| self.particles[k].infected)
    }

    /// Ids of infected particles, sorted.
    pub fn infected_ids(&self) -> Vec<ParticleId> {
        self.particles.iter().filter(|p| p.infected).map(|p| p.id).collect()
    }

    /// Ids of the particles currently at `x`, sorted.
    pub fn particles_at(&self, x: Site) -> Vec<ParticleId> {
        let mut v: Vec<ParticleId> = self
            .sites
            .get(&x)
            .map(|c| c.members.iter().map(|&m| self.particles[m as usize].id).collect())
            .unwrap_or_default();
        v.sort();
        v
    }

    pub fn count_at(&self, x: Site) -> u32 {
        self.sites.get(&x).map_or(0, |c| c.members.len() as u32)
    }

    pub fn infected_count_at(&self, x: Site) -> u32 {
        self.sites.get(&x).map_or(0, |c| c.infected)
    }

    pub fn origin_intervals(&self) -> Vec<(f64, f64)> {
        let mut v = self.origin_intervals.clone();
        if let Some(s) = self.origin_open {
            v.push((s, self.time));
        }
        v
    }

    /// Snapshot of the occupancy field.
    pub fn configuration(&self) -> Configuration {
        let mut cfg = Configuration::empty(self.domain, self.time);
        for (x, cell) in &self.sites {
            if !cell.members.is_empty() {
                cfg.counts.insert(*x, cell.members.len() as u32);
            }
            if cell.infected > 0 {
                cfg.infected.insert(*x, cell.infected);
            }
        }
        cfg
    }

    /// Site purity: no site holds both infected and healthy particles.
    pub fn is_site_pure(&self) -> bool {
        self.sites
            .values()
            .all(|c| c.infected == 0 || c.infected as usize == c.members.len())
    }

    /// No infected particle sits alone.
    pub fn no_lone_infected(&self) -> bool {
        self.sites
            .values()
            .all(|c| !(c.members.len() == 1 && c.infected == 1))
    }

    /// Time of the next pending event, if any.
    pub fn peek_time(&self) -> Option<f64> {
        self.queue.peek().map(|e| e.0.time)
    }

    /// Start recording trajectories of every particle from the current time.
    pub fn enable_recording(&mut self) {
        let now = self.time;
        for p in &mut self.particles {
            p.path = Some(Trajectory::stationary(now, p.pos, now));
        }
        self.recording = Some(now);
    }

    pub fn recording_since(&self) -> Option<f64> {
        self.recording
    }

    pub(crate) fn recorded(&self) -> impl Iterator<Item = (ParticleId, Option<&Trajectory>, Site)> + '_ {
        self.particles.iter().map(|p| (p.id, p.path.as_ref(), p.pos))
    }

    fn infect(&mut self, k: usize) {
        let now = self.time;
        let p = &mut self.particles[k];
        if p.infected {
            return;
        }
        p.infected = true;
        let pos = p.pos;
        let mut schedule = None;
        if let Some(clock) = p.marks.as_mut() {
            if !p.mark_pending {
                schedule = Some(clock.next_after(now));
                p.mark_pending = true;
            }
        }
        if let Some(t) = schedule {
            self.queue.push(Reverse(Event {
                time: t,
                particle: k as u32,
                kind: EventKind::Mark,
            }));
        }
        self.n_infected += 1;
        self.sites.get_mut(&pos).expect("occupied site").infected += 1;
        if self.domain.on_or_beyond_shell(pos) {
            self.contaminated = true;
        }
    }

    fn heal(&mut self, k: usize) {
        let p = &mut self.particles[k];
        if !p.infected {
            return;
        }
        p.infected = false;
        let pos = p.pos;
        self.n_infected -= 1;
        self.sites.get_mut(&pos).expect("occupied site").infected -= 1;
    }

    fn infect_site(&mut self, x: Site) {
        let Some(cell) = self.sites.get(&x) else { return };
        if cell.infected == 0 || cell.infected as usize == cell.members.len() {
            return;
        }
        let members = cell.members.clone();
        for m in members {
            self.infect(m as usize);
        }
    }

    /// Instantaneous-recovery closure over the given sites, iterated to a fixed point.
    fn settle(&mut self, touched: &[Site]) {
        if self.recovery != Recovery::Instantaneous {
            return;
        }
        let mut pending: SmallVec<[Site; 4]> = touched.iter().copied().collect();
        while let Some(x) = pending.pop() {
            let lone = match self.sites.get(&x) {
                Some(c) if c.members.len() == 1 && c.infected == 1 => c.members[0] as usize,
                _ => continue,
            };
            self.heal(lone);
            // Healing changes no occupancy, so no other site can become newly alone.
        }
    }

    fn after_event(&mut self) {
        let origin_hot = self.infected_count_at(Site::ORIGIN) > 0;
        match (origin_hot, self.origin_open) {
            (true, None) => self.origin_open = Some(self.time),
            (false, Some(s)) => {
                self.origin_intervals.push((s, self.time));
                self.origin_open = None;
            }
            _ => {}
        }
        if self.n_infected == 0 && self.extinct_at.is_none() {
            self.extinct_at = Some(self.time);
        }
    }

    /// Move particle `k` to `target` at the current time and apply the infection rule.
    fn apply_jump(&mut self, k: usize, target: Site) -> Site {
        let from = self.particles[k].pos;
        let infected = self.particles[k].infected;
        {
            let cell = self.sites.get_mut(&from).expect("occupied site");
            let at = cell.members.iter().position(|&m| m as usize == k).expect("member");
            cell.members.swap_remove(at);
            if infected {
                cell.infected -= 1;
            }
            if cell.members.is_empty() {
                self.sites.remove(&from);
            }
        }
        {
            let cell = self.sites.entry(target).or_default();
            cell.members.push(k as u32);
            if infected {
                cell.infected += 1;
            }
        }
        let now = self.time;
        let p = &mut self.particles[k];
        p.pos = target;
        if let Some(path) = p.path.as_mut() {
            path.steps.push((now, target));
        }
        if infected && self.domain.on_or_beyond_shell(target) {
            self.contaminated = true;
        }
        match self.variant {
            Variant::InstantaneousContact => self.infect_site(target),
            Variant::JumpTime => {
                if infected {
                    self.infect_site_all(target);
                } else if self.infected_count_at(target) > 0 {
                    self.infect(k);
                }
            }
        }
        self.settle(&[from, target]);
        from
    }

    fn infect_site_all(&mut self, x: Site) {
        if let Some(cell) = self.sites.get(&x) {
            let members = cell.members.clone();
            for m in members {
                self.infect(m as usize);
            }
        }
    }

    /// Recovery attempt for `id` at the current time.
    ///
    /// Finite `λ`, contact variant: heals iff the particle is alone. Jump-time
    /// variant: heals unconditionally. `λ = ∞`: settles the particle's site.
    /// Healthy particles are left untouched.
    pub fn apply_recovery(&mut self, id: &ParticleId) -> Result<()> {
        let k = self
            .index_of(id)
            .ok_or_else(|| Error::Range(format!("unknown particle {id:?}")))?;
        self.recover_index(k);
        self.after_event();
        Ok(())
    }

    fn recover_index(&mut self, k: usize) {
        if !self.particles[k].infected {
            return;
        }
        let pos = self.particles[k].pos;
        match self.recovery {
            Recovery::None => {}
            Recovery::Instantaneous => self.settle(&[pos]),
            Recovery::Rate(_) => {
                let alone = self.count_at(pos) == 1;
                if alone || self.variant == Variant::JumpTime {
                    self.heal(k);
                }
            }
        }
    }

    /// Jump particle `id` to the neighbor in direction `dir` right now, outside
    /// the random schedule. Intended for constructing scenarios.
    pub fn force_jump(&mut self, id: &ParticleId, dir: usize) -> Result<StepInfo> {
        let k = self
            .index_of(id)
            .ok_or_else(|| Error::Range(format!("unknown particle {id:?}")))?;
        if dir >= 2 * self.domain.d {
            return Err(Error::Range(format!("direction {dir} out of range")));
        }
        let target = self.domain.wrap(self.particles[k].pos.step(dir));
        let from = self.apply_jump(k, target);
        self.after_event();
        Ok(StepInfo {
            time: self.time,
            kind: EventKind::Jump,
            particle: *id,
            from,
            to: target,
        })
    }

    /// Process the next event if it happens no later than `t_end`.
    pub fn step(&mut self, t_end: f64) -> Result<Option<StepInfo>> {
        let Some(&Reverse(ev)) = self.queue.peek() else {
            return Ok(None);
        };
        if ev.time > t_end {
            return Ok(None);
        }
        self.queue.pop();
        if ev.time < self.time {
            return Err(Error::Internal(format!(
                "event queue went backwards: {} < {}",
                ev.time, self.time
            )));
        }
        self.time = ev.time;
        self.events += 1;
        let k = ev.particle as usize;
        let id = self.particles[k].id;
        let info = match ev.kind {
            EventKind::Jump => {
                let (t, dir) = self.particles[k].next_jump;
                debug_assert_eq!(t, ev.time);
                let target = self.domain.wrap(self.particles[k].pos.step(dir));
                let from = self.apply_jump(k, target);
                let p = &mut self.particles[k];
                p.next_jump = p.walk.next_jump(t);
                let nt = p.next_jump.0;
                self.queue.push(Reverse(Event {
                    time: nt,
                    particle: k as u32,
                    kind: EventKind::Jump,
                }));
                StepInfo {
                    time: ev.time,
                    kind: EventKind::Jump,
                    particle: id,
                    from,
                    to: target,
                }
            }
            EventKind::Mark => {
                let p = &mut self.particles[k];
                p.mark_pending = false;
                let clock = p.marks.as_mut().expect("mark event without a clock");
                clock.advance();
                let pos = p.pos;
                self.recover_index(k);
                let p = &mut self.particles[k];
                if p.infected {
                    let t = p.marks.as_ref().expect("clock").peek();
                    p.mark_pending = true;
                    self.queue.push(Reverse(Event {
                        time: t,
                        particle: k as u32,
                        kind: EventKind::Mark,
                    }));
                }
                StepInfo {
                    time: ev.time,
                    kind: EventKind::Mark,
                    particle: id,
                    from: pos,
                    to: pos,
                }
            }
        };
        self.after_event();
        Ok(Some(info))
    }

    /// Process every event in `(time, t_end]` and advance the clock to `t_end`.
    pub fn evolve(&mut self, t_end: f64) -> Result<()> {
        self.check_target(t_end)?;
        while self.step(t_end)?.is_some() {}
        self.advance_clock(t_end);
        Ok(())
    }

    /// Like [`evolve`](Self::evolve) but calls `observe` after every event.
    pub fn evolve_with<F>(&mut self, t_end: f64, mut observe: F) -> Result<()>
    where
        F: FnMut(&SimState, &StepInfo) -> Result<()>,
    {
        self.check_target(t_end)?;
        while let Some(info) = self.step(t_end)? {
            observe(self, &info)?;
        }
        self.advance_clock(t_end);
        Ok(())
    }

    pub(crate) fn check_target(&self, t_end: f64) -> Result<()> {
        if t_end > self.horizon {
            return Err(Error::Range(format!(
                "target time {t_end} beyond horizon {}",
                self.horizon
            )));
        }
        if t_end < self.time {
            return Err(Error::Range(format!(
                "target time {t_end} before current time {}",
                self.time
            )));
        }
        Ok(())
    }

    pub(crate) fn advance_clock(&mut self, t_end: f64) {
        self.time = t_end;
        for p in &mut self.particles {
            if let Some(path) = p.path.as_mut() {
                path.until = t_end;
            }
        }
    }
}

/// Build the standard process: Poisson cloud, infected origin, settled at time zero.
pub fn initial_state(params: &ProcessParams, master_seed: u64) -> Result<SimState> {
    SimState::new(params, master_seed)
}

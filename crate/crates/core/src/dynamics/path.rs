use crate::error::{param, Error, Result};
use crate::lattice::{LatticeDomain, Site};
use crate::model::ParticleId;
use crate::rng::{make_stream, Purpose, RngStream};

/// Piecewise-constant path: `steps[k] = (t_k, x_k)` means the walker sits at
/// `x_k` on `[t_k, t_{k+1})`. The path is known up to `until`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub steps: Vec<(f64, Site)>,
    pub until: f64,
}

impl Trajectory {
    pub fn stationary(start: f64, x: Site, until: f64) -> Self {
        Trajectory {
            steps: vec![(start, x)],
            until,
        }
    }

    pub fn start_time(&self) -> f64 {
        self.steps[0].0
    }

    pub fn covers(&self, t0: f64, t1: f64) -> bool {
        self.start_time() <= t0 && t1 <= self.until
    }

    fn piece(&self, t: f64) -> usize {
        // Last step with time <= t.
        self.steps.partition_point(|s| s.0 <= t).saturating_sub(1)
    }

    /// Position at time `t` (clamped to the first step for earlier times).
    pub fn position_at(&self, t: f64) -> Site {
        self.steps[self.piece(t)].1
    }

    /// Jump times in the half-open window `(t0, t1]`.
    pub fn jump_times_in(&self, t0: f64, t1: f64) -> impl Iterator<Item = f64> + '_ {
        self.steps[1..]
            .iter()
            .map(|s| s.0)
            .filter(move |&t| t > t0 && t <= t1)
    }

    /// First jump strictly after `t0` and before `t1`: `(time, target)`.
    pub fn first_jump_in(&self, t0: f64, t1: f64) -> Option<(f64, Site)> {
        let k = self.piece(t0) + 1;
        self.steps
            .get(k)
            .filter(|s| s.0 > t0 && s.0 < t1)
            .copied()
    }

    /// Pieces of the path overlapping `[t0, t1]`, each clipped to the window.
    pub fn pieces_in(&self, t0: f64, t1: f64) -> impl Iterator<Item = (f64, f64, Site)> + '_ {
        let first = self.piece(t0);
        let n = self.steps.len();
        (first..n).map_while(move |k| {
            let (s, x) = self.steps[k];
            if s > t1 {
                return None;
            }
            let e = if k + 1 < n { self.steps[k + 1].0 } else { self.until.max(t1) };
            Some((s.max(t0), e.min(t1), x))
        })
    }

    /// Sites visited during `[t0, t1]`.
    pub fn sites_in(&self, t0: f64, t1: f64) -> impl Iterator<Item = Site> + '_ {
        self.pieces_in(t0, t1).map(|p| p.2)
    }

    /// Copy of the path restricted to `[t0, t1]`, starting with the position at `t0`.
    pub fn restrict(&self, t0: f64, t1: f64) -> Trajectory {
        let mut steps = vec![(t0, self.position_at(t0))];
        steps.extend(self.steps.iter().filter(|s| s.0 > t0 && s.0 <= t1).copied());
        Trajectory {
            steps,
            until: t1.min(self.until),
        }
    }

    pub fn is_nearest_neighbor(&self, d: usize) -> bool {
        self.steps.windows(2).all(|w| {
            w[0].0 < w[1].0 && w[1].1.sub(w[0].1).l1() == 1 && w[1].1.0[d..].iter().all(|&c| c == 0)
        })
    }
}

/// Sorted recovery-mark times of one particle on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RecoveryMarks {
    pub times: Vec<f64>,
}

impl RecoveryMarks {
    /// Whether any mark falls in the closed interval `[t0, t1]`.
    pub fn any_in(&self, t0: f64, t1: f64) -> bool {
        let k = self.times.partition_point(|&t| t < t0);
        self.times.get(k).is_some_and(|&t| t <= t1)
    }

    pub fn restrict(&self, t0: f64, t1: f64) -> RecoveryMarks {
        RecoveryMarks {
            times: self.times.iter().copied().filter(|&t| t >= t0 && t <= t1).collect(),
        }
    }
}

/// Lazily generated rate-1 simple random walk: Exp(1) holding times and a
/// uniform choice among the `2d` neighbors.
#[derive(Debug, Clone)]
pub struct WalkClock {
    stream: RngStream,
    dirs: u64,
}

impl WalkClock {
    pub fn new(stream: RngStream, d: usize) -> Self {
        WalkClock {
            stream,
            dirs: 2 * d as u64,
        }
    }

    pub fn for_particle(master_seed: u64, id: &ParticleId, d: usize) -> Self {
        Self::new(make_stream(master_seed, Purpose::Walk, &id.key(d)), d)
    }

    /// Next jump after time `now`: `(time, direction)`.
    #[inline]
    pub fn next_jump(&mut self, now: f64) -> (f64, usize) {
        let t = now + self.stream.exp1();
        let dir = self.stream.below(self.dirs) as usize;
        (t, dir)
    }

    /// Path from `start` at time `t0` up to `until`.
    pub fn trajectory(&mut self, domain: Option<&LatticeDomain>, start: Site, t0: f64, until: f64) -> Trajectory {
        let mut steps = vec![(t0, start)];
        let mut x = start;
        let mut now = t0;
        loop {
            let (t, dir) = self.next_jump(now);
            if t > until {
                break;
            }
            x = x.step(dir);
            if let Some(dom) = domain {
                x = dom.wrap(x);
            }
            steps.push((t, x));
            now = t;
        }
        Trajectory { steps, until }
    }
}

/// Lazily generated Poisson process of intensity `lambda`.
#[derive(Debug, Clone)]
pub struct MarkClock {
    stream: RngStream,
    lambda: f64,
    next: f64,
}

impl MarkClock {
    pub fn new(mut stream: RngStream, lambda: f64) -> Self {
        let next = stream.exp1() / lambda;
        MarkClock { stream, lambda, next }
    }

    pub fn for_particle(master_seed: u64, id: &ParticleId, d: usize, lambda: f64) -> Self {
        Self::new(make_stream(master_seed, Purpose::Recovery, &id.key(d)), lambda)
    }

    /// First mark strictly after `t` (marks at or before `t` are skipped).
    pub fn next_after(&mut self, t: f64) -> f64 {
        while self.next <= t {
            self.next += self.stream.exp1() / self.lambda;
        }
        self.next
    }

    pub fn peek(&self) -> f64 {
        self.next
    }

    /// Consume the current mark and return the following one.
    pub fn advance(&mut self) -> f64 {
        self.next += self.stream.exp1() / self.lambda;
        self.next
    }

    pub fn marks_until(&mut self, horizon: f64) -> RecoveryMarks {
        let mut times = Vec::new();
        while self.next <= horizon {
            times.push(self.next);
            self.advance();
        }
        RecoveryMarks { times }
    }
}

/// Poisson point set of intensity `lambda` on `[0, horizon]`.
pub fn sample_recovery_marks(lambda: f64, horizon: f64, stream: RngStream) -> Result<RecoveryMarks> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return param(format!("mark intensity must be positive and finite, got {lambda}"));
    }
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::Parameter(format!("horizon must be non-negative, got {horizon}")));
    }
    Ok(MarkClock::new(stream, lambda).marks_until(horizon))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: i32) -> Site {
        Site::new(&[x])
    }

    #[test]
    fn position_lookup() {
        let tr = Trajectory {
            steps: vec![(0.0, s(0)), (1.0, s(1)), (2.5, s(2))],
            until: 5.0,
        };
        assert_eq!(tr.position_at(0.0), s(0));
        assert_eq!(tr.position_at(0.99), s(0));
        assert_eq!(tr.position_at(1.0), s(1));
        assert_eq!(tr.position_at(4.0), s(2));
        assert_eq!(tr.first_jump_in(0.5, 1.5), Some((1.0, s(1))));
        assert_eq!(tr.first_jump_in(1.0, 2.0), None);
        let r = tr.restrict(1.5, 3.0);
        assert_eq!(r.steps, vec![(1.5, s(1)), (2.5, s(2))]);
        let pieces: Vec<_> = tr.pieces_in(0.5, 2.0).collect();
        assert_eq!(pieces, vec![(0.5, 1.0, s(0)), (1.0, 2.0, s(1))]);
    }

    #[test]
    fn marks_interval_queries() {
        let m = RecoveryMarks {
            times: vec![1.0, 3.0],
        };
        assert!(m.any_in(0.0, 1.0));
        assert!(!m.any_in(1.1, 2.9));
        assert!(m.any_in(2.0, 3.0));
        assert!(!m.any_in(3.1, 10.0));
    }

    #[test]
    fn recovery_mark_errors_and_empty_horizon() {
        let st = || make_stream(1, Purpose::Recovery, &[0]);
        assert!(sample_recovery_marks(0.0, 1.0, st()).is_err());
        assert!(sample_recovery_marks(f64::INFINITY, 1.0, st()).is_err());
        assert!(sample_recovery_marks(1.0, 0.0, st()).unwrap().times.is_empty());
    }

    #[test]
    fn mark_count_mean_and_void_probability() {
        let n = 10_000;
        let mut total = 0usize;
        for k in 0..n {
            let m = sample_recovery_marks(1.0, 10.0, make_stream(2, Purpose::Recovery, &[k])).unwrap();
            assert!(m.times.windows(2).all(|w| w[0] < w[1]));
            total += m.times.len();
        }
        let mean = total as f64 / n as f64;
        // Poisson(10): standard error of the mean is sqrt(10 / n).
        assert!((mean - 10.0).abs() < 4.0 * (10.0 / n as f64).sqrt(), "{mean}");

        let mut empty = 0;
        for k in 0..n {
            let m = sample_recovery_marks(0.1, 10.0, make_stream(3, Purpose::Recovery, &[k])).unwrap();
            empty += m.times.is_empty() as usize;
        }
        let p = empty as f64 / n as f64;
        let target = (-1.0f64).exp();
        let se = (target * (1.0 - target) / n as f64).sqrt();
        assert!((p - target).abs() < 4.0 * se, "{p}");
    }

    #[test]
    fn walk_is_nearest_neighbor_rate_one() {
        let mut jumps = 0usize;
        let n = 2_000;
        for k in 0..n {
            let mut w = WalkClock::new(make_stream(4, Purpose::Walk, &[k]), 2);
            let tr = w.trajectory(None, Site::ORIGIN, 0.0, 5.0);
            assert!(tr.is_nearest_neighbor(2));
            jumps += tr.steps.len() - 1;
        }
        let mean = jumps as f64 / n as f64;
        assert!((mean - 5.0).abs() < 4.0 * (5.0 / n as f64).sqrt(), "{mean}");
    }
}

use std::ops::Range;

use rustc_hash::FxHashMap;

use crate::dynamics::TraceSet;
use crate::error::{Error, Result};
use crate::lattice::{box_sites, Site};
use crate::tessellation::{CellIndex, TessellationParams};

/// Fate of the particles at a site over one unit of time: `jumps[u]` counts
/// those whose first jump goes in direction `u` (axis `u / 2`, positive when
/// `u` is even), `stay` those that do not jump.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitCounts {
    pub jumps: Vec<u32>,
    pub stay: u32,
}

impl TransitCounts {
    fn empty(d: usize) -> Self {
        TransitCounts {
            jumps: vec![0; 2 * d],
            stay: 0,
        }
    }

    /// At least one jumper in each direction and at least two stayers.
    pub fn is_good(&self) -> bool {
        self.stay >= 2 && self.jumps.iter().all(|&n| n >= 1)
    }
}

fn direction(from: Site, to: Site, d: usize) -> usize {
    let diff = to.sub(from);
    let axis = (0..d).find(|&a| diff.0[a] != 0).expect("a jump changes the site");
    2 * axis + usize::from(diff.0[axis] < 0)
}

fn record(counts: &mut TransitCounts, trace: &TraceSet, k: usize, x: Site, time: f64) {
    let d = trace.d();
    match trace.particles[k].path.first_jump_in(time, time + 1.0) {
        Some((_, y)) => counts.jumps[direction(x, y, d)] += 1,
        None => counts.stay += 1,
    }
}

fn require(trace: &TraceSet, lo: Site, hi: Site, t0: f64, t1: f64) -> Result<()> {
    let w = &trace.window;
    if !w.contains_box(lo, hi) || w.t0 > t0 || w.t1 < t1 {
        return Err(Error::Precondition(format!(
            "trace window does not cover the requested points over [{t0}, {t1}]"
        )));
    }
    Ok(())
}

/// Transit counts of the particles at `x` at integer time `k` during `[k, k+1)`.
pub fn transit_counts(trace: &TraceSet, x: Site, k: i64) -> Result<TransitCounts> {
    let t = k as f64;
    require(trace, x, x, t, t + 1.0)?;
    let mut counts = TransitCounts::empty(trace.d());
    for idx in trace.at(x, t) {
        record(&mut counts, trace, idx, x, t);
    }
    Ok(counts)
}

pub fn is_good_point(trace: &TraceSet, x: Site, k: i64) -> Result<bool> {
    Ok(transit_counts(trace, x, k)?.is_good())
}

/// Points of a super cell: the sites `iℓ + {-ηℓ, …, (η+1)ℓ - 1}^d` and the
/// integer times in `[τβ, (τ+η)β)`.
pub fn e_tilde_points(cell: &CellIndex, params: &TessellationParams) -> (Vec<Site>, Range<i64>) {
    let (lo, hi) = point_box(cell, params);
    let d = params.d;
    let b = params.beta as i64;
    let k0 = cell.tau * b;
    (box_sites(d, &lo.0[..d], &hi.0[..d]), k0..k0 + params.eta_overlap as i64 * b)
}

fn point_box(cell: &CellIndex, params: &TessellationParams) -> (Site, Site) {
    let l = params.ell as i32;
    let eta = params.eta_overlap as i32;
    let mut lo = Site::ORIGIN;
    let mut hi = Site::ORIGIN;
    for k in 0..params.d {
        lo.0[k] = cell.i.0[k] * l - eta * l;
        hi.0[k] = cell.i.0[k] * l + (eta + 1) * l - 1;
    }
    (lo, hi)
}

/// Whether every point of the super cell of `cell` is good.
pub fn holds_e_tilde(trace: &TraceSet, cell: &CellIndex, params: &TessellationParams) -> Result<bool> {
    let (lo, hi) = point_box(cell, params);
    let (sites, times) = e_tilde_points(cell, params);
    require(trace, lo, hi, times.start as f64, times.end as f64)?;
    let d = params.d;
    let inside = |x: Site| (0..d).all(|a| lo.0[a] <= x.0[a] && x.0[a] <= hi.0[a]);
    for k in times {
        let t = k as f64;
        let mut counts: FxHashMap<Site, TransitCounts> = FxHashMap::default();
        for (idx, p) in trace.particles.iter().enumerate() {
            let x = p.path.position_at(t);
            if inside(x) {
                record(counts.entry(x).or_insert_with(|| TransitCounts::empty(d)), trace, idx, x, t);
            }
        }
        if counts.len() < sites.len() || !counts.values().all(TransitCounts::is_good) {
            return Ok(false);
        }
    }
    Ok(true)
}

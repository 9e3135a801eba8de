use crate::dynamics::{Recovery, RecoveryMarks, TraceSet, Trajectory, WalkClock, MarkClock};
use crate::error::{param, Error, Result};
use crate::lattice::{box_sites, Site, MAX_DIM};
use crate::rng::{make_stream, Purpose};
use crate::tessellation::{space_box, CellIndex, RationalBox, RegionKind, TessellationParams};

use super::meets;

/// Landing radius for the relay condition of good cells.
pub const GOOD_RADIUS: i32 = 1;

/// What the cell checkers look at: a trace that is complete on the super
/// cells involved, the tessellation, and the recovery regime.
#[derive(Debug, Clone, Copy)]
pub struct CellCheckContext<'a> {
    pub trace: &'a TraceSet,
    pub params: TessellationParams,
    pub lambda: Recovery,
}

impl<'a> CellCheckContext<'a> {
    pub fn new(trace: &'a TraceSet, params: TessellationParams, lambda: Recovery) -> Result<Self> {
        if trace.d() != params.d {
            return param(format!("trace has dimension {} but cells have {}", trace.d(), params.d));
        }
        Ok(CellCheckContext { trace, params, lambda })
    }

    /// `ℓ^{5/3}`, how long the infection paths must survive.
    pub fn path_time(&self) -> f64 {
        self.params.path_time()
    }

    /// Landing radius for acceptable cells: `d + 2`.
    pub fn acceptable_radius(&self) -> i32 {
        self.params.d as i32 + 2
    }

    fn marked(&self, k: usize, t0: f64, t1: f64) -> bool {
        match self.lambda {
            Recovery::None => false,
            Recovery::Rate(_) => self.trace.particles[k].marks.any_in(t0, t1),
            Recovery::Instantaneous => true,
        }
    }

    fn require_coverage(&self, cell: &CellIndex, t_end: f64) -> Result<()> {
        let w = &self.trace.window;
        let sb = space_box(RegionKind::SuperBox, cell, &self.params);
        let (lo, hi) = sb.integer_hull();
        let t0 = self.params.cell_start(cell.tau);
        let inside = (0..self.params.d).all(|k| w.lo.0[k] <= lo.0[k] && hi.0[k] <= w.hi.0[k]);
        if !inside || w.t0 > t0 || w.t1 < t_end {
            return Err(Error::Precondition(format!(
                "trace window does not cover the super cell of {:?} over [{t0}, {t_end}]",
                cell
            )));
        }
        Ok(())
    }

    fn stays_in(&self, k: usize, t0: f64, t1: f64, b: &RationalBox) -> bool {
        self.trace.particles[k].path.sites_in(t0, t1).all(|x| b.contains(x))
    }
}

/// Flattened index set for offsets `i'` with `‖i'‖∞ ≤ r`.
struct OffsetGrid {
    d: usize,
    r: i32,
    side: usize,
}

impl OffsetGrid {
    fn new(d: usize, r: i32) -> Self {
        OffsetGrid {
            d,
            r,
            side: (2 * r + 1) as usize,
        }
    }

    fn len(&self) -> usize {
        self.side.pow(self.d as u32)
    }

    /// Offsets of the closed boxes `(i + i')ℓ + [0, ℓ]^d` containing `y`.
    fn landing(&self, y: Site, i: Site, ell: i32) -> Vec<usize> {
        let mut axes: Vec<Vec<i32>> = Vec::with_capacity(self.d);
        for k in 0..self.d {
            let rel = y.0[k] - i.0[k] * ell;
            let q = rel.div_euclid(ell);
            let mut opts = vec![q];
            if rel.rem_euclid(ell) == 0 {
                opts.push(q - 1);
            }
            opts.retain(|o| o.abs() <= self.r);
            if opts.is_empty() {
                return Vec::new();
            }
            axes.push(opts);
        }
        let mut out = vec![0usize];
        for opts in &axes {
            let mut next = Vec::with_capacity(out.len() * opts.len());
            for &base in &out {
                for &o in opts {
                    next.push(base * self.side + (o + self.r) as usize);
                }
            }
            out = next;
        }
        out
    }
}

struct Carrier {
    k: usize,
    landing: Vec<usize>,
}

/// Particles in the quasi-super box at the cell's start, mark-free and inside
/// the super box through the cell's end, with their landing offsets.
fn carriers(cell: &CellIndex, ctx: &CellCheckContext, grid: &OffsetGrid) -> Vec<Carrier> {
    let p = &ctx.params;
    let t0 = p.cell_start(cell.tau);
    let t1 = t0 + p.beta as f64;
    let qs = space_box(RegionKind::QuasiSuperBox, cell, p);
    let sb = space_box(RegionKind::SuperBox, cell, p);
    let mut out = Vec::new();
    for (k, tr) in ctx.trace.particles.iter().enumerate() {
        if !qs.contains(tr.path.position_at(t0)) || ctx.marked(k, t0, t1) || !ctx.stays_in(k, t0, t1, &sb) {
            continue;
        }
        let landing = grid.landing(tr.path.position_at(t1), cell.i, p.ell as i32);
        if !landing.is_empty() {
            out.push(Carrier { k, landing });
        }
    }
    out
}

/// Lattice points of the cell's box, `iℓ + {0, …, ℓ-1}^d`.
fn cell_points(cell: &CellIndex, p: &TessellationParams) -> Vec<Site> {
    let l = p.ell as i32;
    let lo: Vec<i32> = (0..p.d).map(|k| cell.i.0[k] * l).collect();
    let hi: Vec<i32> = lo.iter().map(|c| c + l - 1).collect();
    box_sites(p.d, &lo, &hi)
}

/// Whether the cell is acceptable: every occupied site `x` of its box at the
/// cell's start hosts a particle whose path stays mark-free inside the
/// extended box for time `ℓ^{5/3}`, and that path is met, before then, by
/// carriers landing in every box `i + i'` with `‖i'‖∞ ≤ d + 2`.
pub fn is_acceptable(cell: &CellIndex, ctx: &CellCheckContext) -> Result<bool> {
    let p = &ctx.params;
    let t0 = p.cell_start(cell.tau);
    let t1 = t0 + p.beta as f64;
    let t_end = t0 + ctx.path_time();
    ctx.require_coverage(cell, t1.max(t_end))?;

    let mut starts: Vec<(Site, Vec<usize>)> = Vec::new();
    for x in cell_points(cell, p) {
        let here = ctx.trace.at(x, t0);
        if !here.is_empty() {
            starts.push((x, here));
        }
    }
    if starts.is_empty() {
        return Ok(true);
    }
    let grid = OffsetGrid::new(p.d, ctx.acceptable_radius());
    let carriers = carriers(cell, ctx, &grid);
    let ext = space_box(RegionKind::ExtendedBox, cell, p);
    let mut covered = vec![false; grid.len()];
    for (_, here) in &starts {
        let mut found = false;
        for &k in here {
            if ctx.marked(k, t0, t_end) || !ctx.stays_in(k, t0, t_end, &ext) {
                continue;
            }
            covered.iter_mut().for_each(|c| *c = false);
            let mut n = 0;
            let path = &ctx.trace.particles[k].path;
            for c in &carriers {
                if !c.landing.iter().any(|&o| !covered[o]) {
                    continue;
                }
                if meets(path, &ctx.trace.particles[c.k].path, t0, t_end) {
                    for &o in &c.landing {
                        if !covered[o] {
                            covered[o] = true;
                            n += 1;
                        }
                    }
                }
            }
            if n == grid.len() {
                found = true;
                break;
            }
        }
        if !found {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The cell's own random-walk path `γ` on `[0, β]` with `γ_0 = 0`, and its
/// recovery marks.
#[derive(Debug, Clone, PartialEq)]
pub struct DistinguishedPath {
    pub cell: CellIndex,
    pub path: Trajectory,
    pub marks: RecoveryMarks,
}

/// Draw the distinguished path of `cell` from its dedicated streams. Under
/// instantaneous recovery the path counts as marked.
pub fn sample_distinguished_path(
    cell: &CellIndex,
    lambda: Recovery,
    beta: f64,
    seed: u64,
    d: usize,
) -> Result<DistinguishedPath> {
    if !(beta > 0.0 && beta.is_finite()) {
        return param(format!("beta must be positive, got {beta}"));
    }
    if d == 0 || d > MAX_DIM {
        return param(format!("dimension must be in 1..={MAX_DIM}"));
    }
    let mut key: Vec<i64> = cell.i.key_words(d).collect();
    key.push(cell.tau);
    key.push(0);
    let path = WalkClock::new(make_stream(seed, Purpose::DistinguishedPath, &key), d)
        .trajectory(None, Site::ORIGIN, 0.0, beta);
    *key.last_mut().unwrap() = 1;
    let marks = match lambda {
        Recovery::None => RecoveryMarks::default(),
        Recovery::Rate(l) => MarkClock::new(make_stream(seed, Purpose::DistinguishedPath, &key), l).marks_until(beta),
        Recovery::Instantaneous => RecoveryMarks { times: vec![0.0] },
    };
    Ok(DistinguishedPath {
        cell: *cell,
        path,
        marks,
    })
}

/// Whether every window `[t, t + T]` with `t ≤ β - T` keeps `γ` within
/// ∞-distance `ℓ / 4^d` of `γ_t`.
fn small_displacement(path: &Trajectory, beta: f64, window: f64, ell: u32, d: usize) -> bool {
    let last_start = beta - window;
    if last_start < 0.0 {
        return true;
    }
    let scale = 4i64.pow(d as u32);
    let steps = &path.steps;
    for (k, &(a, anchor)) in steps.iter().enumerate() {
        if a > last_start {
            break;
        }
        // The worst window starting in this piece starts just before it ends.
        let next = steps.get(k + 1).map_or(f64::INFINITY, |s| s.0);
        let (end, closed) = if next <= last_start { (next + window, false) } else { (beta, true) };
        for &(s, y) in &steps[k + 1..] {
            if s > end || (!closed && s == end) {
                break;
            }
            if y.sub(anchor).linf() as i64 * scale > ell as i64 {
                return false;
            }
        }
    }
    true
}

/// Whether the cell is good given its distinguished path: the path is
/// mark-free with small displacement over every window of length `ℓ^{5/3}`,
/// infection entering the cell along the path is relayed by a carrier to
/// a neighboring box, and all cells above the box and its neighbors are
/// acceptable.
pub fn is_good_cell(cell: &CellIndex, ctx: &CellCheckContext, gamma: &DistinguishedPath) -> Result<bool> {
    let p = &ctx.params;
    let d = p.d;
    if gamma.cell != *cell {
        return Err(Error::Precondition(format!(
            "distinguished path belongs to {:?}, not {:?}",
            gamma.cell, cell
        )));
    }
    let beta = p.beta as f64;
    let t_path = ctx.path_time();
    if !gamma.path.covers(0.0, beta) {
        return Err(Error::Precondition("distinguished path does not cover [0, beta]".into()));
    }
    let t0 = p.cell_start(cell.tau);
    let t1 = t0 + beta;
    ctx.require_coverage(cell, t1.max(t0 + t_path))?;
    let neighbors: Vec<CellIndex> = box_sites(d, &[-1; MAX_DIM][..d], &[1; MAX_DIM][..d])
        .into_iter()
        .map(|o| cell.shifted(o, 1))
        .collect();
    for nb in &neighbors {
        ctx.require_coverage(nb, t1 + beta.max(t_path))?;
    }

    if gamma.marks.any_in(0.0, beta) || !small_displacement(&gamma.path, beta, t_path, p.ell, d) {
        return Ok(false);
    }

    let l = p.ell as i32;
    let grid = OffsetGrid::new(d, GOOD_RADIUS);
    let carriers = carriers(cell, ctx, &grid);
    let steps = &gamma.path.steps;
    let end_disp = gamma.path.position_at(beta);
    for j in 1..steps.len() {
        let (s_j, g_j) = steps[j];
        if s_j > beta {
            break;
        }
        let t = t0 + s_j;
        for x in cell_points(cell, p) {
            if t < t1 - t_path {
                let mut shifted = vec![(t, x)];
                shifted.extend(
                    steps[j + 1..]
                        .iter()
                        .take_while(|s| s.0 <= s_j + t_path)
                        .map(|&(s, g)| (t0 + s, x.add(g.sub(g_j)))),
                );
                let seg = Trajectory {
                    steps: shifted,
                    until: t + t_path,
                };
                let met = carriers
                    .iter()
                    .any(|c| meets(&ctx.trace.particles[c.k].path, &seg, t, t + t_path));
                if !met {
                    return Ok(false);
                }
            } else {
                let z = x.add(end_disp.sub(g_j));
                let inside = (0..d).all(|k| {
                    let base = cell.i.0[k] * l;
                    base - l <= z.0[k] && z.0[k] <= base + 2 * l
                });
                if !inside {
                    return Ok(false);
                }
            }
        }
    }

    for nb in &neighbors {
        if !is_acceptable(nb, ctx)? {
            return Ok(false);
        }
    }
    Ok(true)
}

//! Space-time tessellation: cells, super cells, the auxiliary boxes and the
//! base-height reindexing.
//!
//! Boxes returned by [`region`] are closed and may have fractional corners
//! (`ℓ/3`, `ηℓ/2`); corners are kept as exact rationals. [`cell_of`] instead
//! uses half-open cells so that it is a function.

use num_rational::Ratio;

use crate::dynamics::Trajectory;
use crate::error::{param, Error, Result};
use crate::lattice::{Site, MAX_DIM};

pub type Rational = Ratio<i64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TessellationParams {
    pub ell: u32,
    pub beta: u32,
    pub eta_overlap: u32,
    pub d: usize,
}

impl TessellationParams {
    pub fn new(ell: u32, beta: u32, eta_overlap: u32, d: usize) -> Result<Self> {
        if ell < 3 {
            return param(format!("cell side must be at least 3, got {ell}"));
        }
        if beta == 0 || eta_overlap == 0 {
            return param("time length and overlap factor must be positive");
        }
        if d == 0 || d > MAX_DIM {
            return param(format!("dimension must be in 1..={MAX_DIM}"));
        }
        Ok(TessellationParams {
            ell,
            beta,
            eta_overlap,
            d,
        })
    }

    /// Geometry for point-level events (good points and the super-cell event
    /// built from them), which never use the extended box and so allow any
    /// `ℓ >= 1`.
    pub fn for_points(ell: u32, beta: u32, eta_overlap: u32, d: usize) -> Result<Self> {
        if ell == 0 {
            return param("cell side must be positive");
        }
        let mut p = Self::new(3, beta, eta_overlap, d)?;
        p.ell = ell;
        Ok(p)
    }

    /// `T = ℓ^{5/3}`.
    pub fn path_time(&self) -> f64 {
        (self.ell as f64).powf(5.0 / 3.0)
    }

    pub fn cell_start(&self, tau: i64) -> f64 {
        tau as f64 * self.beta as f64
    }
}

/// Cell `(i, τ)`: spatial box `iℓ + [0, ℓ]^d`, time interval `[τβ, (τ+1)β]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellIndex {
    pub i: Site,
    pub tau: i64,
}

impl CellIndex {
    pub fn new(i: &[i32], tau: i64) -> Self {
        CellIndex { i: Site::new(i), tau }
    }

    pub fn shifted(&self, di: Site, dtau: i64) -> CellIndex {
        CellIndex {
            i: self.i.add(di),
            tau: self.tau + dtau,
        }
    }
}

/// The half-open cell containing `(x, t)`.
pub fn cell_of(x: Site, t: f64, params: &TessellationParams) -> Result<CellIndex> {
    if !(t >= 0.0) {
        return param(format!("time must be non-negative, got {t}"));
    }
    let l = params.ell as i32;
    let mut i = [0i32; MAX_DIM];
    for k in 0..params.d {
        i[k] = x.0[k].div_euclid(l);
    }
    Ok(CellIndex {
        i: Site(i),
        tau: (t / params.beta as f64).floor() as i64,
    })
}

/// Closed box with rational corners.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalBox {
    pub d: usize,
    pub lo: [Rational; MAX_DIM],
    pub hi: [Rational; MAX_DIM],
}

impl RationalBox {
    pub fn new(d: usize, lo: &[Rational], hi: &[Rational]) -> Self {
        let mut l = [Rational::from_integer(0); MAX_DIM];
        let mut h = [Rational::from_integer(0); MAX_DIM];
        l[..d].copy_from_slice(&lo[..d]);
        h[..d].copy_from_slice(&hi[..d]);
        RationalBox { d, lo: l, hi: h }
    }

    /// `offset + [a, b]^d` in every coordinate, with a per-axis integer offset.
    pub fn around(d: usize, offset: Site, a: Rational, b: Rational) -> Self {
        let mut lo = [Rational::from_integer(0); MAX_DIM];
        let mut hi = [Rational::from_integer(0); MAX_DIM];
        for k in 0..d {
            let o = Rational::from_integer(offset.0[k] as i64);
            lo[k] = o + a;
            hi[k] = o + b;
        }
        RationalBox { d, lo, hi }
    }

    /// `Q_r = [-r/2, r/2]^d`.
    pub fn centered_cube(d: usize, r: Rational) -> Self {
        let half = r / 2;
        Self::around(d, Site::ORIGIN, -half, half)
    }

    /// Every lattice site; displacement conditions with this set always hold.
    pub fn whole_space(d: usize) -> Self {
        let big = Rational::from_integer(i64::from(i32::MAX));
        Self::around(d, Site::ORIGIN, -big, big)
    }

    #[inline]
    pub fn contains(&self, x: Site) -> bool {
        (0..self.d).all(|k| {
            let v = Rational::from_integer(x.0[k] as i64);
            self.lo[k] <= v && v <= self.hi[k]
        })
    }

    pub fn contains_box(&self, other: &RationalBox) -> bool {
        (0..self.d).all(|k| self.lo[k] <= other.lo[k] && other.hi[k] <= self.hi[k])
    }

    /// Integer sites inside, as inclusive per-axis bounds.
    pub fn integer_hull(&self) -> (Site, Site) {
        let mut lo = [0i32; MAX_DIM];
        let mut hi = [0i32; MAX_DIM];
        for k in 0..self.d {
            lo[k] = self.lo[k].ceil().to_integer() as i32;
            hi[k] = self.hi[k].floor().to_integer() as i32;
        }
        (Site(lo), Site(hi))
    }

    pub fn sites(&self) -> Vec<Site> {
        let (lo, hi) = self.integer_hull();
        crate::lattice::box_sites(self.d, &lo.0[..self.d], &hi.0[..self.d])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegionKind {
    CellBox,
    SuperBox,
    ExtendedBox,
    QuasiSuperBox,
    SuperInterval,
    SuperCell,
}

/// A spatial box, a time interval, or both.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub space: Option<RationalBox>,
    pub time: Option<(f64, f64)>,
}

/// The closed region of the given kind for `index`.
pub fn region(kind: RegionKind, index: &CellIndex, params: &TessellationParams) -> Region {
    let l = params.ell as i64;
    let eta = params.eta_overlap as i64;
    let d = params.d;
    let r = Rational::from_integer;
    let mut origin = [0i32; MAX_DIM];
    for k in 0..d {
        origin[k] = (index.i.0[k] as i64 * l) as i32;
    }
    let base = Site(origin);
    let b = params.beta as f64;
    let t0 = index.tau as f64 * b;
    let spatial = |a: Rational, z: Rational| Some(RationalBox::around(d, base, a, z));
    match kind {
        RegionKind::CellBox => Region {
            space: spatial(r(0), r(l)),
            time: Some((t0, t0 + b)),
        },
        RegionKind::SuperBox => Region {
            space: spatial(r(-eta * l), r((eta + 1) * l)),
            time: None,
        },
        RegionKind::ExtendedBox => Region {
            space: spatial(Rational::new(-l, 3), r(l) + Rational::new(l, 3)),
            time: None,
        },
        RegionKind::QuasiSuperBox => Region {
            space: spatial(Rational::new(-eta * l, 2), r(l) + Rational::new(eta * l, 2)),
            time: None,
        },
        RegionKind::SuperInterval => Region {
            space: None,
            time: Some((t0, t0 + eta as f64 * b)),
        },
        RegionKind::SuperCell => Region {
            space: spatial(r(-eta * l), r((eta + 1) * l)),
            time: Some((t0, t0 + eta as f64 * b)),
        },
    }
}

/// Spatial box of a region kind (panics for the purely temporal kind).
pub fn space_box(kind: RegionKind, index: &CellIndex, params: &TessellationParams) -> RationalBox {
    region(kind, index, params).space.expect("spatial region kind")
}

/// Whether `traj(t) - traj(t0)` stays in `allowed` for every `t ∈ [t0, t1]`.
pub fn displacement_in(traj: &Trajectory, t0: f64, t1: f64, allowed: &RationalBox) -> Result<bool> {
    if !traj.covers(t0, t1) {
        return Err(Error::Range(format!(
            "trajectory known on [{}, {}] does not cover [{t0}, {t1}]",
            traj.start_time(),
            traj.until
        )));
    }
    let anchor = traj.position_at(t0);
    Ok(traj.sites_in(t0, t1).all(|x| allowed.contains(x.sub(anchor))))
}

/// Base-height coordinates: `h` is the `axis`-th spatial coordinate (1-based);
/// `b` is the remaining spatial coordinates followed by `τ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BaseHeightIndex {
    pub b: Vec<i64>,
    pub h: i64,
    pub axis: usize,
}

pub fn base_height(cell: &CellIndex, d: usize, axis: usize) -> Result<BaseHeightIndex> {
    if axis == 0 || axis > d {
        return param(format!("height axis must be in 1..={d}, got {axis}"));
    }
    let mut b = Vec::with_capacity(d);
    for k in 0..d {
        if k + 1 != axis {
            b.push(cell.i.0[k] as i64);
        }
    }
    b.push(cell.tau);
    Ok(BaseHeightIndex {
        b,
        h: cell.i.0[axis - 1] as i64,
        axis,
    })
}

pub fn from_base_height(bh: &BaseHeightIndex, d: usize) -> Result<CellIndex> {
    if bh.axis == 0 || bh.axis > d || bh.b.len() != d {
        return param("base-height index does not match the dimension");
    }
    let mut i = [0i32; MAX_DIM];
    let mut rest = bh.b[..d - 1].iter();
    for (k, slot) in i.iter_mut().enumerate().take(d) {
        *slot = if k + 1 == bh.axis {
            bh.h as i32
        } else {
            *rest.next().expect("d-1 spatial base coordinates") as i32
        };
    }
    Ok(CellIndex {
        i: Site(i),
        tau: bh.b[d - 1],
    })
}

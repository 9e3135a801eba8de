//! Lattice sites and the finite simulation domain.

use std::fmt;

use crate::error::{param, Result};

/// Largest supported lattice dimension.
pub const MAX_DIM: usize = 4;

/// A site of the integer lattice. Coordinates beyond the domain's dimension are zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Site(pub [i32; MAX_DIM]);

impl Site {
    pub const ORIGIN: Site = Site([0; MAX_DIM]);

    pub fn new(coords: &[i32]) -> Site {
        assert!(coords.len() <= MAX_DIM, "at most {MAX_DIM} coordinates");
        let mut c = [0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Site(c)
    }

    /// Neighbor in direction `dir`, where `dir / 2` is the axis and the low bit the sign.
    #[inline]
    pub fn step(self, dir: usize) -> Site {
        let mut c = self.0;
        if dir & 1 == 0 {
            c[dir >> 1] += 1;
        } else {
            c[dir >> 1] -= 1;
        }
        Site(c)
    }

    pub fn sub(self, other: Site) -> Site {
        let mut c = self.0;
        for (a, b) in c.iter_mut().zip(other.0) {
            *a -= b;
        }
        Site(c)
    }

    pub fn add(self, other: Site) -> Site {
        let mut c = self.0;
        for (a, b) in c.iter_mut().zip(other.0) {
            *a += b;
        }
        Site(c)
    }

    pub fn linf(self) -> i32 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn l1(self) -> i32 {
        self.0.iter().map(|c| c.abs()).sum()
    }

    /// Coordinates as a vector of length `d`.
    pub fn coords(&self, d: usize) -> &[i32] {
        &self.0[..d]
    }

    /// Key words for random-stream derivation.
    pub fn key_words(&self, d: usize) -> impl Iterator<Item = i64> + '_ {
        self.0[..d].iter().map(|&c| c as i64)
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let last = self.0.iter().rposition(|&c| c != 0).unwrap_or(0);
        write!(f, "(")?;
        for (k, c) in self.0[..=last].iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    /// Walkers move freely on the infinite lattice; only the enlarged box is populated.
    Halo,
    /// Walkers live on the torus of side `L`.
    Periodic,
}

/// The finite window of the lattice that gets populated at time zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatticeDomain {
    pub d: usize,
    pub side: u32,
    pub boundary: Boundary,
    pub halo_margin: u32,
}

impl LatticeDomain {
    pub fn new(d: usize, side: u32, boundary: Boundary, halo_margin: u32) -> Result<Self> {
        if d == 0 || d > MAX_DIM {
            return param(format!("dimension must be in 1..={MAX_DIM}, got {d}"));
        }
        if side == 0 {
            return param("box side L must be at least 1");
        }
        Ok(LatticeDomain {
            d,
            side,
            boundary,
            halo_margin,
        })
    }

    pub fn halo(d: usize, side: u32, halo_margin: u32) -> Result<Self> {
        Self::new(d, side, Boundary::Halo, halo_margin)
    }

    pub fn periodic(d: usize, side: u32) -> Result<Self> {
        Self::new(d, side, Boundary::Periodic, 0)
    }

    /// Default margin for a horizon: `ceil(4 * horizon)` sites.
    pub fn default_margin(horizon: f64) -> u32 {
        (4.0 * horizon).ceil().max(0.0) as u32
    }

    /// Inclusive coordinate range of the inner (observation) box.
    pub fn inner_range(&self) -> (i32, i32) {
        let lo = -((self.side / 2) as i32);
        (lo, lo + self.side as i32 - 1)
    }

    /// Inclusive coordinate range of the simulated region.
    pub fn outer_range(&self) -> (i32, i32) {
        let (lo, hi) = self.inner_range();
        match self.boundary {
            Boundary::Halo => (lo - self.halo_margin as i32, hi + self.halo_margin as i32),
            Boundary::Periodic => (lo, hi),
        }
    }

    pub fn in_inner(&self, x: Site) -> bool {
        let (lo, hi) = self.inner_range();
        x.0[..self.d].iter().all(|&c| c >= lo && c <= hi)
    }

    /// Whether `x` lies on the outermost layer of the simulated region or beyond it.
    pub fn on_or_beyond_shell(&self, x: Site) -> bool {
        if self.boundary == Boundary::Periodic {
            return false;
        }
        let (lo, hi) = self.outer_range();
        x.0[..self.d].iter().any(|&c| c <= lo || c >= hi)
    }

    /// Wrap a site into the torus (identity in halo mode).
    #[inline]
    pub fn wrap(&self, x: Site) -> Site {
        if self.boundary == Boundary::Halo {
            return x;
        }
        let (lo, _) = self.inner_range();
        let n = self.side as i32;
        let mut c = x.0;
        for v in c[..self.d].iter_mut() {
            *v = (*v - lo).rem_euclid(n) + lo;
        }
        Site(c)
    }

    /// All sites of the simulated region in lexicographic order.
    pub fn sites(&self) -> Vec<Site> {
        let (lo, hi) = self.outer_range();
        box_sites(self.d, &[lo; MAX_DIM][..self.d], &[hi; MAX_DIM][..self.d])
    }

    pub fn num_sites(&self) -> u64 {
        let (lo, hi) = self.outer_range();
        ((hi - lo + 1) as u64).pow(self.d as u32)
    }
}

/// Lexicographic enumeration of the integer box `lo..=hi` (per coordinate).
pub fn box_sites(d: usize, lo: &[i32], hi: &[i32]) -> Vec<Site> {
    if (0..d).any(|k| lo[k] > hi[k]) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut cur = [0i32; MAX_DIM];
    cur[..d].copy_from_slice(&lo[..d]);
    loop {
        out.push(Site(cur));
        let mut k = d;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if cur[k] < hi[k] {
                cur[k] += 1;
                for j in k + 1..d {
                    cur[j] = lo[j];
                }
                break;
            }
        }
    }
}

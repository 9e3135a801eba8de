//! Lipschitz surfaces on finite base windows: validation, minimal good
//! surfaces of a cell-event field, an exhaustive oracle, and diagnostics.

mod io;

pub use io::{read_field, read_surface, write_field, write_surface, FieldMeta, SurfaceRecord};

use std::collections::VecDeque;

use crate::error::{param, Error, Result};

/// Inclusive box of base points `lo ..= hi` in `Z^d`, enumerated
/// lexicographically (last coordinate fastest).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BaseWindow {
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
}

impl BaseWindow {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return param("base window corners must have the same positive length");
        }
        if lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return param(format!("empty base window {lo:?} ..= {hi:?}"));
        }
        Ok(BaseWindow { lo, hi })
    }

    /// `n` columns on a line starting at 0.
    pub fn line(n: usize) -> Result<Self> {
        if n == 0 {
            return param("a window needs at least one column");
        }
        Self::new(vec![0], vec![n as i64 - 1])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    fn extent(&self, k: usize) -> usize {
        (self.hi[k] - self.lo[k] + 1) as usize
    }

    pub fn len(&self) -> usize {
        (0..self.dim()).map(|k| self.extent(k)).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, b: &[i64]) -> bool {
        b.len() == self.dim() && (0..self.dim()).all(|k| self.lo[k] <= b[k] && b[k] <= self.hi[k])
    }

    pub fn index_of(&self, b: &[i64]) -> Option<usize> {
        if !self.contains(b) {
            return None;
        }
        Some((0..self.dim()).fold(0, |acc, k| acc * self.extent(k) + (b[k] - self.lo[k]) as usize))
    }

    pub fn point(&self, mut idx: usize) -> Vec<i64> {
        let mut b = vec![0; self.dim()];
        for k in (0..self.dim()).rev() {
            let e = self.extent(k);
            b[k] = self.lo[k] + (idx % e) as i64;
            idx /= e;
        }
        b
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }

    /// Indices of the nearest neighbors of column `idx` inside the window.
    pub fn neighbors(&self, idx: usize) -> Vec<usize> {
        let b = self.point(idx);
        let mut out = Vec::with_capacity(2 * self.dim());
        let mut stride = 1;
        for k in (0..self.dim()).rev() {
            if b[k] > self.lo[k] {
                out.push(idx - stride);
            }
            if b[k] < self.hi[k] {
                out.push(idx + stride);
            }
            stride *= self.extent(k);
        }
        out
    }
}

/// Indicator of a cell event on the columns of a base window, at heights
/// `0 ..= h_max`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellEventField {
    pub window: BaseWindow,
    pub h_max: u32,
    values: Vec<bool>,
}

impl CellEventField {
    pub fn from_fn(window: BaseWindow, h_max: u32, mut f: impl FnMut(&[i64], u32) -> bool) -> Self {
        let mut values = Vec::with_capacity(window.len() * (h_max as usize + 1));
        for b in window.points() {
            for h in 0..=h_max {
                values.push(f(&b, h));
            }
        }
        CellEventField { window, h_max, values }
    }

    pub fn constant(window: BaseWindow, h_max: u32, value: bool) -> Self {
        Self::from_fn(window, h_max, |_, _| value)
    }

    /// Columns of a line window that are good exactly at heights `>= m`
    /// (`None` for an entirely bad column).
    pub fn from_thresholds(thresholds: &[Option<u32>], h_max: u32) -> Result<Self> {
        let window = BaseWindow::line(thresholds.len())?;
        Ok(Self::from_fn(window, h_max, |b, h| {
            thresholds[b[0] as usize].is_some_and(|m| h >= m)
        }))
    }

    fn slot(&self, col: usize, h: u32) -> usize {
        col * (self.h_max as usize + 1) + h as usize
    }

    /// Value at column index `col` and height `h` (false above `h_max`).
    pub fn at(&self, col: usize, h: u32) -> bool {
        h <= self.h_max && self.values[self.slot(col, h)]
    }

    pub fn get(&self, b: &[i64], h: u32) -> Option<bool> {
        let col = self.window.index_of(b)?;
        (h <= self.h_max).then(|| self.at(col, h))
    }

    pub fn set(&mut self, col: usize, h: u32, value: bool) {
        let s = self.slot(col, h);
        self.values[s] = value;
    }

    /// Smallest good height `>= from` in column `col`.
    fn next_good(&self, col: usize, from: u32) -> Option<u32> {
        (from..=self.h_max).find(|&h| self.at(col, h))
    }
}

/// Outcome of a surface extraction: heights per column in window order, or
/// the first column where no admissible good height exists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Extraction {
    Feasible(Vec<u32>),
    Infeasible { column: Vec<i64> },
}

impl Extraction {
    pub fn heights(&self) -> Option<&[u32]> {
        match self {
            Extraction::Feasible(f) => Some(f),
            Extraction::Infeasible { .. } => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, Extraction::Feasible(_))
    }
}

/// `|F(b) - F(b')| <= 1` for all adjacent columns, equivalent to the
/// 1-norm Lipschitz condition on a box.
pub fn is_lipschitz(f: &[u32], window: &BaseWindow) -> bool {
    f.len() == window.len()
        && (0..f.len()).all(|i| window.neighbors(i).iter().all(|&j| f[i].abs_diff(f[j]) <= 1))
}

/// The pointwise-minimal Lipschitz `F` with every `(b, F(b))` good and
/// `F <= h_max`, found as the least fixed point of raising columns to the
/// next good height above their neighbors minus one. The window boundary is
/// free.
pub fn extract_minimal_surface(field: &CellEventField) -> Extraction {
    let w = &field.window;
    let mut f = Vec::with_capacity(w.len());
    for col in 0..w.len() {
        match field.next_good(col, 0) {
            Some(h) => f.push(h),
            None => return Extraction::Infeasible { column: w.point(col) },
        }
    }
    let neighbors: Vec<Vec<usize>> = (0..w.len()).map(|i| w.neighbors(i)).collect();
    loop {
        let mut changed = false;
        for col in 0..w.len() {
            let need = neighbors[col].iter().map(|&j| f[j]).max().unwrap_or(0).saturating_sub(1);
            if f[col] < need {
                match field.next_good(col, need) {
                    Some(h) => f[col] = h,
                    None => return Extraction::Infeasible { column: w.point(col) },
                }
                changed = true;
            }
        }
        if !changed {
            return Extraction::Feasible(f);
        }
    }
}

/// Largest window the exhaustive oracle accepts.
pub const BRUTE_FORCE_MAX_COLUMNS: usize = 8;
pub const BRUTE_FORCE_MAX_HEIGHT: u32 = 5;

/// Exhaustive oracle: enumerate every function into the good heights,
/// keep the Lipschitz ones and return their pointwise minimum.
pub fn brute_force_minimal_surface(field: &CellEventField) -> Result<Extraction> {
    let w = &field.window;
    if w.len() > BRUTE_FORCE_MAX_COLUMNS || field.h_max > BRUTE_FORCE_MAX_HEIGHT {
        return Err(Error::Guard(format!(
            "exhaustive search limited to {BRUTE_FORCE_MAX_COLUMNS} columns and h_max {BRUTE_FORCE_MAX_HEIGHT}"
        )));
    }
    let options: Vec<Vec<u32>> = (0..w.len())
        .map(|c| (0..=field.h_max).filter(|&h| field.at(c, h)).collect())
        .collect();
    if let Some(c) = options.iter().position(Vec::is_empty) {
        return Ok(Extraction::Infeasible { column: w.point(c) });
    }
    let mut digits = vec![0usize; w.len()];
    let mut best: Option<Vec<u32>> = None;
    loop {
        let f: Vec<u32> = digits.iter().zip(&options).map(|(&k, o)| o[k]).collect();
        if is_lipschitz(&f, w) {
            best = Some(match best {
                None => f,
                Some(b) => b.iter().zip(&f).map(|(x, y)| *x.min(y)).collect(),
            });
        }
        let mut k = 0;
        loop {
            if k == digits.len() {
                return Ok(match best {
                    Some(f) => Extraction::Feasible(f),
                    // No admissible function at all; blame the first column.
                    None => Extraction::Infeasible { column: w.point(0) },
                });
            }
            digits[k] += 1;
            if digits[k] < options[k].len() {
                break;
            }
            digits[k] = 0;
            k += 1;
        }
    }
}

/// Heights of the upper and lower sheets over a common base window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LipschitzSurface {
    pub window: BaseWindow,
    pub f_plus: Vec<u32>,
    pub f_minus: Vec<u32>,
}

/// Both sides of a two-sided extraction, each feasible or not.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoSided {
    pub window: BaseWindow,
    pub plus: Extraction,
    pub minus: Extraction,
}

impl TwoSided {
    pub fn surface(&self) -> Option<LipschitzSurface> {
        Some(LipschitzSurface {
            window: self.window.clone(),
            f_plus: self.plus.heights()?.to_vec(),
            f_minus: self.minus.heights()?.to_vec(),
        })
    }
}

/// Minimal surfaces of the upward and downward fields (heights `h` of the
/// downward field stand for `-h`).
pub fn extract_two_sided(up: &CellEventField, down: &CellEventField) -> Result<TwoSided> {
    if up.window != down.window {
        return param("upward and downward fields must share the base window");
    }
    Ok(TwoSided {
        window: up.window.clone(),
        plus: extract_minimal_surface(up),
        minus: extract_minimal_surface(down),
    })
}

/// Finite-window proxy for a surface surrounding the origin: both sides
/// exist over a window containing the origin's base point.
pub fn surrounds_origin(surface: &TwoSided) -> Result<bool> {
    let origin = vec![0; surface.window.dim()];
    if !surface.window.contains(&origin) {
        return param("base window does not contain the origin");
    }
    Ok(surface.plus.is_feasible() && surface.minus.is_feasible())
}

/// Connected components of the zero set of `F`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PercolationReport {
    pub zero_columns: usize,
    pub components: usize,
    pub largest: usize,
    /// Some component touches two opposite faces of the window.
    pub spans: bool,
}

pub fn zero_height_percolation(f: &[u32], window: &BaseWindow) -> Result<PercolationReport> {
    if f.len() != window.len() {
        return param(format!("{} heights for a window of {} columns", f.len(), window.len()));
    }
    let d = window.dim();
    let mut seen = vec![false; f.len()];
    let mut report = PercolationReport::default();
    for start in 0..f.len() {
        if f[start] != 0 || seen[start] {
            continue;
        }
        seen[start] = true;
        let mut size = 0;
        let mut low = vec![false; d];
        let mut high = vec![false; d];
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            size += 1;
            let b = window.point(i);
            for k in 0..d {
                low[k] |= b[k] == window.lo[k];
                high[k] |= b[k] == window.hi[k];
            }
            for j in window.neighbors(i) {
                if f[j] == 0 && !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        report.zero_columns += size;
        report.components += 1;
        report.largest = report.largest.max(size);
        report.spans |= (0..d).any(|k| low[k] && high[k]);
    }
    Ok(report)
}

#[cfg(test)]
mod tests;

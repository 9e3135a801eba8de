//! Text format. A header line `d ell beta eta axis h_max`, then for fields
//! one line `b_1 .. b_d h v` per column and height with `v` in {0, 1}, and for
//! surfaces one line `b_1 .. b_d F+ F-` per column, `-` marking an
//! infeasible side.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use super::{BaseWindow, CellEventField, TwoSided};
use crate::error::{Error, Result};

/// Tessellation parameters recorded with a field or surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldMeta {
    pub d: usize,
    pub ell: u32,
    pub beta: u32,
    pub eta: u32,
    pub axis: usize,
}

fn bad(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Format(format!("line {line}: {msg}"))
}

fn write_header(w: &mut impl Write, m: &FieldMeta, h_max: u32) -> Result<()> {
    writeln!(w, "{} {} {} {} {} {}", m.d, m.ell, m.beta, m.eta, m.axis, h_max)?;
    Ok(())
}

fn join(b: &[i64]) -> String {
    b.iter().map(i64::to_string).collect::<Vec<_>>().join(" ")
}

pub fn write_field(mut w: impl Write, meta: &FieldMeta, field: &CellEventField) -> Result<()> {
    if field.window.dim() != meta.d {
        return Err(Error::Format("field base dimension differs from the header".into()));
    }
    write_header(&mut w, meta, field.h_max)?;
    for (col, b) in field.window.points().enumerate() {
        let b = join(&b);
        for h in 0..=field.h_max {
            writeln!(w, "{b} {h} {}", u8::from(field.at(col, h)))?;
        }
    }
    Ok(())
}

/// Non-blank lines with their 1-based numbers.
fn lines(r: impl BufRead) -> Result<Vec<(usize, String)>> {
    let mut out = Vec::new();
    for (k, line) in r.lines().enumerate() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push((k + 1, line));
        }
    }
    Ok(out)
}

fn parse_header(lines: &[(usize, String)]) -> Result<(FieldMeta, u32)> {
    let (n, first) = lines.first().ok_or_else(|| Error::Format("empty input".into()))?;
    let v: Vec<u64> = first
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| bad(*n, format!("bad header value {t:?}"))))
        .collect::<Result<_>>()?;
    if v.len() != 6 {
        return Err(bad(*n, "header must be `d ell beta eta axis h_max`"));
    }
    if v[0] == 0 || v[0] > crate::lattice::MAX_DIM as u64 {
        return Err(bad(*n, "dimension out of range"));
    }
    let meta = FieldMeta {
        d: v[0] as usize,
        ell: v[1] as u32,
        beta: v[2] as u32,
        eta: v[3] as u32,
        axis: v[4] as usize,
    };
    Ok((meta, v[5] as u32))
}

fn bounding_window<'a>(points: impl Iterator<Item = &'a Vec<i64>>, d: usize) -> Result<BaseWindow> {
    let mut lo = vec![i64::MAX; d];
    let mut hi = vec![i64::MIN; d];
    let mut any = false;
    for b in points {
        any = true;
        for k in 0..d {
            lo[k] = lo[k].min(b[k]);
            hi[k] = hi[k].max(b[k]);
        }
    }
    if !any {
        return Err(Error::Format("no data lines".into()));
    }
    BaseWindow::new(lo, hi)
}

pub fn read_field(r: impl BufRead) -> Result<(FieldMeta, CellEventField)> {
    let lines = lines(r)?;
    let (meta, h_max) = parse_header(&lines)?;
    let d = meta.d;
    let mut cells: BTreeMap<Vec<i64>, Vec<Option<bool>>> = BTreeMap::new();
    for (n, line) in &lines[1..] {
        let v: Vec<i64> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad(*n, format!("bad value {t:?}"))))
            .collect::<Result<_>>()?;
        if v.len() != d + 2 {
            return Err(bad(*n, format!("expected {} values", d + 2)));
        }
        let h = v[d];
        if h < 0 || h > h_max as i64 {
            return Err(bad(*n, format!("height {h} outside 0..={h_max}")));
        }
        let value = match v[d + 1] {
            0 => false,
            1 => true,
            x => return Err(bad(*n, format!("indicator must be 0 or 1, got {x}"))),
        };
        let col = cells.entry(v[..d].to_vec()).or_insert_with(|| vec![None; h_max as usize + 1]);
        if col[h as usize].replace(value).is_some() {
            return Err(bad(*n, "duplicate entry"));
        }
    }
    let window = bounding_window(cells.keys(), d)?;
    if cells.len() != window.len() {
        return Err(Error::Format("columns do not fill a box".into()));
    }
    let mut missing = None;
    let field = CellEventField::from_fn(window, h_max, |b, h| {
        let v = cells[b][h as usize];
        if v.is_none() && missing.is_none() {
            missing = Some((b.to_vec(), h));
        }
        v.unwrap_or(false)
    });
    if let Some((b, h)) = missing {
        return Err(Error::Format(format!("no value for column {b:?} at height {h}")));
    }
    Ok((meta, field))
}

pub fn write_surface(mut w: impl Write, meta: &FieldMeta, h_max: u32, s: &TwoSided) -> Result<()> {
    write_header(&mut w, meta, h_max)?;
    let side = |e: &super::Extraction, i: usize| e.heights().map_or("-".to_string(), |f| f[i].to_string());
    for (i, b) in s.window.points().enumerate() {
        writeln!(w, "{} {} {}", join(&b), side(&s.plus, i), side(&s.minus, i))?;
    }
    Ok(())
}

/// A surface file: the header, and each side's heights in window order
/// (`None` when that side was infeasible).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurfaceRecord {
    pub meta: FieldMeta,
    pub h_max: u32,
    pub window: BaseWindow,
    pub plus: Option<Vec<u32>>,
    pub minus: Option<Vec<u32>>,
}

pub fn read_surface(r: impl BufRead) -> Result<SurfaceRecord> {
    let lines = lines(r)?;
    let (meta, h_max) = parse_header(&lines)?;
    let d = meta.d;
    let mut rows: BTreeMap<Vec<i64>, (Option<u32>, Option<u32>)> = BTreeMap::new();
    for (n, line) in &lines[1..] {
        let t: Vec<&str> = line.split_whitespace().collect();
        if t.len() != d + 2 {
            return Err(bad(*n, format!("expected {} values", d + 2)));
        }
        let b: Vec<i64> = t[..d]
            .iter()
            .map(|x| x.parse().map_err(|_| bad(*n, format!("bad coordinate {x:?}"))))
            .collect::<Result<_>>()?;
        let h = |x: &str| -> Result<Option<u32>> {
            if x == "-" {
                Ok(None)
            } else {
                x.parse().map(Some).map_err(|_| bad(*n, format!("bad height {x:?}")))
            }
        };
        if rows.insert(b, (h(t[d])?, h(t[d + 1])?)).is_some() {
            return Err(bad(*n, "duplicate column"));
        }
    }
    let window = bounding_window(rows.keys(), d)?;
    if rows.len() != window.len() {
        return Err(Error::Format("columns do not fill a box".into()));
    }
    let ordered: Vec<(Option<u32>, Option<u32>)> = window.points().map(|b| rows[&b]).collect();
    let side = |pick: fn(&(Option<u32>, Option<u32>)) -> Option<u32>| -> Result<Option<Vec<u32>>> {
        let v: Vec<Option<u32>> = ordered.iter().map(pick).collect();
        if v.iter().all(Option::is_none) {
            Ok(None)
        } else {
            v.into_iter()
                .collect::<Option<Vec<u32>>>()
                .map(Some)
                .ok_or_else(|| Error::Format("a side mixes heights and `-`".into()))
        }
    };
    Ok(SurfaceRecord {
        meta,
        h_max,
        plus: side(|r| r.0)?,
        minus: side(|r| r.1)?,
        window,
    })
}

use crate::cell_events::{holds_e_tilde, is_acceptable, is_good_cell, sample_distinguished_path, CellCheckContext};
use crate::dynamics::{sample_cloud_trace, wander_margin, Recovery, TraceSet};
use crate::error::{param, Result};
use crate::rng::derive_seed;
use crate::surface::{BaseWindow, CellEventField, FieldMeta};
use crate::tessellation::{from_base_height, BaseHeightIndex, CellIndex, TessellationParams};

/// Which indicator to evaluate on each cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellEvent {
    Acceptable,
    Good,
    ETilde,
}

impl CellEvent {
    pub const ALL: [CellEvent; 3] = [CellEvent::Acceptable, CellEvent::Good, CellEvent::ETilde];

    pub fn name(self) -> &'static str {
        match self {
            CellEvent::Acceptable => "acceptable",
            CellEvent::Good => "good",
            CellEvent::ETilde => "e_tilde",
        }
    }
}

/// A block of cells around the origin: `width` layers in time starting at
/// `tau = 0`, `width` cells along each non-height axis, heights
/// `-h_max..=h_max` along `axis`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellFieldSpec {
    pub params: TessellationParams,
    pub rho: f64,
    pub lambda: f64,
    pub axis: usize,
    pub h_max: u32,
    pub width: u32,
    pub seed: u64,
}

/// Upward and downward indicator fields of one event; the downward field at
/// height `h` describes the cell at height `-h`.
#[derive(Debug, Clone, PartialEq)]
pub struct EventFields {
    pub event: CellEvent,
    pub up: CellEventField,
    pub down: CellEventField,
}

impl CellFieldSpec {
    pub fn meta(&self) -> FieldMeta {
        FieldMeta {
            d: self.params.d,
            ell: self.params.ell,
            beta: self.params.beta,
            eta: self.params.eta_overlap,
            axis: self.axis,
        }
    }

    pub fn base_window(&self) -> Result<BaseWindow> {
        let d = self.params.d;
        if self.width == 0 {
            return param("width must be positive");
        }
        if self.axis == 0 || self.axis > d {
            return param(format!("height axis must be in 1..={d}, got {}", self.axis));
        }
        let w = self.width as i64;
        let mut lo = vec![-(w / 2); d - 1];
        let mut hi: Vec<i64> = lo.iter().map(|l| l + w - 1).collect();
        lo.push(0);
        hi.push(w - 1);
        BaseWindow::new(lo, hi)
    }

    fn horizon(&self) -> f64 {
        let p = &self.params;
        let beta = p.beta as f64;
        let reach = beta.max(p.path_time()).max(p.eta_overlap as f64 * beta);
        self.width as f64 * beta + reach + beta + 1.0
    }

    /// Free cloud covering every super box the evaluation touches.
    pub fn sample_trace(&self) -> Result<TraceSet> {
        let window = self.base_window()?;
        let p = &self.params;
        let d = p.d;
        let l = p.ell as i32;
        let eta = p.eta_overlap as i32;
        let mut lo = vec![0i32; d];
        let mut hi = vec![0i32; d];
        let mut rest = 0;
        for k in 0..d {
            let (a, b) = if k + 1 == self.axis {
                (-(self.h_max as i32), self.h_max as i32)
            } else {
                let r = (window.lo[rest] as i32, window.hi[rest] as i32);
                rest += 1;
                r
            };
            lo[k] = (a - 1) * l - eta * l;
            hi[k] = (b + 1) * l + (eta + 1) * l;
        }
        let horizon = self.horizon();
        sample_cloud_trace(self.rho, self.lambda, d, &lo, &hi, wander_margin(horizon, 1e-9), horizon, self.seed)
    }

    fn cell_at(&self, b: &[i64], h: i64) -> Result<CellIndex> {
        from_base_height(
            &BaseHeightIndex {
                b: b.to_vec(),
                h,
                axis: self.axis,
            },
            self.params.d,
        )
    }

    /// Evaluate `events` on every cell of the block from one sampled cloud.
    pub fn evaluate(&self, events: &[CellEvent]) -> Result<Vec<EventFields>> {
        let recovery = Recovery::from_lambda(self.lambda)?;
        let window = self.base_window()?;
        let trace = self.sample_trace()?;
        let ctx = CellCheckContext::new(&trace, self.params, recovery)?;
        let points = TessellationParams::for_points(self.params.ell, self.params.beta, self.params.eta_overlap, self.params.d)?;
        let path_seed = derive_seed(self.seed, &[1]);
        let eval = |event: CellEvent, cell: &CellIndex| -> Result<bool> {
            match event {
                CellEvent::Acceptable => is_acceptable(cell, &ctx),
                CellEvent::Good => {
                    let gamma = sample_distinguished_path(cell, recovery, self.params.beta as f64, path_seed, self.params.d)?;
                    is_good_cell(cell, &ctx, &gamma)
                }
                CellEvent::ETilde => holds_e_tilde(&trace, cell, &points),
            }
        };
        let mut out = Vec::new();
        for &event in events {
            let mut up = CellEventField::constant(window.clone(), self.h_max, false);
            let mut down = up.clone();
            for (col, b) in window.points().enumerate() {
                for h in 0..=self.h_max {
                    up.set(col, h, eval(event, &self.cell_at(&b, h as i64)?)?);
                    down.set(col, h, eval(event, &self.cell_at(&b, -(h as i64))?)?);
                }
            }
            out.push(EventFields { event, up, down });
        }
        Ok(out)
    }
}

use std::io::Write;

use super::{estimate, variant_name, ExperimentSpec, Manifest};
use crate::error::{param, Result};
use crate::stats::Estimate;

/// Grid of densities and recovery rates around a base experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: ExperimentSpec,
    pub rhos: Vec<f64>,
    pub lambdas: Vec<f64>,
}

/// One grid point. A failed point keeps its coordinates and the message.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub spec: ExperimentSpec,
    pub survival: Option<Estimate>,
    pub local: Option<Estimate>,
    pub error: Option<String>,
}

pub const SWEEP_HEADER: &str =
    "rho,lambda,variant,d,L,horizon,n,p_survive,ci_low,ci_high,p_local_given_survive,ci_low2,ci_high2,flagged";

/// Estimates at every `(rho, lambda)` grid point, density-major. Every point
/// uses the same replica seeds, which couples the rows pathwise.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    if spec.rhos.is_empty() || spec.lambdas.is_empty() {
        return param("sweep grids must be non-empty");
    }
    let mut rows = Vec::new();
    for &rho in &spec.rhos {
        for &lambda in &spec.lambdas {
            let point = ExperimentSpec {
                rho,
                lambda,
                ..spec.base
            };
            rows.push(match estimate(&point) {
                Ok(e) => SweepRow {
                    spec: point,
                    survival: Some(e.survival),
                    local: e.local_given_survival,
                    error: None,
                },
                Err(err) => SweepRow {
                    spec: point,
                    survival: None,
                    local: None,
                    error: Some(err.to_string()),
                },
            });
        }
    }
    Ok(rows)
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

/// CSV table; missing values are `NA`.
pub fn write_sweep_csv(mut w: impl Write, rows: &[SweepRow]) -> Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for r in rows {
        let s = &r.spec;
        let sv = r.survival.as_ref();
        let lc = r.local.as_ref();
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            s.rho,
            s.lambda,
            variant_name(s.variant),
            s.d,
            s.side,
            s.horizon,
            sv.map_or_else(|| "NA".to_string(), |e| e.n.to_string()),
            opt(sv.map(|e| e.p)),
            opt(sv.map(|e| e.ci_low)),
            opt(sv.map(|e| e.ci_high)),
            opt(lc.map(|e| e.p)),
            opt(lc.map(|e| e.ci_low)),
            opt(lc.map(|e| e.ci_high)),
            sv.map_or_else(|| "NA".to_string(), |e| e.flagged.to_string()),
        )?;
    }
    Ok(())
}

/// Per-row errors, for the manifest.
pub fn record_errors(rows: &[SweepRow], m: &mut Manifest) {
    for (k, r) in rows.iter().enumerate() {
        if let Some(e) = &r.error {
            m.push(&format!("error.row{k}"), e);
        }
    }
}

use rayon::prelude::*;

use crate::cell_events::{holds_e_tilde, TransitCounts};
use crate::dynamics::{sample_cloud_trace, wander_margin};
use crate::error::{param, Result};
use crate::lattice::{box_sites, Site, MAX_DIM};
use crate::rng::derive_seed;
use crate::stats::{correlation, mean, poisson_chi_square, ChiSquare, Estimate};
use crate::tessellation::{CellIndex, TessellationParams};

/// Fit of one count variable against its Poisson law.
#[derive(Debug, Clone, PartialEq)]
pub struct CountFit {
    /// `N0` for stayers, `N+1`, `N-1`, `N+2`, ... for first jumps along each axis.
    pub name: String,
    pub expected_mean: f64,
    pub observed_mean: f64,
    pub chi_square: ChiSquare,
}

/// Result of [`verify_thinning`].
#[derive(Debug, Clone, PartialEq)]
pub struct ThinningReport {
    pub rho: f64,
    pub d: usize,
    pub samples: usize,
    pub fits: Vec<CountFit>,
    /// `(a, b, r)` for every pair of count variables.
    pub correlations: Vec<(usize, usize, f64)>,
    /// Largest tolerated `|r|`: three standard errors, `3 / sqrt(samples)`.
    pub correlation_limit: f64,
    pub passed: bool,
}

impl ThinningReport {
    pub fn render(&self) -> String {
        let mut s = format!("thinning rho={} d={} samples={}\n", self.rho, self.d, self.samples);
        for f in &self.fits {
            s += &format!(
                "{} expected_mean={:.6} observed_mean={:.6} chi2={:.4} dof={} p={:.4} {}\n",
                f.name,
                f.expected_mean,
                f.observed_mean,
                f.chi_square.statistic,
                f.chi_square.dof,
                f.chi_square.p_value,
                if f.chi_square.p_value > 0.01 { "ok" } else { "FAIL" }
            );
        }
        for &(a, b, r) in &self.correlations {
            let ok = r.abs() <= self.correlation_limit;
            s += &format!(
                "corr {} {} r={:.5} limit={:.5} {}\n",
                self.fits[a].name,
                self.fits[b].name,
                r,
                self.correlation_limit,
                if ok { "ok" } else { "FAIL" }
            );
        }
        s += if self.passed { "PASS\n" } else { "FAIL\n" };
        s
    }
}

fn direction_name(u: usize) -> String {
    format!("N{}{}", if u.is_multiple_of(2) { '+' } else { '-' }, u / 2 + 1)
}

/// Transit counts at `samples` distinct sites at time 1 of one stationary cloud.
/// At a fixed time the site populations of the cloud are i.i.d., so these are
/// independent draws of the per-point counts.
pub fn point_counts(rho: f64, d: usize, samples: usize, seed: u64) -> Result<Vec<TransitCounts>> {
    if d == 0 || d > MAX_DIM {
        return param(format!("dimension must be in 1..={MAX_DIM}, got {d}"));
    }
    if samples == 0 {
        return param("at least one sample is required");
    }
    let side = (samples as f64).powf(1.0 / d as f64).ceil() as i32;
    let hi = vec![side - 1; d];
    let lo = vec![0; d];
    let trace = sample_cloud_trace(rho, 0.0, d, &lo, &hi, wander_margin(2.0, 1e-12), 2.0, seed)?;
    let sites = box_sites(d, &lo, &hi);
    let index = |x: Site| {
        let mut k = 0usize;
        for a in (0..d).rev() {
            if x.0[a] < 0 || x.0[a] >= side {
                return None;
            }
            k = k * side as usize + x.0[a] as usize;
        }
        Some(k)
    };
    let mut counts = vec![
        TransitCounts {
            jumps: vec![0; 2 * d],
            stay: 0
        };
        sites.len()
    ];
    for p in &trace.particles {
        let x = p.path.position_at(1.0);
        let Some(k) = index(x) else { continue };
        match p.path.first_jump_in(1.0, 2.0) {
            Some((_, y)) => {
                let diff = y.sub(x);
                let a = (0..d).find(|&a| diff.0[a] != 0).expect("a jump changes the site");
                counts[k].jumps[2 * a + usize::from(diff.0[a] < 0)] += 1;
            }
            None => counts[k].stay += 1,
        }
    }
    // Keep the first `samples` sites in lexicographic order.
    let keep: Vec<usize> = sites.iter().take(samples).map(|&x| index(x).expect("inside")).collect();
    Ok(keep.into_iter().map(|k| counts[k].clone()).collect())
}

/// Check that the stay and first-jump counts at a point are independent
/// Poisson variables with means `e^{-1} rho` and `(1 - e^{-1}) rho / (2d)`.
pub fn verify_thinning(rho: f64, d: usize, samples: usize, seed: u64) -> Result<ThinningReport> {
    if samples < 10_000 {
        return param(format!("at least 10000 samples are required, got {samples}"));
    }
    let counts = point_counts(rho, d, samples, seed)?;
    let e1 = (-1.0f64).exp();
    let mut columns: Vec<(String, f64, Vec<u32>)> =
        vec![("N0".into(), e1 * rho, counts.iter().map(|c| c.stay).collect())];
    for u in 0..2 * d {
        columns.push((
            direction_name(u),
            (1.0 - e1) * rho / (2 * d) as f64,
            counts.iter().map(|c| c.jumps[u]).collect(),
        ));
    }
    let fits: Vec<CountFit> = columns
        .iter()
        .map(|(name, m, xs)| CountFit {
            name: name.clone(),
            expected_mean: *m,
            observed_mean: mean(&xs.iter().map(|&v| v as f64).collect::<Vec<_>>()),
            chi_square: poisson_chi_square(xs, *m),
        })
        .collect();
    let as_f64: Vec<Vec<f64>> = columns
        .iter()
        .map(|c| c.2.iter().map(|&v| v as f64).collect())
        .collect();
    let mut correlations = Vec::new();
    for a in 0..as_f64.len() {
        for b in a + 1..as_f64.len() {
            correlations.push((a, b, correlation(&as_f64[a], &as_f64[b])));
        }
    }
    let correlation_limit = 3.0 / (samples as f64).sqrt();
    let passed = fits.iter().all(|f| f.chi_square.p_value > 0.01)
        && correlations.iter().all(|c| c.2.abs() <= correlation_limit);
    Ok(ThinningReport {
        rho,
        d,
        samples,
        fits,
        correlations,
        correlation_limit,
        passed,
    })
}

/// Empirical frequency of good points, to compare with
/// [`crate::cell_events::good_point_probability`].
pub fn good_point_frequency(rho: f64, d: usize, samples: usize, seed: u64) -> Result<Estimate> {
    let counts = point_counts(rho, d, samples, seed)?;
    let good = counts.iter().filter(|c| c.is_good()).count();
    Ok(Estimate::from_counts(good as u64, counts.len() as u64))
}

/// Frequency with which some point of a super cell fails to be good, over
/// `samples` independent clouds around the cell `(0, 0)`.
pub fn e_tilde_failure_frequency(rho: f64, params: &TessellationParams, samples: u64, seed: u64) -> Result<Estimate> {
    if samples == 0 {
        return param("at least one sample is required");
    }
    let d = params.d;
    let l = params.ell as i32;
    let eta = params.eta_overlap as i32;
    let lo = vec![-eta * l; d];
    let hi = vec![(eta + 1) * l - 1; d];
    let horizon = (params.eta_overlap * params.beta) as f64 + 1.0;
    let margin = wander_margin(horizon, 1e-12);
    let cell = CellIndex::new(&vec![0; d], 0);
    let failures: Vec<bool> = (0..samples)
        .into_par_iter()
        .map(|r| {
            let tr = sample_cloud_trace(rho, 0.0, d, &lo, &hi, margin, horizon, derive_seed(seed, &[r as i64]))?;
            Ok(!holds_e_tilde(&tr, &cell, params)?)
        })
        .collect::<Result<_>>()?;
    let k = failures.iter().filter(|&&f| f).count() as u64;
    Ok(Estimate::from_counts(k, samples))
}

//! Acceptable and good cells, and the super-cell event built from good
//! points, on one sampled cloud; compared with the closed-form bounds.
//!
//! `cargo run --release --example cell_events`

use latticefire::cell_events::{
    bound_acceptable, bound_e_tilde_complement, holds_e_tilde, is_acceptable, is_good_cell,
    sample_distinguished_path, BoundInputs, CellCheckContext,
};
use latticefire::dynamics::{sample_cloud_trace, wander_margin, Recovery};
use latticefire::harness::e_tilde_failure_frequency;
use latticefire::tessellation::{CellIndex, TessellationParams};

fn grid(params: TessellationParams, rho: f64, lambda: f64) -> Result<(), Box<dyn std::error::Error>> {
    let recovery = Recovery::from_lambda(lambda)?;
    let beta = params.beta as f64;
    let horizon = 8.0 * beta + params.path_time();
    let trace = sample_cloud_trace(rho, lambda, 1, &[-40], &[40], wander_margin(horizon, 1e-9), horizon, 5)?;
    println!(
        "ell={} beta={} eta={} rho={rho} lambda={lambda}: {} walkers in the window",
        params.ell,
        params.beta,
        params.eta_overlap,
        trace.len()
    );
    let ctx = CellCheckContext::new(&trace, params, recovery)?;
    let (mut acceptable, mut good, mut total) = (0, 0, 0);
    for tau in 0..5 {
        let mut row = String::new();
        for i in -3..=3 {
            let cell = CellIndex::new(&[i], tau);
            let a = is_acceptable(&cell, &ctx)?;
            let gamma = sample_distinguished_path(&cell, recovery, beta, 9, 1)?;
            let g = is_good_cell(&cell, &ctx, &gamma)?;
            total += 1;
            acceptable += usize::from(a);
            good += usize::from(g);
            row.push(match (a, g) {
                (true, true) => 'G',
                (true, false) => 'A',
                (false, true) => 'g',
                (false, false) => '.',
            });
        }
        println!("  tau={tau}  {row}");
    }
    println!("  acceptable {acceptable}/{total}, good {good}/{total} (A acceptable, g good, G both)");
    let inp = BoundInputs {
        rho,
        lambda,
        ell: params.ell as f64,
        beta,
        c_acc: 1.0,
        ..Default::default()
    };
    println!("  bound_acceptable with c_acc=1: {:.4}", bound_acceptable(&inp));
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Long cells need carriers to spread the infection; short sparse cells
    // are often acceptable because they hold nothing to spread.
    grid(TessellationParams::new(3, 12, 5, 1)?, 10.0, 0.02)?;
    grid(TessellationParams::new(3, 6, 5, 1)?, 0.05, 0.02)?;

    let small = TessellationParams::for_points(2, 2, 1, 1)?;
    let one = sample_cloud_trace(20.0, 0.0, 1, &[-2], &[3], 20, 3.0, 1)?;
    println!("\nsuper cell of (0,0) at rho=20 all good: {}", holds_e_tilde(&one, &CellIndex::new(&[0], 0), &small)?);
    let e = e_tilde_failure_frequency(20.0, &small, 2000, 7)?;
    let bound = bound_e_tilde_complement(&BoundInputs {
        rho: 20.0,
        ell: 2.0,
        beta: 2.0,
        eta_overlap: 1.0,
        d: 1,
        ..Default::default()
    });
    println!("failure frequency {:.4} [{:.4}, {:.4}] vs union bound {bound:.4}", e.p, e.ci_low, e.ci_high);
    Ok(())
}

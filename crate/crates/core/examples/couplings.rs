//! Density and recovery couplings: run the pairs in lockstep and report the
//! comparisons made at every event time.
//!
//! `cargo run --release --example couplings`

use latticefire::coupling::{coupled_density_run, coupled_recovery_run};
use latticefire::dynamics::{ProcessParams, Recovery, Variant};
use latticefire::lattice::LatticeDomain;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = ProcessParams {
        rho: 1.0,
        recovery: Recovery::Rate(0.5),
        variant: Variant::InstantaneousContact,
        domain: LatticeDomain::halo(1, 32, 80)?,
        horizon: 20.0,
    };
    let (mut low_alive, mut high_alive) = (0, 0);
    for seed in 0..20 {
        let pair = coupled_density_run(&base, 2.5, seed)?;
        assert!(pair.report.holds(), "{:?}", pair.report.first_violation);
        low_alive += usize::from(pair.low_outcome().survived_to_horizon);
        high_alive += usize::from(pair.high_outcome().survived_to_horizon);
        if seed < 3 {
            println!(
                "seed {seed}: {} particles vs {}, {} comparisons, no violations",
                pair.low.num_particles(),
                pair.high.num_particles(),
                pair.report.checks
            );
        }
    }
    println!("density 1.0 vs 2.5: {low_alive}/20 and {high_alive}/20 survive");

    let dense = ProcessParams { rho: 2.0, ..base };
    let (mut inf_alive, mut fin_alive) = (0, 0);
    for seed in 0..20 {
        let pair = coupled_recovery_run(&dense, seed)?;
        assert!(pair.report.holds(), "{:?}", pair.report.first_violation);
        inf_alive += usize::from(pair.low_outcome().survived_to_horizon);
        fin_alive += usize::from(pair.high_outcome().survived_to_horizon);
    }
    println!("instantaneous vs rate-0.5 recovery at density 2: {inf_alive}/20 and {fin_alive}/20 survive");
    Ok(())
}

//! One trial of the contact process among walkers, followed event by event.
//!
//! `cargo run --release --example single_trial -- 3 inf 7`
//! (density, recovery rate, seed).

use latticefire::dynamics::{initial_state, EventKind, ProcessParams, Recovery, TrialOutcome, Variant};
use latticefire::lattice::LatticeDomain;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let rho: f64 = args.first().map_or(Ok(3.0), |s| s.parse())?;
    let lambda: f64 = args.get(1).map_or(Ok(f64::INFINITY), |s| s.parse())?;
    let seed: u64 = args.get(2).map_or(Ok(7), |s| s.parse())?;

    let horizon = 50.0;
    let params = ProcessParams {
        rho,
        recovery: Recovery::from_lambda(lambda)?,
        variant: Variant::InstantaneousContact,
        domain: LatticeDomain::halo(1, 64, LatticeDomain::default_margin(horizon))?,
        horizon,
    };
    let mut st = initial_state(&params, seed)?;
    println!("{} particles, {} infected at t=0", st.num_particles(), st.num_infected());

    let mut next_report = 5.0;
    let (mut jumps, mut marks) = (0u64, 0u64);
    while let Some(info) = st.step(horizon)? {
        match info.kind {
            EventKind::Jump => jumps += 1,
            EventKind::Mark => marks += 1,
        }
        while info.time >= next_report {
            println!("t={next_report:>4}: {:>4} infected", st.num_infected());
            next_report += 5.0;
        }
        if st.extinct_at().is_some() {
            break;
        }
    }
    let out = TrialOutcome::from_state(&st);
    println!("{jumps} jumps and {marks} recovery marks processed");
    match out.extinct_at {
        Some(t) => println!("extinct at t={t:.3}"),
        None => println!("alive at the horizon with {} infected", out.final_infected),
    }
    println!("origin infected during {} separate episodes", out.origin_visits());
    for (a, b) in out.origin_infected_intervals.iter().take(5) {
        println!("  [{a:.3}, {b:.3})");
    }
    if out.boundary_contaminated {
        println!("warning: infection reached the halo shell");
    }
    Ok(())
}

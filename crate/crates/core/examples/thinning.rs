//! Per-point transit counts of a stationary cloud: Poisson thinning laws and
//! the good-point probability.
//!
//! `cargo run --release --example thinning`

use latticefire::cell_events::good_point_probability;
use latticefire::harness::{good_point_frequency, verify_thinning};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let report = verify_thinning(2.0, 1, 100_000, 1)?;
    print!("{}", report.render());

    println!("\n rho  d  formula   observed  95% interval");
    for d in [1usize, 2] {
        for rho in [1.0, 5.0, 20.0] {
            let e = good_point_frequency(rho, d, 50_000, 3)?;
            println!(
                "{rho:>4} {d:>2}  {:.5}   {:.5}   [{:.5}, {:.5}]",
                good_point_probability(rho, d as u32),
                e.p,
                e.ci_low,
                e.ci_high
            );
        }
    }
    Ok(())
}

//! Survival and local survival over a small (rho, lambda) grid, as CSV.
//!
//! `cargo run --release --example phase_sweep`

use latticefire::harness::{sweep, write_sweep_csv, ExperimentSpec, SweepSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SweepSpec {
        base: ExperimentSpec {
            side: 32,
            halo_margin: Some(60),
            horizon: 40.0,
            replicas: 200,
            seed: 2024,
            ..ExperimentSpec::default()
        },
        rhos: vec![0.5, 1.0, 2.0, 4.0],
        lambdas: vec![0.1, 1.0, f64::INFINITY],
    };
    let rows = sweep(&spec)?;
    write_sweep_csv(std::io::stdout().lock(), &rows)?;

    // Replica seeds do not depend on the grid point, so along each column of
    // the grid survival can only switch on as the density grows.
    for lambda in &spec.lambdas {
        let ps: Vec<String> = rows
            .iter()
            .filter(|r| r.spec.lambda == *lambda)
            .map(|r| r.survival.as_ref().map_or("NA".into(), |e| format!("{:.2}", e.p)))
            .collect();
        eprintln!("lambda={lambda}: survival {}", ps.join(" <= "));
    }
    Ok(())
}

//! Probability of an event when the particles start in a box X and their
//! displacements are conditioned to stay in X'.
//!
//! `cargo run --release --example conditioned_event`

use latticefire::cell_events::{estimate_nu_e, holds_e_tilde, NuSpec};
use latticefire::dynamics::{Recovery, SpaceTimeWindow};
use latticefire::tessellation::{CellIndex, Rational, RationalBox, TessellationParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = TessellationParams::for_points(2, 2, 1, 1)?;
    let cell = CellIndex::new(&[0], 0);
    let r = Rational::from_integer;
    let event = |tr: &latticefire::dynamics::TraceSet| {
        let mut tr = tr.clone();
        tr.window = SpaceTimeWindow::new(1, &[-2], &[3], 0.0, 2.0);
        holds_e_tilde(&tr, &cell, &params)
    };
    for (name, x_prime) in [
        ("unconstrained", RationalBox::whole_space(1)),
        ("displacement within 3", RationalBox::centered_cube(1, r(3))),
        ("displacement within 1", RationalBox::centered_cube(1, r(1))),
    ] {
        let spec = NuSpec {
            rho: 20.0,
            lambda: Recovery::None,
            x: RationalBox::new(1, &[r(-4)], &[r(5)]),
            x_prime,
            s: 2.0,
            replicas: 1000,
            seed: 3,
        };
        let e = estimate_nu_e(event, &spec)?;
        println!("{name:>22}: all points good with probability {:.3} [{:.3}, {:.3}]", e.p, e.ci_low, e.ci_high);
    }
    Ok(())
}

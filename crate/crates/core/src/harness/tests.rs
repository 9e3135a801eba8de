use super::*;
use crate::cell_events::good_point_probability;
use crate::dynamics::Variant;
use crate::tessellation::TessellationParams;

fn small(rho: f64, lambda: f64) -> ExperimentSpec {
    ExperimentSpec {
        side: 16,
        halo_margin: Some(40),
        rho,
        lambda,
        horizon: 20.0,
        replicas: 40,
        ..ExperimentSpec::default()
    }
}

#[test]
fn no_recovery_always_survives() {
    let e = estimate(&small(1.0, 0.0)).unwrap();
    assert_eq!(e.survival.p, 1.0);
    assert_eq!(e.survival.n, 40);
    let local = e.local_given_survival.unwrap();
    assert!(local.ci_low <= local.p && local.p <= local.ci_high);
}

#[test]
fn one_visit_is_always_enough() {
    let spec = ExperimentSpec {
        k_visits: 1,
        ..small(2.0, 1.0)
    };
    let e = estimate(&spec).unwrap();
    if let Some(l) = e.local_given_survival {
        assert_eq!(l.p, 1.0);
    }
}

#[test]
fn invalid_specs_are_rejected() {
    assert!(estimate(&ExperimentSpec { replicas: 0, ..small(1.0, 0.0) }).is_err());
    assert!(estimate(&ExperimentSpec { horizon: 0.0, ..small(1.0, 0.0) }).is_err());
    assert!(estimate(&small(-1.0, 0.0)).is_err());
    assert!(estimate(&small(1.0, -2.0)).is_err());
}

#[test]
fn replicas_are_coupled_across_density() {
    let lo = run_replicas(&small(0.5, f64::INFINITY)).unwrap();
    let hi = run_replicas(&small(2.0, f64::INFINITY)).unwrap();
    for (a, b) in lo.iter().zip(&hi) {
        assert!(!a.survived_to_horizon || b.survived_to_horizon);
    }
}

#[test]
fn strict_mode_drops_contaminated_runs() {
    let spec = ExperimentSpec {
        halo_margin: Some(2),
        ..small(3.0, 0.0)
    };
    let out = run_replicas(&spec).unwrap();
    let flagged = out.iter().filter(|o| o.boundary_contaminated).count() as u64;
    assert!(flagged > 0);
    let loose = summarize(&spec, &out).unwrap();
    assert_eq!(loose.survival.flagged, flagged);
    assert_eq!(loose.survival.n, 40);
    let strict = ExperimentSpec {
        strict_boundary: true,
        ..spec
    };
    match summarize(&strict, &out) {
        Ok(e) => assert_eq!(e.survival.n, 40 - flagged),
        Err(e) => assert!(matches!(e, Error::Estimation(_))),
    }
}

#[test]
fn local_survival_undefined_without_survivors() {
    // A lone particle at tiny density recovers at once under instantaneous recovery.
    let spec = ExperimentSpec {
        replicas: 5,
        ..small(1e-9, f64::INFINITY)
    };
    assert!(matches!(estimate_local_survival(&spec), Err(Error::Estimation(_))));
    assert_eq!(estimate_survival(&spec).unwrap().p, 0.0);
}

#[test]
fn sweep_rows_and_csv() {
    let s = SweepSpec {
        base: ExperimentSpec {
            replicas: 10,
            ..small(1.0, 0.0)
        },
        rhos: vec![0.5, 2.0],
        lambdas: vec![1.0, f64::INFINITY, -1.0],
    };
    let rows = sweep(&s).unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows[2].error.is_some() && rows[2].survival.is_none());
    let one = estimate_survival(&ExperimentSpec {
        rho: 0.5,
        lambda: 1.0,
        ..s.base
    })
    .unwrap();
    assert_eq!(rows[0].survival.as_ref().unwrap(), &one);
    let mut buf = Vec::new();
    write_sweep_csv(&mut buf, &rows).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], SWEEP_HEADER);
    assert!(lines[2].starts_with("0.5,inf,contact,1,16,20,10,"));
    assert!(lines[3].contains(",NA,"));
    assert!(lines.iter().all(|l| l.split(',').count() == 14));
    assert!(sweep(&SweepSpec { rhos: vec![], ..s }).is_err());
}

#[test]
fn jump_variant_runs() {
    let spec = ExperimentSpec {
        variant: Variant::JumpTime,
        ..small(2.0, 1.0)
    };
    let a = estimate(&spec).unwrap();
    assert_eq!(a, estimate(&spec).unwrap());
}

#[test]
fn manifest_describes_spec() {
    let mut m = Manifest::new("sweep");
    small(2.0, f64::INFINITY).describe(&mut m);
    assert_eq!(m.get("lambda"), Some("inf"));
    assert_eq!(m.get("halo_margin"), Some("40"));
    assert_eq!(m.get("variant"), Some("contact"));
}

#[test]
fn thinning_small_run() {
    let r = verify_thinning(2.0, 1, 10_000, 3).unwrap();
    assert_eq!(r.fits.len(), 3);
    assert_eq!(r.correlations.len(), 3);
    assert!((r.fits[0].expected_mean - 2.0 * (-1.0f64).exp()).abs() < 1e-12);
    assert!(r.render().lines().count() == 8);
    assert!(verify_thinning(2.0, 1, 100, 3).is_err());
    let counts = point_counts(1.0, 2, 50, 1).unwrap();
    assert_eq!(counts.len(), 50);
    assert!(counts.iter().all(|c| c.jumps.len() == 4));
}

#[test]
fn good_point_frequency_tracks_formula() {
    let e = good_point_frequency(5.0, 1, 20_000, 2).unwrap();
    let p = good_point_probability(5.0, 1);
    assert!((e.p - p).abs() < 4.0 * e.std_error().max(1e-3), "{} vs {p}", e.p);
}

#[test]
fn e_tilde_failure_is_rare_at_high_density() {
    let params = TessellationParams::for_points(2, 2, 1, 1).unwrap();
    let e = e_tilde_failure_frequency(20.0, &params, 500, 9).unwrap();
    assert!(e.p < 0.2, "{}", e.p);
    let sparse = e_tilde_failure_frequency(1.0, &params, 50, 9).unwrap();
    assert_eq!(sparse.p, 1.0);
}

#[test]
fn cell_fields_are_deterministic_and_shaped() {
    let spec = CellFieldSpec {
        params: TessellationParams::new(3, 12, 5, 1).unwrap(),
        rho: 10.0,
        lambda: 0.0,
        axis: 1,
        h_max: 2,
        width: 4,
        seed: 5,
    };
    let a = spec.evaluate(&CellEvent::ALL).unwrap();
    assert_eq!(a.len(), 3);
    for f in &a {
        assert_eq!(f.up.window.len(), 4);
        assert_eq!(f.up.window, f.down.window);
    }
    // Height 0 is the same cell on both sides.
    for col in 0..4 {
        assert_eq!(a[0].up.at(col, 0), a[0].down.at(col, 0));
    }
    assert_eq!(a, spec.evaluate(&CellEvent::ALL).unwrap());
    let hits = (0..4).flat_map(|c| (0..=2).map(move |h| (c, h))).filter(|&(c, h)| a[0].up.at(c, h)).count();
    assert!(hits > 0, "some acceptable cells expected at this density");
    assert!(CellFieldSpec { axis: 2, ..spec }.evaluate(&CellEvent::ALL).is_err());
}

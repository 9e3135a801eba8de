//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Pass criterion numbers as arguments to run a subset:
//! `cargo test --test acceptance -- 1 6`.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use latticefire::cell_events::{
    bound_acceptable, bound_e_tilde_complement, bound_good, check_hypotheses, good_point_probability,
    omega_lower_bound, BoundInputs,
};
use latticefire::coupling::{coupled_density_run, coupled_recovery_run};
use latticefire::dynamics::{initial_state, ProcessParams, Recovery, Variant};
use latticefire::harness::{
    e_tilde_failure_frequency, good_point_frequency, run_replicas, summarize, verify_thinning, ExperimentSpec,
};
use latticefire::lattice::{Boundary, LatticeDomain};
use latticefire::surface::{
    brute_force_minimal_surface, extract_minimal_surface, is_lipschitz, BaseWindow, CellEventField, Extraction,
};
use latticefire::tessellation::TessellationParams;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn within(limit_secs: u64, start: Instant) -> (bool, String) {
    let el = start.elapsed();
    (el <= Duration::from_secs(limit_secs), format!("{:.1}s of {limit_secs}s", el.as_secs_f64()))
}

fn thinning_laws() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut notes = Vec::new();
    for (rho, d) in [(1.0, 1), (2.0, 1), (1.0, 2), (2.0, 2)] {
        let r = verify_thinning(rho, d, 100_000, 11).expect("thinning run");
        let worst_p = r.fits.iter().map(|f| f.chi_square.p_value).fold(1.0, f64::min);
        let worst_r = r.correlations.iter().map(|c| c.2.abs()).fold(0.0, f64::max);
        notes.push(format!("rho={rho} d={d} min_p={worst_p:.3} max|r|={worst_r:.4}"));
        if !r.passed {
            print!("{}", r.render());
        }
        ok &= r.passed;
    }
    let (fast, t) = within(60, start);
    outcome(ok && fast, format!("{}; {t}", notes.join(", ")))
}

fn good_points() -> Outcome {
    let start = Instant::now();
    let closed = good_point_probability(1.0, 1);
    let mut ok = (closed - 0.003902).abs() < 5e-6;
    let mut notes = vec![format!("p(1,1)={closed:.7}")];
    let n = 100_000;
    for d in [1usize, 2] {
        for rho in [1.0, 5.0, 20.0] {
            let e = good_point_frequency(rho, d, n, 21 + d as u64).expect("good points");
            let p = good_point_probability(rho, d as u32);
            let se = (p * (1.0 - p) / n as f64).sqrt();
            let z = (e.p - p) / se;
            ok &= z.abs() <= 3.0;
            notes.push(format!("rho={rho} d={d} z={z:.2}"));
        }
    }
    let (fast, t) = within(60, start);
    outcome(ok && fast, format!("{}; {t}", notes.join(", ")))
}

fn union_bound() -> Outcome {
    let start = Instant::now();
    let bound = bound_e_tilde_complement(&BoundInputs {
        rho: 20.0,
        eta_overlap: 1.0,
        ell: 2.0,
        beta: 2.0,
        d: 1,
        ..Default::default()
    });
    let params = TessellationParams::for_points(2, 2, 1, 1).expect("params");
    let e = e_tilde_failure_frequency(20.0, &params, 10_000, 31).expect("e tilde");
    let ok = (bound - 0.107).abs() < 5e-4 && e.p <= bound + 3.0 * e.std_error();
    let (fast, t) = within(120, start);
    outcome(
        ok && fast,
        format!("empirical {:.4} (se {:.4}) vs bound {bound:.4}; {t}", e.p, e.std_error()),
    )
}

fn halo(side: u32, horizon: f64) -> LatticeDomain {
    LatticeDomain::halo(1, side, LatticeDomain::default_margin(horizon)).expect("domain")
}

fn couplings() -> Outcome {
    let mut checks = 0u64;
    let mut bad = Vec::new();
    let base = |rho: f64, lambda: f64| ProcessParams {
        rho,
        recovery: Recovery::from_lambda(lambda).expect("lambda"),
        variant: Variant::InstantaneousContact,
        domain: halo(32, 20.0),
        horizon: 20.0,
    };
    for seed in 0..100u64 {
        for lambda in [1.0, f64::INFINITY] {
            let p = coupled_density_run(&base(1.0, lambda), 2.0, seed).expect("density run");
            checks += p.report.checks;
            if !p.report.holds() || (p.low_outcome().survived_to_horizon && !p.high_outcome().survived_to_horizon) {
                bad.push(format!("density seed {seed} lambda {lambda}: {:?}", p.report.first_violation));
            }
        }
        let p = coupled_recovery_run(&base(2.0, 1.0), seed).expect("recovery run");
        checks += p.report.checks;
        if !p.report.holds() || (p.low_outcome().survived_to_horizon && !p.high_outcome().survived_to_horizon) {
            bad.push(format!("recovery seed {seed}: {:?}", p.report.first_violation));
        }
    }
    outcome(bad.is_empty(), format!("{checks} event-time comparisons, violations: {bad:?}"))
}

fn invariants() -> Outcome {
    let mut steps = 0u64;
    let mut bad = Vec::new();
    for seed in 0..50u64 {
        for lambda in [0.0, 1.0, f64::INFINITY] {
            for periodic in [true, false] {
                let domain = if periodic {
                    LatticeDomain::periodic(1, 64).expect("torus")
                } else {
                    halo(32, 50.0)
                };
                let params = ProcessParams {
                    rho: 2.0,
                    recovery: Recovery::from_lambda(lambda).expect("lambda"),
                    variant: Variant::InstantaneousContact,
                    domain,
                    horizon: 50.0,
                };
                let mut st = initial_state(&params, seed).expect("state");
                let total = st.configuration().total();
                let check = |st: &latticefire::dynamics::SimState| {
                    let mut ok = st.is_site_pure();
                    if lambda.is_infinite() {
                        ok &= st.no_lone_infected();
                    }
                    if periodic {
                        ok &= st.configuration().total() == total;
                    }
                    ok
                };
                let mut ok = check(&st);
                while st.step(50.0).expect("step").is_some() {
                    steps += 1;
                    ok &= check(&st);
                    if !ok {
                        break;
                    }
                }
                if !ok {
                    bad.push(format!("seed {seed} lambda {lambda} periodic {periodic} at t={}", st.time()));
                }
            }
        }
    }
    outcome(bad.is_empty(), format!("{steps} event boundaries checked, violations: {bad:?}"))
}

fn check_extraction(field: &CellEventField) -> Result<(), String> {
    let fast = extract_minimal_surface(field);
    let slow = brute_force_minimal_surface(field).map_err(|e| e.to_string())?;
    // Infeasible fields may report different witness columns.
    if fast.heights() != slow.heights() {
        return Err(format!("{fast:?} vs oracle {slow:?}"));
    }
    if let Extraction::Feasible(f) = &fast {
        if !is_lipschitz(f, &field.window) {
            return Err(format!("{f:?} is not Lipschitz"));
        }
        if (0..f.len()).any(|c| !field.at(c, f[c])) {
            return Err(format!("{f:?} touches a bad cell"));
        }
    }
    Ok(())
}

fn surface_oracle() -> Outcome {
    let start = Instant::now();
    let mut errors = Vec::new();
    let mut feasible = 0usize;
    let four = BaseWindow::line(4).expect("window");
    for bits in 0u32..1 << 16 {
        let mut k = 0;
        let field = CellEventField::from_fn(four.clone(), 3, |_, _| {
            k += 1;
            bits >> (k - 1) & 1 == 1
        });
        feasible += usize::from(extract_minimal_surface(&field).is_feasible());
        if let Err(e) = check_extraction(&field) {
            errors.push(e);
        }
    }
    let six = BaseWindow::line(6).expect("window");
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(61);
    for _ in 0..10_000 {
        let density = rng.random_range(0.3..0.9);
        let field = CellEventField::from_fn(six.clone(), 4, |_, _| rng.random_bool(density));
        feasible += usize::from(extract_minimal_surface(&field).is_feasible());
        if let Err(e) = check_extraction(&field) {
            errors.push(e);
        }
    }
    let (fast, t) = within(120, start);
    errors.truncate(3);
    outcome(
        errors.is_empty() && fast,
        format!("{} fields, {feasible} feasible, mismatches: {errors:?}; {t}", (1 << 16) + 10_000),
    )
}

fn phase_spec(rho: f64, lambda: f64) -> ExperimentSpec {
    ExperimentSpec {
        d: 1,
        side: 64,
        boundary: Boundary::Halo,
        halo_margin: Some(100),
        rho,
        lambda,
        horizon: 100.0,
        replicas: 2000,
        seed: 71,
        k_visits: 5,
        ..ExperimentSpec::default()
    }
}

fn phase_behavior() -> Outcome {
    let start = Instant::now();
    let mut notes = Vec::new();
    let mut ok = true;
    let mut prev: Option<Vec<bool>> = None;
    for rho in [0.5, 1.0, 2.0, 4.0, 8.0] {
        let spec = phase_spec(rho, f64::INFINITY);
        let out = run_replicas(&spec).expect("replicas");
        let e = summarize(&spec, &out).expect("summary").survival;
        let alive: Vec<bool> = out.iter().map(|o| o.survived_to_horizon).collect();
        if let Some(p) = &prev {
            let broken = p.iter().zip(&alive).filter(|(lo, hi)| **lo && !**hi).count();
            ok &= broken == 0;
            if broken > 0 {
                notes.push(format!("{broken} paired violations below rho={rho}"));
            }
        }
        notes.push(format!("rho={rho}: {:.3} (flagged {})", e.p, e.flagged));
        prev = Some(alive);
    }
    let mut local = Vec::new();
    for lambda in [0.01, 1.0] {
        let spec = phase_spec(3.0, lambda);
        let e = summarize(&spec, &run_replicas(&spec).expect("replicas"))
            .expect("summary")
            .local_given_survival
            .expect("survivors");
        notes.push(format!(
            "local rho=3 lambda={lambda}: {:.3} [{:.3}, {:.3}] of {}",
            e.p, e.ci_low, e.ci_high, e.n
        ));
        local.push(e);
    }
    let margin = local[0].p - local[1].p;
    let combined = (local[0].p - local[0].ci_low) + (local[1].ci_high - local[1].p);
    let local_ok = margin > combined;
    notes.push(format!(
        "local margin {margin:.3} vs combined CI {combined:.3}: {}",
        if local_ok { "ok" } else { "not met" }
    ));
    let (fast, t) = within(600, start);
    outcome(ok && local_ok && fast, format!("{}; {t}", notes.join(", ")))
}

fn bound_values() -> Outcome {
    let mut bad = Vec::new();
    let mut pin = |name: &str, got: f64, want: f64, tol: f64| {
        if !((got - want).abs() <= tol * want.abs().max(1.0)) {
            bad.push(format!("{name}: {got} != {want}"));
        }
    };
    let acc = BoundInputs {
        rho: 1.0,
        lambda: 0.0,
        ell: 8.0,
        c_acc: 1.0,
        ..Default::default()
    };
    pin("bound_acceptable", bound_acceptable(&acc), 0.864_664_716_763_387_3, 1e-14);
    let good = BoundInputs {
        c_good: 1.0,
        d: 1,
        ell: 1e6,
        beta: 10.0,
        rho: 1.0,
        lambda: 0.1,
        ..Default::default()
    };
    pin("bound_good", bound_good(&good), -41_532_037_653_320.516, 1e-12);
    let et = BoundInputs {
        eta_overlap: 1.0,
        ell: 2.0,
        beta: 4.0,
        d: 1,
        rho: 1.0,
        ..Default::default()
    };
    pin("bound_e_tilde_complement", bound_e_tilde_complement(&et), 23.906_324_105_568_714, 1e-12);
    pin(
        "bound_e_tilde_complement dense",
        bound_e_tilde_complement(&BoundInputs {
            beta: 2.0,
            rho: 20.0,
            ..et
        }),
        0.106_837_103_001_637_96,
        1e-12,
    );
    pin(
        "omega_lower_bound",
        omega_lower_bound(1.0, 1.0, 10.0, 0.5, 1.0, 1.0).expect("omega"),
        0.166_510_922_231_539_54,
        1e-12,
    );
    let h = check_hypotheses(0.5, 2.0, 10.0, 1, 0.999, 5.0).expect("hypotheses");
    pin("hypotheses density term", h.density_term, 10.0, 1e-12);
    pin("hypotheses event term", h.event_term, 6.907_755_278_982_137, 1e-9);
    if !h.passes || check_hypotheses(0.5, 2.0, 10.0, 1, 0.999, 20.0).expect("hypotheses").passes {
        bad.push("hypothesis verdicts".into());
    }
    outcome(bad.is_empty(), format!("mismatches: {bad:?}"))
}

fn run_cli(args: &[&str], out: &Path, threads: &str) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_latticefire"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("LATTICEFIRE_THREADS", threads)
        .output()
        .expect("run binary")
        .status
        .code()
        .unwrap_or(-1)
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .expect("read dir")
        .map(|e| {
            let e = e.expect("entry");
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).expect("read"))
        })
        .collect();
    v.sort();
    v
}

fn reproducibility() -> Outcome {
    let tmp = tempfile::tempdir().expect("tempdir");
    let runs: [&[&str]; 6] = [
        &["simulate", "--rho", "2", "--lambda", "1", "--horizon", "20", "--L", "16", "--event-log"],
        &["sweep", "--rho", "0.5,2", "--lambda", "1,inf", "--horizon", "20", "--L", "16", "--replicas", "30"],
        &["check-cells", "--rho", "10", "--h-max", "2", "--width", "4", "--seed", "3"],
        &["verify-thinning", "--rho", "2", "--samples", "20000", "--seed", "5"],
        &["bounds", "--rho", "20", "--ell", "2", "--beta", "2", "--eps", "0.5", "--nu-hat", "0.9"],
        &["coupling-check", "--rho", "1", "--rho-high", "2", "--horizon", "10", "--L", "16", "--replicas", "10"],
    ];
    let mut bad = Vec::new();
    for (k, args) in runs.iter().enumerate() {
        let a = tmp.path().join(format!("{k}a"));
        let b = tmp.path().join(format!("{k}b"));
        let c = tmp.path().join(format!("{k}c"));
        let codes = [run_cli(args, &a, "1"), run_cli(args, &b, "3")];
        let replay = Command::new(env!("CARGO_BIN_EXE_latticefire"))
            .args(["replay", "--manifest"])
            .arg(a.join("manifest.txt"))
            .arg("--out")
            .arg(&c)
            .status()
            .expect("replay")
            .code();
        if codes != [0, 0] || replay != Some(0) {
            bad.push(format!("{}: exit codes {codes:?} / {replay:?}", args[0]));
            continue;
        }
        let fa = files(&a);
        if fa != files(&b) || fa != files(&c) {
            bad.push(format!("{}: outputs differ", args[0]));
        }
    }
    outcome(bad.is_empty(), format!("{} commands run, rerun and replayed; problems: {bad:?}", runs.len()))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 9] = [
        (1, "thinning laws", thinning_laws),
        (2, "good-point closed form", good_points),
        (3, "union bound", union_bound),
        (4, "couplings", couplings),
        (5, "invariants", invariants),
        (6, "surface oracle equivalence", surface_oracle),
        (7, "directional phase behavior", phase_behavior),
        (8, "bound evaluators", bound_values),
        (9, "reproducibility", reproducibility),
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    for (n, name, run) in criteria {
        if !selected.is_empty() && !selected.contains(&n) {
            continue;
        }
        let r = run();
        println!("criterion {n} ({name}): {} - {}", if r.passed { "PASS" } else { "FAIL" }, r.detail);
        if !r.passed {
            failed.push(n);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}

//! Command-line front end. Every subcommand writes its results and a
//! manifest either into `--out DIR` or, without it, results to stdout and the
//! manifest to stderr.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::cell_events::{
    bound_acceptable, bound_e_tilde_complement, bound_good, check_hypotheses, good_point_probability,
    omega_lower_bound, BoundInputs,
};
use crate::coupling::{coupled_density_run, coupled_recovery_run};
use crate::dynamics::{initial_state, EventKind, Variant};
use crate::error::{Error, Result};
use crate::harness::{
    record_errors, sweep, verify_thinning, write_sweep_csv, CellEvent, CellFieldSpec, ExperimentSpec, Manifest,
    SweepSpec,
};
use crate::lattice::{Boundary, Site};
use crate::surface::{
    extract_two_sided, read_field, surrounds_origin, write_field, write_surface, zero_height_percolation,
};
use crate::tessellation::TessellationParams;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "LATTICEFIRE_THREADS";

#[derive(Parser, Debug)]
#[command(name = "latticefire", version, about = "Infection with recovery among random walkers on Z^d")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one trial; optionally log every event.
    Simulate(SimulateArgs),
    /// Survival and local-survival estimates over a (rho, lambda) grid.
    Sweep(SweepArgs),
    /// Sample a cloud and emit acceptable / good / E-tilde indicator fields.
    CheckCells(CheckCellsArgs),
    /// Extract the two-sided minimal Lipschitz surface of a field file.
    Surface(SurfaceArgs),
    /// Check the Poisson thinning laws of per-point transit counts.
    VerifyThinning(ThinningArgs),
    /// Evaluate the closed-form bounds.
    Bounds(BoundsArgs),
    /// Run coupled pairs and check dominance and containment at every event.
    CouplingCheck(CouplingArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum VariantArg {
    Contact,
    Jump,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Contact => Variant::InstantaneousContact,
            VariantArg::Jump => Variant::JumpTime,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct OutArgs {
    /// Directory for outputs and the manifest.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct ProcessArgs {
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long = "L", default_value_t = 64)]
    side: u32,
    #[arg(long, value_enum, default_value_t = VariantArg::Contact)]
    variant: VariantArg,
    #[arg(long, default_value_t = 100.0)]
    horizon: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Simulate on a torus of side L instead of a haloed box.
    #[arg(long)]
    periodic: bool,
    /// Halo width (default: ceil(4 * horizon)).
    #[arg(long)]
    halo_margin: Option<u32>,
}

impl ProcessArgs {
    fn spec(&self, rho: f64, lambda: f64) -> ExperimentSpec {
        ExperimentSpec {
            d: self.d,
            side: self.side,
            boundary: if self.periodic { Boundary::Periodic } else { Boundary::Halo },
            halo_margin: self.halo_margin,
            rho,
            lambda,
            variant: self.variant.into(),
            horizon: self.horizon,
            seed: self.seed,
            ..ExperimentSpec::default()
        }
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    rho: f64,
    /// `0`, a positive rate, or `inf`.
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    #[command(flatten)]
    process: ProcessArgs,
    /// Write every processed event to `events.csv`.
    #[arg(long)]
    event_log: bool,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Comma-separated densities.
    #[arg(long, value_delimiter = ',', required = true)]
    rho: Vec<f64>,
    /// Comma-separated recovery rates (`0`, positive, `inf`).
    #[arg(long, value_delimiter = ',', required = true)]
    lambda: Vec<f64>,
    #[command(flatten)]
    process: ProcessArgs,
    #[arg(long, default_value_t = 100)]
    replicas: u64,
    #[arg(long = "K-visits", default_value_t = 5)]
    k_visits: usize,
    /// Exclude replicas whose infection reached the halo shell.
    #[arg(long)]
    strict_boundary: bool,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct CellArgs {
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long, default_value_t = 3)]
    ell: u32,
    #[arg(long, default_value_t = 12)]
    beta: u32,
    #[arg(long, default_value_t = 5)]
    eta: u32,
}

#[derive(Args, Debug)]
struct CheckCellsArgs {
    #[arg(long)]
    rho: f64,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    #[command(flatten)]
    cells: CellArgs,
    /// Height axis, 1-based.
    #[arg(long, default_value_t = 1)]
    axis: usize,
    #[arg(long, default_value_t = 3)]
    h_max: u32,
    /// Cells per base axis (time layers and the other spatial axes).
    #[arg(long, default_value_t = 8)]
    width: u32,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct SurfaceArgs {
    /// Field of the upward side.
    #[arg(long = "in")]
    input: PathBuf,
    /// Field of the downward side (default: the upward field).
    #[arg(long)]
    down: Option<PathBuf>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct ThinningArgs {
    #[arg(long)]
    rho: f64,
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    #[arg(long, default_value_t = 8.0)]
    ell: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    #[arg(long, default_value_t = 1)]
    d: u32,
    #[arg(long, default_value_t = 1.0)]
    c1: f64,
    #[arg(long, default_value_t = 1.0)]
    c2: f64,
    #[arg(long, default_value_t = 1.0)]
    c_acc: f64,
    #[arg(long, default_value_t = 1.0)]
    c_good: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha0: f64,
    /// Also evaluate the omega bound and the hypothesis check at this epsilon.
    #[arg(long)]
    eps: Option<f64>,
    /// Event probability for the hypothesis check (requires --eps).
    #[arg(long)]
    nu_hat: Option<f64>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct CouplingArgs {
    #[arg(long)]
    rho: f64,
    /// Run the density coupling against this higher density.
    #[arg(long)]
    rho_high: Option<f64>,
    /// Recovery rate; a finite positive rate also runs the recovery coupling.
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[command(flatten)]
    process: ProcessArgs,
    #[arg(long, default_value_t = 100)]
    replicas: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct ReplayArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[command(flatten)]
    out: OutArgs,
}

/// Where results go.
struct Sink {
    dir: Option<PathBuf>,
}

impl Sink {
    fn new(out: &OutArgs) -> Result<Sink> {
        if let Some(dir) = &out.out {
            std::fs::create_dir_all(dir)?;
        }
        Ok(Sink { dir: out.out.clone() })
    }

    fn emit(&self, name: &str, content: &[u8]) -> Result<()> {
        match &self.dir {
            Some(dir) => std::fs::write(dir.join(name), content)?,
            None => std::io::stdout().write_all(content)?,
        }
        Ok(())
    }

    fn manifest(&self, m: &Manifest) -> Result<()> {
        match &self.dir {
            Some(dir) => m.save(&dir.join("manifest.txt")),
            None => m.write_to(std::io::stderr()),
        }
    }
}

/// Arguments as recorded in manifests: everything but `--out` and its value.
fn replayable(argv: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut skip = false;
    for a in argv.iter().skip(1) {
        if skip {
            skip = false;
        } else if a == "--out" {
            skip = true;
        } else if !a.starts_with("--out=") {
            out.push(a.clone());
        }
    }
    out
}

fn new_manifest(command: &str, argv: &[String]) -> Manifest {
    let mut m = Manifest::new(command);
    for (k, a) in replayable(argv).iter().enumerate() {
        m.push(&format!("arg.{k}"), a);
    }
    m
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            // Fails only if the pool already exists, which is harmless.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

/// Run the tool on `argv` (including the program name); returns the exit
/// code: 0 success, 1 failed check or estimation error, 2 usage error.
pub fn cli_main(argv: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    configure_threads();
    match run(cli.command, argv) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Parameter(_) | Error::Format(_) | Error::Io(_) => 2,
                _ => 1,
            }
        }
    }
}

fn run(command: Command, argv: &[String]) -> Result<bool> {
    match command {
        Command::Simulate(a) => simulate(a, argv),
        Command::Sweep(a) => run_sweep(a, argv),
        Command::CheckCells(a) => check_cells(a, argv),
        Command::Surface(a) => surface(a, argv),
        Command::VerifyThinning(a) => thinning(a, argv),
        Command::Bounds(a) => bounds(a, argv),
        Command::CouplingCheck(a) => coupling(a, argv),
        Command::Replay(a) => replay(a),
    }
}

fn coords(x: Site, d: usize) -> String {
    x.coords(d).iter().map(i32::to_string).collect::<Vec<_>>().join(" ")
}

fn simulate(a: SimulateArgs, argv: &[String]) -> Result<bool> {
    let sink = Sink::new(&a.out)?;
    let spec = a.process.spec(a.rho, a.lambda);
    let params = spec.params()?;
    let mut m = new_manifest("simulate", argv);
    spec.describe(&mut m);
    let mut st = initial_state(&params, spec.seed)?;
    let mut log = String::new();
    if a.event_log {
        log.push_str("time,kind,particle,from,to,infected\n");
    }
    // Without a log there is nothing to see after extinction.
    while a.event_log || st.extinct_at().is_none() {
        let Some(info) = st.step(params.horizon)? else { break };
        if a.event_log {
            let d = spec.d;
            let kind = match info.kind {
                EventKind::Jump => "jump",
                EventKind::Mark => "mark",
            };
            let _ = writeln!(
                log,
                "{},{kind},{} {},{},{},{}",
                info.time,
                coords(info.particle.origin, d),
                info.particle.index,
                coords(info.from, d),
                coords(info.to, d),
                st.num_infected()
            );
        }
    }
    if st.extinct_at().is_none() {
        st.evolve(params.horizon)?;
    }
    let o = crate::dynamics::TrialOutcome::from_state(&st);
    let mut text = String::new();
    let _ = writeln!(text, "survived_to_horizon {}", o.survived_to_horizon);
    let _ = writeln!(text, "extinct_at {}", o.extinct_at.map_or("NA".into(), |t| t.to_string()));
    let _ = writeln!(text, "origin_visits {}", o.origin_visits());
    let _ = writeln!(text, "final_infected {}", o.final_infected);
    let _ = writeln!(text, "events {}", o.events);
    let _ = writeln!(text, "boundary_contaminated {}", o.boundary_contaminated);
    for (s, e) in &o.origin_infected_intervals {
        let _ = writeln!(text, "origin_interval {s} {e}");
    }
    sink.emit("outcome.txt", text.as_bytes())?;
    if a.event_log {
        sink.emit("events.csv", log.as_bytes())?;
    }
    sink.manifest(&m)?;
    Ok(true)
}

fn run_sweep(a: SweepArgs, argv: &[String]) -> Result<bool> {
    let sink = Sink::new(&a.out)?;
    let base = ExperimentSpec {
        replicas: a.replicas,
        k_visits: a.k_visits,
        strict_boundary: a.strict_boundary,
        ..a.process.spec(a.rho[0], a.lambda[0])
    };
    let mut m = new_manifest("sweep", argv);
    base.describe(&mut m);
    m.push("rho_grid", join(&a.rho));
    m.push("lambda_grid", join(&a.lambda));
    let rows = sweep(&SweepSpec {
        base,
        rhos: a.rho,
        lambdas: a.lambda,
    })?;
    let mut buf = Vec::new();
    write_sweep_csv(&mut buf, &rows)?;
    sink.emit("sweep.csv", &buf)?;
    record_errors(&rows, &mut m);
    sink.manifest(&m)?;
    Ok(rows.iter().all(|r| r.error.is_none()))
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

fn check_cells(a: CheckCellsArgs, argv: &[String]) -> Result<bool> {
    let sink = Sink::new(&a.out)?;
    let c = &a.cells;
    let spec = CellFieldSpec {
        params: TessellationParams::new(c.ell, c.beta, c.eta, c.d)?,
        rho: a.rho,
        lambda: a.lambda,
        axis: a.axis,
        h_max: a.h_max,
        width: a.width,
        seed: a.seed,
    };
    let mut m = new_manifest("check-cells", argv);
    for (k, v) in [
        ("d", c.d.to_string()),
        ("ell", c.ell.to_string()),
        ("beta", c.beta.to_string()),
        ("eta", c.eta.to_string()),
        ("path_time", spec.params.path_time().to_string()),
        ("rho", a.rho.to_string()),
        ("lambda", a.lambda.to_string()),
        ("axis", a.axis.to_string()),
        ("h_max", a.h_max.to_string()),
        ("width", a.width.to_string()),
        ("seed", a.seed.to_string()),
    ] {
        m.push(k, v);
    }
    let fields = spec.evaluate(&CellEvent::ALL)?;
    let meta = spec.meta();
    let mut summary = String::new();
    for f in &fields {
        let n = f.up.window.len() * (a.h_max as usize + 1);
        let count = |fd: &crate::surface::CellEventField| {
            (0..fd.window.len())
                .flat_map(|col| (0..=a.h_max).map(move |h| (col, h)))
                .filter(|&(col, h)| fd.at(col, h))
                .count()
        };
        let _ = writeln!(
            summary,
            "{} up {}/{n} down {}/{n}",
            f.event.name(),
            count(&f.up),
            count(&f.down)
        );
        if sink.dir.is_some() {
            for (side, field) in [("up", &f.up), ("down", &f.down)] {
                let mut buf = Vec::new();
                write_field(&mut buf, &meta, field)?;
                sink.emit(&format!("{}_{side}.field", f.event.name()), &buf)?;
            }
        }
    }
    sink.emit("cells.txt", summary.as_bytes())?;
    sink.manifest(&m)?;
    Ok(true)
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn surface(a: SurfaceArgs, argv: &[String]) -> Result<bool> {
    let sink = Sink::new(&a.out)?;
    let (meta, up) = read_field(open(&a.input)?)?;
    let down = match &a.down {
        Some(p) => {
            let (dm, f) = read_field(open(p)?)?;
            if dm != meta {
                return Err(Error::Format("upward and downward fields have different headers".into()));
            }
            f
        }
        None => up.clone(),
    };
    if up.h_max != down.h_max {
        return Err(Error::Format("upward and downward fields have different h_max".into()));
    }
    let mut m = new_manifest("surface", argv);
    m.push("input", a.input.display());
    m.push("down", a.down.as_ref().map_or("same".into(), |p| p.display().to_string()));
    let two = extract_two_sided(&up, &down)?;
    let mut buf = Vec::new();
    write_surface(&mut buf, &meta, up.h_max, &two)?;
    sink.emit("surface.txt", &buf)?;
    let mut report = String::new();
    for (side, ext) in [("plus", &two.plus), ("minus", &two.minus)] {
        match ext.heights() {
            Some(f) => {
                let p = zero_height_percolation(f, &two.window)?;
                let _ = writeln!(
                    report,
                    "{side} feasible zero_columns={} components={} largest={} spans={}",
                    p.zero_columns, p.components, p.largest, p.spans
                );
            }
            None => {
                let _ = writeln!(report, "{side} infeasible");
            }
        }
    }
    if let Ok(s) = surrounds_origin(&two) {
        let _ = writeln!(report, "surrounds_origin {s}");
    }
    sink.emit("percolation.txt", report.as_bytes())?;
    sink.manifest(&m)?;
    Ok(true)
}

fn thinning(a: ThinningArgs, argv: &[String]) -> Result<bool> {
    let sink = Sink::new(&a.out)?;
    let mut m = new_manifest("verify-thinning", argv);
    m.push("rho", a.rho);
    m.push("d", a.d);
    m.push("samples", a.samples);
    m.push("seed", a.seed);
    m.push("alpha", 0.01);
    let r = verify_thinning(a.rho, a.d, a.samples, a.seed)?;
    sink.emit("thinning.txt", r.render().as_bytes())?;
    sink.manifest(&m)?;
    Ok(r.passed)
}

fn bounds(a: BoundsArgs, argv: &[String]) -> Result<bool> {
    let sink = Sink::new(&a.out)?;
    let inp = BoundInputs {
        rho: a.rho,
        lambda: a.lambda,
        ell: a.ell,
        beta: a.beta,
        eta_overlap: a.eta,
        d: a.d,
        c1: a.c1,
        c2: a.c2,
        c_acc: a.c_acc,
        c_good: a.c_good,
        alpha0: a.alpha0,
    };
    let mut m = new_manifest("bounds", argv);
    for (k, v) in [
        ("rho", a.rho),
        ("lambda", a.lambda),
        ("ell", a.ell),
        ("beta", a.beta),
        ("eta", a.eta),
        ("c1", a.c1),
        ("c2", a.c2),
        ("c_acc", a.c_acc),
        ("c_good", a.c_good),
        ("alpha0", a.alpha0),
    ] {
        m.push(k, v);
    }
    m.push("d", a.d);
    let mut text = String::new();
    let _ = writeln!(text, "bound_acceptable {:.6}", bound_acceptable(&inp));
    let _ = writeln!(text, "bound_good {:.6}", bound_good(&inp));
    let _ = writeln!(text, "good_point_probability {:.6}", good_point_probability(a.rho, a.d));
    let _ = writeln!(text, "bound_e_tilde_complement {:.6}", bound_e_tilde_complement(&inp));
    if let Some(eps) = a.eps {
        m.push("eps", eps);
        let _ = writeln!(
            text,
            "omega_lower_bound {:.6}",
            omega_lower_bound(a.eta, a.beta, a.ell, eps, a.c1, a.c2)?
        );
        if let Some(nu) = a.nu_hat {
            m.push("nu_hat", nu);
            let h = check_hypotheses(eps, a.rho, a.ell, a.d, nu, a.alpha0)?;
            let _ = writeln!(
                text,
                "hypotheses density_term={:.6} event_term={:.6} passes={}",
                h.density_term, h.event_term, h.passes
            );
        }
    } else if a.nu_hat.is_some() {
        return Err(Error::Parameter("--nu-hat requires --eps".into()));
    }
    sink.emit("bounds.txt", text.as_bytes())?;
    sink.manifest(&m)?;
    Ok(true)
}

fn coupling(a: CouplingArgs, argv: &[String]) -> Result<bool> {
    let sink = Sink::new(&a.out)?;
    let spec = ExperimentSpec {
        replicas: a.replicas,
        ..a.process.spec(a.rho, a.lambda)
    };
    let params = spec.params()?;
    let mut m = new_manifest("coupling-check", argv);
    spec.describe(&mut m);
    let run_density = a.rho_high.is_some();
    let run_recovery = a.lambda > 0.0 && a.lambda.is_finite();
    if !run_density && !run_recovery {
        return Err(Error::Parameter(
            "nothing to check: give --rho-high or a finite positive --lambda".into(),
        ));
    }
    if let Some(h) = a.rho_high {
        m.push("rho_high", h);
    }
    let mut text = String::from("seed,kind,checks,dominance_violations,containment_violations,survival_implication\n");
    let mut ok = true;
    for r in 0..a.replicas {
        let seed = spec.replica_seed(r);
        let mut pairs = Vec::new();
        if let Some(h) = a.rho_high {
            pairs.push(("density", coupled_density_run(&params, h, seed)?));
        }
        if run_recovery {
            pairs.push(("recovery", coupled_recovery_run(&params, seed)?));
        }
        for (kind, p) in pairs {
            let implied = !p.low_outcome().survived_to_horizon || p.high_outcome().survived_to_horizon;
            ok &= p.report.holds() && implied;
            let _ = writeln!(
                text,
                "{r},{kind},{},{},{},{}",
                p.report.checks, p.report.dominance_violations, p.report.containment_violations, implied
            );
        }
    }
    text.push_str(if ok { "PASS\n" } else { "FAIL\n" });
    sink.emit("coupling.csv", text.as_bytes())?;
    sink.manifest(&m)?;
    Ok(ok)
}

fn replay(a: ReplayArgs) -> Result<bool> {
    let recorded = Manifest::parse(open(&a.manifest)?)?;
    let mut argv = vec!["latticefire".to_string()];
    for k in 0.. {
        match recorded.get(&format!("arg.{k}")) {
            Some(v) => argv.push(v.to_string()),
            None => break,
        }
    }
    if argv.len() == 1 || argv[1] == "replay" {
        return Err(Error::Format("manifest records no replayable command".into()));
    }
    if let Some(dir) = &a.out.out {
        argv.push("--out".into());
        argv.push(dir.display().to_string());
    }
    let cli = Cli::try_parse_from(&argv).map_err(|e| Error::Format(format!("recorded arguments: {e}")))?;
    run(cli.command, &argv)
}

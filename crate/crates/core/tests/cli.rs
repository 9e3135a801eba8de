use std::path::Path;
use std::process::{Command, Output};

use latticefire::surface::{read_surface, write_field, BaseWindow, CellEventField, FieldMeta};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_latticefire"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn bounds_prints_acceptable_value() {
    let o = run(&["bounds", "--rho", "1", "--lambda", "0", "--ell", "8", "--c-acc", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().any(|l| l == "bound_acceptable 0.864665"));
    let manifest = String::from_utf8_lossy(&o.stderr);
    assert!(manifest.contains("c_acc=1\n") && manifest.contains("command=bounds\n"));
}

#[test]
fn verify_thinning_passes() {
    let o = run(&["verify-thinning", "--rho", "2", "--d", "1", "--samples", "100000"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().last(), Some("PASS"));
}

fn write_all_good(path: &Path) {
    let meta = FieldMeta {
        d: 1,
        ell: 3,
        beta: 12,
        eta: 5,
        axis: 1,
    };
    let field = CellEventField::constant(BaseWindow::line(5).unwrap(), 3, true);
    let mut f = std::fs::File::create(path).unwrap();
    write_field(&mut f, &meta, &field).unwrap();
}

#[test]
fn surface_of_all_good_field_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("field.txt");
    write_all_good(&input);
    let out = dir.path().join("out");
    let o = run(&["surface", "--in", input.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rec = read_surface(std::io::BufReader::new(std::fs::File::open(out.join("surface.txt")).unwrap())).unwrap();
    assert_eq!(rec.plus, Some(vec![0; 5]));
    assert_eq!(rec.minus, Some(vec![0; 5]));
    let report = std::fs::read_to_string(out.join("percolation.txt")).unwrap();
    assert!(report.contains("plus feasible zero_columns=5 components=1 largest=5 spans=true"));
    assert!(out.join("manifest.txt").exists());
}

#[test]
fn malformed_field_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.txt");
    std::fs::write(&input, "1 3 12 5 1 1\n0 0 1\n0 1 7\n").unwrap();
    let o = run(&["surface", "--in", input.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(run(&["surface", "--in", "/no/such/file"]).status.code(), Some(2));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["sweep", "--rho", "1"]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--rho", "1", "--lambda", "nan"]).status.code(), Some(2));
    assert_eq!(run(&["coupling-check", "--rho", "1", "--lambda", "0"]).status.code(), Some(2));
    // No survivors leaves the conditional estimate empty; a bad grid point
    // is recorded in its row and makes the run exit with 1.
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "sweep", "--rho", "0.001", "--lambda=inf,-1", "--horizon", "5", "--L", "8", "--replicas", "5",
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1], "0.001,inf,contact,1,8,5,5,0,0,0.43448246478317476,NA,NA,NA,0");
    assert!(rows[2].starts_with("0.001,-1,contact,1,8,5,NA,NA"));
    let manifest = std::fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    assert!(manifest.contains("error.row1=invalid parameter"));
}

#[test]
fn simulate_event_log_and_coupling_check() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = run(&["simulate", "--rho", "2", "--lambda", "inf", "--horizon", "10", "--L", "16", "--event-log", "--out", d]);
    assert_eq!(o.status.code(), Some(0));
    let log = std::fs::read_to_string(dir.path().join("events.csv")).unwrap();
    assert!(log.starts_with("time,kind,particle,from,to,infected\n"));
    let outcome = std::fs::read_to_string(dir.path().join("outcome.txt")).unwrap();
    let events: usize = outcome
        .lines()
        .find_map(|l| l.strip_prefix("events "))
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(log.lines().count(), events + 1);
    let o = run(&["coupling-check", "--rho", "1", "--rho-high", "3", "--lambda", "2", "--horizon", "10", "--L", "16", "--replicas", "8"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().last(), Some("PASS"));
}

use super::*;
use crate::rng::{make_stream, Purpose};

fn line(n: usize) -> BaseWindow {
    BaseWindow::line(n).unwrap()
}

#[test]
fn lipschitz_examples() {
    assert!(is_lipschitz(&[3, 3, 3], &line(3)));
    assert!(!is_lipschitz(&[0, 2], &line(2)));
    assert!(is_lipschitz(&[0, 1, 2, 1, 0], &line(5)));
    let sq = BaseWindow::new(vec![0, 0], vec![1, 1]).unwrap();
    assert!(is_lipschitz(&[0, 1, 1, 2], &sq));
    // Diagonal neighbors are two steps apart in the 1-norm.
    assert!(!is_lipschitz(&[0, 1, 1, 3], &sq));
}

#[test]
fn window_indexing_roundtrip() {
    let w = BaseWindow::new(vec![-1, 2, 0], vec![1, 4, 1]).unwrap();
    assert_eq!(w.len(), 18);
    for (i, b) in w.points().enumerate() {
        assert_eq!(w.index_of(&b), Some(i));
        for j in w.neighbors(i) {
            let c = w.point(j);
            assert_eq!(b.iter().zip(&c).map(|(x, y)| (x - y).abs()).sum::<i64>(), 1);
        }
    }
    assert_eq!(w.neighbors(0).len(), 3);
    assert!(BaseWindow::new(vec![0], vec![-1]).is_err());
}

#[test]
fn extraction_examples() {
    let all = CellEventField::constant(line(5), 3, true);
    assert_eq!(extract_minimal_surface(&all), Extraction::Feasible(vec![0; 5]));

    let field = CellEventField::from_thresholds(&[Some(0), Some(2), Some(0), Some(0), Some(0)], 3).unwrap();
    assert_eq!(extract_minimal_surface(&field), Extraction::Feasible(vec![1, 2, 1, 0, 0]));
    assert_eq!(brute_force_minimal_surface(&field).unwrap(), Extraction::Feasible(vec![1, 2, 1, 0, 0]));

    let dead = CellEventField::from_thresholds(&[Some(0), None, Some(0)], 3).unwrap();
    assert_eq!(extract_minimal_surface(&dead), Extraction::Infeasible { column: vec![1] });
    let none = CellEventField::constant(line(3), 2, false);
    assert!(!brute_force_minimal_surface(&none).unwrap().is_feasible());

    let single = CellEventField::from_fn(line(1), 5, |_, h| h == 3);
    assert_eq!(brute_force_minimal_surface(&single).unwrap(), Extraction::Feasible(vec![3]));
    assert_eq!(extract_minimal_surface(&single), Extraction::Feasible(vec![3]));

    // Raising past h_max is infeasible even though every column has a good cell.
    let steep = CellEventField::from_thresholds(&[Some(3), Some(0), Some(0), Some(0), Some(0)], 3).unwrap();
    assert_eq!(extract_minimal_surface(&steep), Extraction::Feasible(vec![3, 2, 1, 0, 0]));
    let holes = CellEventField::from_fn(line(3), 3, |b, h| if b[0] == 0 { h == 3 } else if b[0] == 1 { h == 0 } else { true });
    assert_eq!(extract_minimal_surface(&holes), Extraction::Infeasible { column: vec![1] });
    assert!(!brute_force_minimal_surface(&holes).unwrap().is_feasible());
}

#[test]
fn oracle_guard() {
    let big = CellEventField::constant(line(9), 2, true);
    assert!(matches!(brute_force_minimal_surface(&big), Err(crate::Error::Guard(_))));
    let tall = CellEventField::constant(line(2), 6, true);
    assert!(brute_force_minimal_surface(&tall).is_err());
}

fn random_field(window: BaseWindow, h_max: u32, p: f64, key: i64) -> CellEventField {
    let mut st = make_stream(99, Purpose::Initial, &[key]);
    CellEventField::from_fn(window, h_max, |_, _| st.uniform() < p)
}

fn check_against_oracle(field: &CellEventField) {
    let fast = extract_minimal_surface(field);
    let slow = brute_force_minimal_surface(field).unwrap();
    assert_eq!(fast.is_feasible(), slow.is_feasible(), "{field:?}");
    if let Extraction::Feasible(f) = &fast {
        assert_eq!(Some(f.as_slice()), slow.heights());
        assert!(is_lipschitz(f, &field.window));
        assert!(f.iter().enumerate().all(|(c, &h)| field.at(c, h)));
    }
}

#[test]
fn oracle_equivalence_random_small() {
    for key in 0..1000 {
        let n = 1 + key as usize % 6;
        let h = 1 + (key as u32 / 6) % 4;
        let p = [0.3, 0.5, 0.7, 0.9][key as usize % 4];
        check_against_oracle(&random_field(line(n), h, p, key));
    }
    let sq = BaseWindow::new(vec![0, 0], vec![1, 2]).unwrap();
    for key in 0..300 {
        check_against_oracle(&random_field(sq.clone(), 3, 0.6, 5000 + key));
    }
}

#[test]
fn minimality_and_monotonicity() {
    for key in 0..500 {
        let field = random_field(line(7), 4, 0.55, 10_000 + key);
        let Extraction::Feasible(f) = extract_minimal_surface(&field) else {
            continue;
        };
        for c in 0..f.len() {
            if f[c] == 0 {
                continue;
            }
            let mut g = f.clone();
            g[c] -= 1;
            assert!(!is_lipschitz(&g, &field.window) || !field.at(c, g[c]));
        }
        // Turning a bad cell good never raises the surface.
        let mut st = make_stream(7, Purpose::Initial, &[key]);
        let col = st.below(7) as usize;
        let h = st.below(5) as u32;
        let mut better = field.clone();
        better.set(col, h, true);
        let g = extract_minimal_surface(&better);
        let g = g.heights().expect("stays feasible");
        assert!(g.iter().zip(&f).all(|(a, b)| a <= b));
    }
}

#[test]
fn two_sided_examples() {
    let up = CellEventField::from_thresholds(&[Some(0), Some(2), Some(0), Some(0), Some(0)], 3).unwrap();
    let down = CellEventField::constant(line(5), 3, true);
    let s = extract_two_sided(&up, &down).unwrap();
    let surf = s.surface().unwrap();
    assert_eq!(surf.f_plus, vec![1, 2, 1, 0, 0]);
    assert_eq!(surf.f_minus, vec![0; 5]);

    let both = extract_two_sided(&down, &down).unwrap().surface().unwrap();
    assert_eq!((both.f_plus, both.f_minus), (vec![0; 5], vec![0; 5]));

    let dead = CellEventField::from_thresholds(&[Some(0), None, Some(0), Some(0), Some(0)], 3).unwrap();
    let s = extract_two_sided(&down, &dead).unwrap();
    assert!(s.plus.is_feasible() && !s.minus.is_feasible());
    assert!(s.surface().is_none());
    assert!(extract_two_sided(&down, &CellEventField::constant(line(4), 3, true)).is_err());
}

#[test]
fn surrounding_origin() {
    let w = BaseWindow::new(vec![-2], vec![2]).unwrap();
    let good = CellEventField::constant(w.clone(), 2, true);
    let s = extract_two_sided(&good, &good).unwrap();
    assert!(surrounds_origin(&s).unwrap());
    let bad = CellEventField::from_fn(w, 2, |b, _| b[0] != 1);
    assert!(!surrounds_origin(&extract_two_sided(&good, &bad).unwrap()).unwrap());
    let off = CellEventField::constant(BaseWindow::new(vec![1], vec![3]).unwrap(), 2, true);
    assert!(surrounds_origin(&extract_two_sided(&off, &off).unwrap()).is_err());
}

#[test]
fn percolation_reports() {
    let w = BaseWindow::new(vec![0, 0], vec![3, 3]).unwrap();
    let flat = zero_height_percolation(&[0; 16], &w).unwrap();
    assert_eq!((flat.components, flat.largest, flat.spans), (1, 16, true));
    assert_eq!(zero_height_percolation(&[1; 16], &w).unwrap(), PercolationReport::default());
    let checker: Vec<u32> = w.points().map(|b| ((b[0] + b[1]) % 2) as u32).collect();
    let r = zero_height_percolation(&checker, &w).unwrap();
    assert_eq!((r.components, r.largest, r.spans), (8, 1, false));
    assert!(zero_height_percolation(&[0; 3], &w).is_err());
}

#[test]
fn field_and_surface_text_roundtrip() {
    let meta = FieldMeta {
        d: 2,
        ell: 4,
        beta: 3,
        eta: 1,
        axis: 2,
    };
    let w = BaseWindow::new(vec![-1, 0], vec![1, 2]).unwrap();
    let field = random_field(w, 3, 0.7, 42);
    let mut buf = Vec::new();
    write_field(&mut buf, &meta, &field).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("2 4 3 1 2 3\n-1 0 0 "));
    let (m2, f2) = read_field(buf.as_slice()).unwrap();
    assert_eq!((m2, &f2), (meta, &field));

    let s = extract_two_sided(&field, &CellEventField::constant(field.window.clone(), 3, true)).unwrap();
    let mut out = Vec::new();
    write_surface(&mut out, &meta, 3, &s).unwrap();
    let rec = read_surface(out.as_slice()).unwrap();
    assert_eq!(rec.window, field.window);
    assert_eq!(rec.plus.as_deref(), s.plus.heights());
    assert_eq!(rec.minus.as_deref(), s.minus.heights());

    for broken in ["", "1 4 3 1 1\n0 0 1\n", "1 4 3 1 1 1\n0 0 1\n", "1 4 3 1 1 1\n0 0 1\n0 1 2\n", "1 4 3 1 1 0\n0 0 1\n2 0 1\n"] {
        assert!(matches!(read_field(broken.as_bytes()), Err(crate::Error::Format(_))), "{broken:?}");
    }
}

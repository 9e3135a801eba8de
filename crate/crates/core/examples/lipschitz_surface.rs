//! Indicator fields of acceptable cells around the origin and the minimal
//! two-sided Lipschitz surface through them, with the zero-set percolation
//! report. Fields and the surface are written in the text format read by
//! `latticefire surface`.
//!
//! `cargo run --release --example lipschitz_surface -- 20` (density)

use latticefire::harness::{CellEvent, CellFieldSpec};
use latticefire::surface::{extract_two_sided, surrounds_origin, write_field, write_surface, zero_height_percolation};
use latticefire::tessellation::TessellationParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rho: f64 = std::env::args().nth(1).map_or(Ok(20.0), |s| s.parse())?;
    let spec = CellFieldSpec {
        params: TessellationParams::new(3, 12, 5, 1)?,
        rho,
        lambda: 0.0,
        axis: 1,
        h_max: 4,
        width: 10,
        seed: 17,
    };
    let fields = spec.evaluate(&[CellEvent::Acceptable])?;
    let f = &fields[0];
    println!("acceptable cells, columns are time layers, rows heights (top: +4, bottom: -4)");
    for h in (0..=spec.h_max).rev() {
        let row: String = (0..f.up.window.len()).map(|c| if f.up.at(c, h) { '#' } else { '.' }).collect();
        println!("{:>3} {row}", h);
    }
    for h in 1..=spec.h_max {
        let row: String = (0..f.down.window.len()).map(|c| if f.down.at(c, h) { '#' } else { '.' }).collect();
        println!("{:>3} {row}", -(h as i64));
    }

    let two = extract_two_sided(&f.up, &f.down)?;
    println!("\nsurrounds origin: {}", surrounds_origin(&two)?);
    for (name, side) in [("F+", &two.plus), ("F-", &two.minus)] {
        match side.heights() {
            Some(hs) => {
                let p = zero_height_percolation(hs, &two.window)?;
                println!("{name} = {hs:?}; {} zero columns in {} components", p.zero_columns, p.components);
            }
            None => println!("{name}: no surface within h_max"),
        }
    }

    let mut text = Vec::new();
    write_field(&mut text, &spec.meta(), &f.up)?;
    println!("\nupward field file starts with:");
    for line in String::from_utf8(text)?.lines().take(4) {
        println!("  {line}");
    }
    let mut text = Vec::new();
    write_surface(&mut text, &spec.meta(), spec.h_max, &two)?;
    println!("surface file:\n{}", String::from_utf8(text)?);
    Ok(())
}

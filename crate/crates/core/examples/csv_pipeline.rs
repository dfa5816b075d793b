//! Write, read back, validate and merge dataset CSV files.
//!
//! ```bash
//! cargo run -p commentlab --example csv_pipeline
//! ```

use commentlab::dataset::{read_raw, Dataset};
use commentlab::generator::{gen_dataset, GeneratorConfig};
use commentlab::grammar::validate_sample;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let a_path = dir.path().join("a.csv");
    let b_path = dir.path().join("b.csv");

    let a = gen_dataset(&GeneratorConfig { seed: 1, count: 1000, ..Default::default() })?;
    let b = gen_dataset(&GeneratorConfig { seed: 2, count: 250, ..Default::default() })?;
    a.write_csv(&a_path)?;
    b.write_csv(&b_path)?;

    // Multi-line comments survive as quoted fields.
    let back = Dataset::read_csv(&a_path, true)?;
    assert_eq!(back, a);
    println!("round trip of {} rows ok", back.len());

    // Foreign files: read leniently, then check every row.
    let foreign = "Line of Code,Comment,Class\nint x = 3;,// counts retries,Useful\nint $y;,bad,Nope\n";
    std::fs::write(dir.path().join("foreign.csv"), foreign)?;
    for raw in read_raw(dir.path().join("foreign.csv"))? {
        match validate_sample(&raw.line, &raw.comment, &raw.label) {
            Ok(_) => println!("row {}: ok", raw.row),
            Err(v) => println!("row {}: {v}", raw.row),
        }
    }

    let merged = Dataset::merge(&Dataset::read_csv(&a_path, true)?, &Dataset::read_csv(&b_path, true)?);
    println!("merged: {}", merged.stats());
    Ok(())
}

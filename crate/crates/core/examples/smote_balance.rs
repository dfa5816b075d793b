//! Oversample the minority class of an imbalanced dataset with SMOTE.
//!
//! ```bash
//! cargo run -p commentlab --example smote_balance
//! ```

use commentlab::balance::{smote_balance, SmoteConfig};
use commentlab::dataset::Dataset;
use commentlab::features::embed_dataset;
use commentlab::generator::{gen_dataset, GeneratorConfig};
use commentlab::grammar::Label;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // 300 Useful and 120 Not Useful.
    let full = gen_dataset(&GeneratorConfig { seed: 8, count: 600, ..Default::default() })?;
    let (mut useful, mut not_useful) = (0, 0);
    let kept: Vec<_> = full
        .records()
        .iter()
        .filter(|r| match r.label {
            Label::Useful => (useful += 1, useful <= 300).1,
            Label::NotUseful => (not_useful += 1, not_useful <= 120).1,
        })
        .cloned()
        .collect();
    let ds = Dataset::new(kept, "imbalanced");
    println!("before: {}", ds.stats());

    let x = embed_dataset(&ds, 256);
    let out = smote_balance(&x, &ds.labels(), &SmoteConfig { seed: 3, ..Default::default() })?;
    let u = out.labels.iter().filter(|l| **l == Label::Useful).count();
    println!("after:  {u} Useful, {} Not Useful", out.labels.len() - u);
    for o in out.origins.iter().take(3) {
        println!("  synthetic = row {} + {:.3} * (row {} - row {})", o.base, o.gap, o.neighbor, o.base);
    }
    Ok(())
}

//! Generate a labelled dataset and write it with its metadata sidecar.
//!
//! ```bash
//! cargo run -p commentlab --example generate_dataset -- synth.csv 5000
//! ```

use commentlab::dataset::Metadata;
use commentlab::generator::{gen_dataset, Balance, GeneratorConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let out = args.next().unwrap_or_else(|| "synth.csv".into());
    let count = args.next().map(|s| s.parse()).transpose()?.unwrap_or(5000);

    let cfg = GeneratorConfig {
        seed: 42,
        count,
        balance: Balance::Exact,
        ..Default::default()
    };
    let ds = gen_dataset(&cfg)?;
    ds.write_csv(&out)?;
    cfg.metadata().write(Metadata::sidecar_path(out.as_ref()))?;

    println!("{}", ds.stats());
    for r in ds.records().iter().take(4) {
        println!("{:<24} {:<12} {}", r.line, r.label, r.comment.replace('\n', " | "));
    }

    // The script-style generator flips a fair coin per sample instead.
    let coin = gen_dataset(&GeneratorConfig {
        balance: Balance::Bernoulli,
        ..cfg
    })?;
    println!("bernoulli: {}", coin.stats());
    Ok(())
}

//! Repeated stratified cross-validation of all three classifiers, with the
//! report written as JSON lines and compared against a leaky run.
//!
//! ```bash
//! cargo run -p commentlab --example cross_validate
//! ```

use commentlab::evaluation::{compare_reports, run_experiment, BalanceMode, CvConfig, EmbedSource, ExperimentConfig};
use commentlab::generator::{gen_dataset, GeneratorConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ds = gen_dataset(&GeneratorConfig { seed: 4, count: 400, ..Default::default() })?.with_label_noise(0.15, 9);
    let cfg = ExperimentConfig {
        cv: CvConfig { folds: 5, repeats: 2, seed: 0 },
        embedding: EmbedSource::Hashed { dim: 256 },
        ..Default::default()
    }
    .with_seed(17);

    let in_fold = run_experiment(&ds, &cfg)?;
    print!("{}", in_fold.to_table());

    // SMOTE before splitting lets synthetic rows built from test samples into
    // training folds.
    let global = run_experiment(&ds, &ExperimentConfig { balance: BalanceMode::Global, ..cfg })?;
    print!("{}", global.to_table());
    print!("{}", compare_reports(&in_fold, &global)?.to_table());

    let path = std::env::temp_dir().join("commentlab-cv.jsonl");
    in_fold.save_jsonl(&path)?;
    println!("report: {}", path.display());
    Ok(())
}

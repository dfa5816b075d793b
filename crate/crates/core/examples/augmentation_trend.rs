//! Baseline versus augmented data: a noisy generated baseline, then the same
//! baseline plus clean generated samples, both under 10x3 cross-validation.
//!
//! ```bash
//! cargo run -p commentlab --example augmentation_trend -- 1000 500
//! ```

use commentlab::dataset::Dataset;
use commentlab::evaluation::{compare_reports, run_experiment, ExperimentConfig};
use commentlab::generator::{gen_dataset, GeneratorConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<usize>());
    let base_n = args.next().transpose()?.unwrap_or(1000);
    let extra_n = args.next().transpose()?.unwrap_or(500);

    let baseline = gen_dataset(&GeneratorConfig { seed: 1001, count: base_n, ..Default::default() })?
        .with_label_noise(0.1, 1002);
    let extra = gen_dataset(&GeneratorConfig { seed: 1003, count: extra_n, ..Default::default() })?;
    let augmented = Dataset::merge(&baseline, &extra);

    let cfg = ExperimentConfig::default().with_seed(1004);
    let before = run_experiment(&baseline, &cfg)?;
    let after = run_experiment(&augmented, &cfg)?;
    print!("{}\n{}\n", before.to_table(), after.to_table());
    print!("{}", compare_reports(&before, &after)?.to_table());
    Ok(())
}

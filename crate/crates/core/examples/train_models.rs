//! Train the three classifiers on a generated dataset, score them on a
//! held-out split and round-trip one through its JSON form.
//!
//! ```bash
//! cargo run -p commentlab --example train_models -- 2000
//! ```

use std::time::Instant;

use commentlab::evaluation::compute_metrics;
use commentlab::features::{embed_dataset, DEFAULT_DIM};
use commentlab::generator::{gen_dataset, GeneratorConfig};
use commentlab::models::{train, ModelConfig, ModelKind, TrainedModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let count = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(2000);
    let dataset = gen_dataset(&GeneratorConfig {
        seed: 42,
        count,
        ..Default::default()
    })?;
    let x = embed_dataset(&dataset, DEFAULT_DIM);
    let y = dataset.labels();

    // Every fifth row is held out.
    let (test, fit): (Vec<usize>, Vec<usize>) = (0..y.len()).partition(|i| i % 5 == 0);
    let (x_fit, x_test) = (x.select(&fit), x.select(&test));
    let y_fit: Vec<_> = fit.iter().map(|&i| y[i]).collect();
    let y_test: Vec<_> = test.iter().map(|&i| y[i]).collect();

    for kind in [ModelKind::RandomForest, ModelKind::Voting, ModelKind::NeuralNet] {
        let start = Instant::now();
        let model = train(&ModelConfig::default_for(kind).with_seed(7), &x_fit, &y_fit)?;
        let m = compute_metrics(&y_test, &model.predict(&x_test)?)?;
        println!(
            "{:<3} accuracy {:.3}  macro-F1 {:.3}  ({:.1?})",
            kind.short_name(),
            m.accuracy,
            m.macro_f1,
            start.elapsed()
        );
        if kind == ModelKind::NeuralNet {
            let restored = TrainedModel::from_json(&model.to_json())?;
            assert_eq!(restored.predict_proba(&x_test)?, model.predict_proba(&x_test)?);
            println!("    JSON round trip reproduces every probability");
        }
    }
    Ok(())
}

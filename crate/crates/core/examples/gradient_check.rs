//! Compare backpropagation against central finite differences, then show
//! that a corrupted gradient is caught.
//!
//! ```bash
//! cargo run -p commentlab --example gradient_check
//! ```

use commentlab::features::EmbeddingMatrix;
use commentlab::grammar::Label;
use commentlab::models::{gradient_check, gradient_check_with, NeuralNetConfig};
use commentlab::rng;
use rand::Rng;

fn main() {
    let mut r = rng::seeded(20);
    let mut x = EmbeddingMatrix::new(6);
    let mut y = Vec::new();
    for _ in 0..20 {
        let row: Vec<f64> = (0..6).map(|_| r.gen_range(-1.0..1.0)).collect();
        y.push(if row[0] > row[1] { Label::Useful } else { Label::NotUseful });
        x.push_row(&row);
    }
    for hidden in [vec![16], vec![12, 8]] {
        let cfg = NeuralNetConfig { hidden_sizes: hidden.clone(), seed: 1, ..Default::default() };
        let ok = gradient_check(&cfg, &x, &y);
        let bad = gradient_check_with(&cfg, &x, &y, |g| g[3] += 0.05);
        println!("hidden {hidden:?}: max relative error {ok:.2e}, with one corrupted entry {bad:.2e}");
    }
}

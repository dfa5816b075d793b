//! Hash samples into fixed-width character n-gram vectors.
//!
//! ```bash
//! cargo run -p commentlab --example embed_features
//! ```

use commentlab::features::{embed_pair, DEFAULT_DIM};

fn main() {
    let line = "int total = 5;";
    let useful = "// Declaration of Variable in the line of code:\n// int total = 5;";
    let filler = "// quBx Rt";

    let a = embed_pair(line, useful, DEFAULT_DIM);
    let b = embed_pair(line, filler, DEFAULT_DIM);
    let c = embed_pair("int totals = 5;", useful, DEFAULT_DIM);
    let nonzero = a.as_slice().iter().filter(|v| **v != 0.0).count();

    println!("dim {}, {nonzero} nonzero buckets, norm {:.6}", a.dim(), a.norm());
    println!("useful vs filler comment: cosine {:.3}", a.cosine(&b));
    println!("one-character edit:       cosine {:.3}", a.cosine(&c));
}

//! Fixed-length feature vectors for samples.
//!
//! The default embedder hashes character 3-, 4- and 5-grams of
//! `line + " " + comment` into `dim` signed buckets with XXH64 (seed 0) and
//! L2-normalizes the result. Bucket index is the low 32 bits of the hash
//! modulo `dim`; the sign is bit 63. Embeddings produced elsewhere (for
//! instance by a sentence encoder) can be loaded from CSV instead.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;
use twox_hash::XxHash64;

use crate::dataset::Dataset;

pub const DEFAULT_DIM: usize = 768;
pub const NGRAM_SIZES: [usize; 3] = [3, 4, 5];
const HASH_SEED: u64 = 0;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn cosine(&self, other: &FeatureVector) -> f64 {
        let dot: f64 = self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum();
        dot / (self.norm() * other.norm())
    }
}

/// Row-major `rows x dim` matrix of features.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    data: Vec<f64>,
    dim: usize,
}

impl EmbeddingMatrix {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        Self {
            data: Vec::new(),
            dim,
        }
    }

    pub fn from_flat(data: Vec<f64>, dim: usize) -> Self {
        assert!(dim > 0 && data.len().is_multiple_of(dim), "flat buffer is not a whole number of rows");
        Self { data, dim }
    }

    /// Panics if the rows have different lengths.
    pub fn from_rows<I, R>(rows: I, dim: usize) -> Self
    where
        I: IntoIterator<Item = R>,
        R: AsRef<[f64]>,
    {
        let mut m = Self::new(dim);
        for r in rows {
            m.push_row(r.as_ref());
        }
        m
    }

    pub fn push_row(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.dim, "row length differs from matrix dimension");
        self.data.extend_from_slice(row);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// New matrix holding the given rows, in the given order.
    pub fn select(&self, indices: &[usize]) -> EmbeddingMatrix {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        EmbeddingMatrix {
            data,
            dim: self.dim,
        }
    }

    /// Writes one comma-separated row per line, no header. Values use the
    /// shortest representation that parses back to the same `f64`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> io::Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        self.write_to(&mut out)?;
        out.flush()
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> io::Result<()> {
        for row in self.iter() {
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    w.write_all(b",")?;
                }
                write!(w, "{v:?}")?;
            }
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

fn hash_gram(gram: &str) -> u64 {
    XxHash64::oneshot(HASH_SEED, gram.as_bytes())
}

/// Signed hashed character n-gram features of `text`, L2-normalized. Text
/// shorter than three characters has no n-grams and maps to the zero vector.
pub fn embed_text(text: &str, dim: usize) -> FeatureVector {
    assert!(dim > 0, "embedding dimension must be positive");
    let mut values = vec![0.0; dim];
    let bounds: Vec<usize> = text
        .char_indices()
        .map(|(i, _)| i)
        .chain(std::iter::once(text.len()))
        .collect();
    let chars = bounds.len() - 1;
    for n in NGRAM_SIZES {
        if chars < n {
            continue;
        }
        for start in 0..=chars - n {
            let h = hash_gram(&text[bounds[start]..bounds[start + n]]);
            let bucket = (h as u32 as usize) % dim;
            let sign = if h >> 63 == 1 { -1.0 } else { 1.0 };
            values[bucket] += sign;
        }
    }
    let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        values.iter_mut().for_each(|v| *v /= norm);
    }
    FeatureVector(values)
}

/// Embeds the joint string `line + " " + comment`.
pub fn embed_pair(line: &str, comment: &str, dim: usize) -> FeatureVector {
    embed_text(&format!("{line} {comment}"), dim)
}

/// Row `i` is the embedding of record `i`. Rows are computed in parallel but
/// always placed in dataset order.
pub fn embed_dataset(dataset: &Dataset, dim: usize) -> EmbeddingMatrix {
    let rows: Vec<FeatureVector> = dataset
        .records()
        .par_iter()
        .map(|r| embed_pair(&r.line, &r.comment, dim))
        .collect();
    let mut m = EmbeddingMatrix::new(dim);
    for r in &rows {
        m.push_row(r.as_slice());
    }
    m
}

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("embedding file is malformed at row {row}: {source}")]
    Csv { row: usize, source: csv::Error },
    #[error("embedding file has no rows")]
    Empty,
    #[error("row {row} has {found} columns, expected {expected}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}, column {col}: `{cell}` is not a number")]
    NonNumeric { row: usize, col: usize, cell: String },
    #[error("row {row}, column {col}: value is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("embedding file has {found} rows but the dataset has {expected}")]
    RowCount { expected: usize, found: usize },
}

pub fn load_embeddings(path: impl AsRef<Path>, expected_rows: usize) -> Result<EmbeddingMatrix, EmbeddingError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| EmbeddingError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_embeddings(file, expected_rows)
}

/// Rows and columns in error messages are 1-based.
pub fn read_embeddings<R: Read>(reader: R, expected_rows: usize) -> Result<EmbeddingMatrix, EmbeddingError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut matrix: Option<EmbeddingMatrix> = None;
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|source| EmbeddingError::Csv { row, source })?;
        let m = matrix.get_or_insert_with(|| EmbeddingMatrix::new(rec.len().max(1)));
        if rec.len() != m.dim() {
            return Err(EmbeddingError::Ragged {
                row,
                expected: m.dim(),
                found: rec.len(),
            });
        }
        let mut values = Vec::with_capacity(rec.len());
        for (j, cell) in rec.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| EmbeddingError::NonNumeric {
                row,
                col: j + 1,
                cell: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(EmbeddingError::NonFinite { row, col: j + 1 });
            }
            values.push(v);
        }
        m.push_row(&values);
    }
    let matrix = matrix.ok_or(EmbeddingError::Empty)?;
    if matrix.rows() != expected_rows {
        return Err(EmbeddingError::RowCount {
            expected: expected_rows,
            found: matrix.rows(),
        });
    }
    Ok(matrix)
}

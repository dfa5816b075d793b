//! Labeled code-comment datasets and their CSV form.
//!
//! Files carry the header `Line of Code,Comment,Class`. Fields are quoted
//! only when they contain a comma, quote or line break, records end in `\n`,
//! and `\r\n` input is accepted.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rand::seq::index;
use thiserror::Error;

use crate::grammar::{validate_sample, Label, Sample, SampleViolations, Violation};
use crate::rng;

pub const HEADER: [&str; 3] = ["Line of Code", "Comment", "Class"];

/// One row as stored on disk. Strings are kept verbatim so lenient loads of
/// external data survive a round trip.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub line: String,
    pub comment: String,
    pub label: Label,
}

impl Record {
    pub fn validate(&self) -> Result<Sample, SampleViolations> {
        validate_sample(&self.line, &self.comment, self.label.as_str())
    }
}

/// A row whose label has not been parsed yet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRecord {
    /// 1-based data row (the header is row 0).
    pub row: usize,
    pub line: String,
    pub comment: String,
    pub label: String,
}

#[derive(Debug, Clone, Default)]
pub struct Dataset {
    records: Vec<Record>,
    provenance: String,
}

/// Equality compares the records only, not the provenance tag.
impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        self.records == other.records
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassStats {
    pub total: usize,
    pub useful: usize,
    pub not_useful: usize,
    /// `None` for an empty dataset.
    pub useful_fraction: Option<f64>,
}

impl std::fmt::Display for ClassStats {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "total={} useful={} not_useful={} useful_fraction=",
            self.total, self.useful, self.not_useful
        )?;
        match self.useful_fraction {
            Some(frac) => write!(f, "{:.4} ({:.1}%)", frac, frac * 100.0),
            None => f.write_str("undefined"),
        }
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("row {row}: {source}")]
    Csv { row: usize, source: csv::Error },
    #[error("missing header row; expected `Line of Code,Comment,Class`")]
    MissingHeader,
    #[error("bad header `{found}`; expected `Line of Code,Comment,Class`")]
    BadHeader { found: String },
    #[error("row {row}: expected 3 fields, found {found}")]
    FieldCount { row: usize, found: usize },
    #[error("row {row}: {source}")]
    Label { row: usize, source: Violation },
    #[error("row {row}: {source}")]
    Invalid { row: usize, source: SampleViolations },
}

impl DatasetError {
    /// True for structural problems with the file as opposed to rule
    /// violations in its content.
    pub fn is_format_error(&self) -> bool {
        !matches!(self, DatasetError::Invalid { .. } | DatasetError::Label { .. })
    }
}

impl Dataset {
    pub fn new(records: Vec<Record>, provenance: impl Into<String>) -> Self {
        Self {
            records,
            provenance: provenance.into(),
        }
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.records.iter().map(|r| r.label).collect()
    }

    pub fn stats(&self) -> ClassStats {
        let useful = self.records.iter().filter(|r| r.label == Label::Useful).count();
        let total = self.records.len();
        ClassStats {
            total,
            useful,
            not_useful: total - useful,
            useful_fraction: (total > 0).then(|| useful as f64 / total as f64),
        }
    }

    /// `a` followed by `b`, no deduplication.
    pub fn merge(a: &Dataset, b: &Dataset) -> Dataset {
        let mut records = Vec::with_capacity(a.len() + b.len());
        records.extend_from_slice(&a.records);
        records.extend_from_slice(&b.records);
        Dataset::new(records, format!("merge({}, {})", a.provenance, b.provenance))
    }

    /// Flips the label of `round(fraction * len)` distinct records chosen
    /// by `seed`. Text is left untouched.
    pub fn with_label_noise(&self, fraction: f64, seed: u64) -> Dataset {
        let n = self.records.len();
        let flips = ((fraction.clamp(0.0, 1.0) * n as f64).round() as usize).min(n);
        let mut records = self.records.clone();
        let mut rng = rng::seeded(seed);
        for i in index::sample(&mut rng, n, flips) {
            records[i].label = records[i].label.flipped();
        }
        Dataset::new(
            records,
            format!("noisy({}, fraction={fraction}, seed={seed})", self.provenance),
        )
    }

    pub fn read_csv(path: impl AsRef<Path>, strict: bool) -> Result<Dataset, DatasetError> {
        let path = path.as_ref();
        let file = open(path)?;
        let mut ds = Self::read_from(file, strict)?;
        ds.provenance = path.display().to_string();
        Ok(ds)
    }

    /// Lenient mode only requires a valid label; strict mode validates the
    /// full sample and stops at the first bad row.
    pub fn read_from<R: Read>(reader: R, strict: bool) -> Result<Dataset, DatasetError> {
        let mut records = Vec::new();
        for raw in read_raw_from(reader)? {
            let label = raw
                .label
                .parse::<Label>()
                .map_err(|source| DatasetError::Label { row: raw.row, source })?;
            if strict {
                validate_sample(&raw.line, &raw.comment, &raw.label)
                    .map_err(|source| DatasetError::Invalid { row: raw.row, source })?;
            }
            records.push(Record {
                line: raw.line,
                comment: raw.comment,
                label,
            });
        }
        Ok(Dataset::new(records, "stream"))
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<(), DatasetError> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|source| DatasetError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut out = BufWriter::new(file);
        self.write_to(&mut out)
            .and_then(|_| out.flush().map_err(csv::Error::from))
            .map_err(|source| DatasetError::Csv { row: 0, source })
    }

    pub fn write_to<W: Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(writer);
        w.write_record(HEADER)?;
        for r in &self.records {
            w.write_record([r.line.as_str(), r.comment.as_str(), r.label.as_str()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("records are UTF-8")
    }
}

fn open(path: &Path) -> Result<File, DatasetError> {
    File::open(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_raw(path: impl AsRef<Path>) -> Result<Vec<RawRecord>, DatasetError> {
    read_raw_from(open(path.as_ref())?)
}

/// Parses the header and every row without interpreting any field.
pub fn read_raw_from<R: Read>(reader: R) -> Result<Vec<RawRecord>, DatasetError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut rows = rdr.records();
    let header = match rows.next() {
        None => return Err(DatasetError::MissingHeader),
        Some(h) => h.map_err(|source| DatasetError::Csv { row: 0, source })?,
    };
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(DatasetError::BadHeader {
            found: header.iter().collect::<Vec<_>>().join(","),
        });
    }
    let mut out = Vec::new();
    for (i, rec) in rows.enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|source| DatasetError::Csv { row, source })?;
        if rec.len() != 3 {
            return Err(DatasetError::FieldCount {
                row,
                found: rec.len(),
            });
        }
        out.push(RawRecord {
            row,
            line: rec[0].to_string(),
            comment: normalize_newlines(&rec[1]),
            label: rec[2].to_string(),
        });
    }
    Ok(out)
}

fn normalize_newlines(s: &str) -> String {
    if s.contains('\r') {
        s.replace("\r\n", "\n")
    } else {
        s.to_string()
    }
}

/// Ordered `key=value` metadata, stored in a sidecar next to a dataset.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Metadata(BTreeMap<String, String>);

impl Metadata {
    pub fn insert(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.0.insert(key.into(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Sidecar location for a dataset file: `<path>.meta`.
    pub fn sidecar_path(dataset: &Path) -> PathBuf {
        let mut name = dataset.as_os_str().to_owned();
        name.push(".meta");
        PathBuf::from(name)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> io::Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        for (k, v) in &self.0 {
            writeln!(out, "{k}={v}")?;
        }
        out.flush()
    }

    /// Parses `key=value` lines; blank lines and `#` comments are skipped.
    pub fn parse<R: BufRead>(reader: R) -> io::Result<Metadata> {
        let mut meta = Metadata::default();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                io::Error::new(
                    io::ErrorKind::InvalidData,
                    format!("line {}: expected key=value, found `{line}`", n + 1),
                )
            })?;
            meta.insert(k.trim(), v.trim());
        }
        Ok(meta)
    }

    pub fn read(path: impl AsRef<Path>) -> io::Result<Metadata> {
        Self::parse(BufReader::new(File::open(path)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{gen_dataset, GeneratorConfig};
    use proptest::prelude::*;

    fn rec(line: &str, comment: &str, label: Label) -> Record {
        Record {
            line: line.into(),
            comment: comment.into(),
            label,
        }
    }

    #[test]
    fn reads_single_row() {
        let text = "Line of Code,Comment,Class\nint marks = 10;,// Declaration of Variable,Useful\n";
        let ds = Dataset::read_from(text.as_bytes(), true).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.records()[0].line, "int marks = 10;");
        assert_eq!(ds.records()[0].label, Label::Useful);
    }

    #[test]
    fn header_errors() {
        let err = Dataset::read_from("code,comment,label\n".as_bytes(), false).unwrap_err();
        assert!(matches!(err, DatasetError::BadHeader { .. }));
        assert!(err.is_format_error());
        let err = Dataset::read_from("".as_bytes(), false).unwrap_err();
        assert!(matches!(err, DatasetError::MissingHeader));
    }

    #[test]
    fn label_and_strict_errors_carry_rows() {
        let text = "Line of Code,Comment,Class\nint a;,// ok,Useful\nint b;,// ok,Maybe\n";
        match Dataset::read_from(text.as_bytes(), false).unwrap_err() {
            DatasetError::Label { row, source } => {
                assert_eq!(row, 2);
                assert_eq!(source.rule(), 16);
            }
            other => panic!("{other}"),
        }
        let text = "Line of Code,Comment,Class\nint a;,// ok,Useful\nint $myvar;,// ok,Useful\n";
        assert_eq!(Dataset::read_from(text.as_bytes(), false).unwrap().len(), 2);
        match Dataset::read_from(text.as_bytes(), true).unwrap_err() {
            DatasetError::Invalid { row, source } => {
                assert_eq!(row, 2);
                assert_eq!(source.first().1.rule(), 8);
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn field_count_checked() {
        let text = "Line of Code,Comment,Class\nint a;,Useful\n";
        assert!(matches!(
            Dataset::read_from(text.as_bytes(), false).unwrap_err(),
            DatasetError::FieldCount { row: 1, found: 2 }
        ));
    }

    #[test]
    fn empty_dataset_writes_header_only() {
        assert_eq!(Dataset::default().to_csv_string(), "Line of Code,Comment,Class\n");
    }

    #[test]
    fn multiline_comment_is_quoted() {
        let ds = Dataset::new(
            vec![rec(
                "int x;",
                "// Usage of Data in the line of code:\n// int x;",
                Label::Useful,
            )],
            "t",
        );
        let csv = ds.to_csv_string();
        assert_eq!(
            csv,
            "Line of Code,Comment,Class\nint x;,\"// Usage of Data in the line of code:\n// int x;\",Useful\n"
        );
        assert_eq!(Dataset::read_from(csv.as_bytes(), true).unwrap(), ds);
    }

    #[test]
    fn crlf_input_is_tolerated() {
        let text = "Line of Code,Comment,Class\r\nint x;,\"// a\r\n// b\",Not Useful\r\n";
        let ds = Dataset::read_from(text.as_bytes(), true).unwrap();
        assert_eq!(ds.records()[0].comment, "// a\n// b");
        assert_eq!(ds.records()[0].label, Label::NotUseful);
    }

    #[test]
    fn generated_round_trip_through_file() {
        let ds = gen_dataset(&GeneratorConfig {
            count: 1000,
            seed: 17,
            ..Default::default()
        })
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        ds.write_csv(&path).unwrap();
        let back = Dataset::read_csv(&path, true).unwrap();
        assert_eq!(back, ds);
        assert_eq!(back.provenance(), path.display().to_string());
    }

    #[test]
    fn stats_cases() {
        let s = Dataset::default().stats();
        assert_eq!((s.total, s.useful_fraction), (0, None));

        let one = Dataset::new(vec![rec("int a;", "// a", Label::Useful)], "t");
        assert_eq!(one.stats().useful_fraction, Some(1.0));

        let mut records = vec![rec("int a;", "// a", Label::Useful); 7474];
        records.extend(vec![rec("int b;", "// b", Label::NotUseful); 4399]);
        let s = Dataset::new(records, "baseline-shaped").stats();
        assert_eq!(s.total, 11873);
        let frac = s.useful_fraction.unwrap();
        assert!((frac - 0.6295).abs() < 1e-4, "{frac}");
        assert_eq!(format!("{:.1}", frac * 100.0), "62.9");
    }

    #[test]
    fn merge_counts() {
        let a = Dataset::new(vec![rec("int a;", "// a", Label::Useful); 11873], "a");
        let b = gen_dataset(&GeneratorConfig {
            count: 5000,
            seed: 1,
            ..Default::default()
        })
        .unwrap();
        let m = Dataset::merge(&a, &b);
        assert_eq!(m.len(), 16873);
        assert_eq!(m.stats().useful, a.stats().useful + b.stats().useful);
        assert_eq!(&m.records()[..11873], a.records());
        assert!(m.provenance().contains("a") && m.provenance().contains("generated"));
        assert_eq!(Dataset::merge(&a, &Dataset::default()), a);
    }

    #[test]
    fn label_noise_flips_exact_count() {
        let ds = gen_dataset(&GeneratorConfig {
            count: 1000,
            seed: 2,
            ..Default::default()
        })
        .unwrap();
        let noisy = ds.with_label_noise(0.1, 5);
        let flipped = ds
            .records()
            .iter()
            .zip(noisy.records())
            .filter(|(a, b)| a.label != b.label)
            .count();
        assert_eq!(flipped, 100);
        assert_eq!(noisy, ds.with_label_noise(0.1, 5));
    }

    #[test]
    fn metadata_round_trip() {
        let mut meta = Metadata::default();
        meta.insert("seed", "42");
        meta.insert("rng_algorithm", "x");
        let dir = tempfile::tempdir().unwrap();
        let path = Metadata::sidecar_path(&dir.path().join("s.csv"));
        assert!(path.to_string_lossy().ends_with("s.csv.meta"));
        meta.write(&path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "rng_algorithm=x\nseed=42\n");
        assert_eq!(Metadata::read(&path).unwrap(), meta);
        assert!(Metadata::parse("novalue\n".as_bytes()).is_err());
    }

    fn arb_record() -> impl Strategy<Value = Record> {
        (
            "[ -~]{0,20}",
            "[ -~\n]{0,40}",
            prop::sample::select(Label::ALL.to_vec()),
        )
            .prop_map(|(line, comment, label)| Record {
                line,
                comment,
                label,
            })
    }

    proptest! {
        #[test]
        fn lenient_round_trip(records in prop::collection::vec(arb_record(), 0..20)) {
            let ds = Dataset::new(records, "p");
            let back = Dataset::read_from(ds.to_csv_string().as_bytes(), false).unwrap();
            prop_assert_eq!(back, ds);
        }

        #[test]
        fn merge_is_associative(a in 0usize..30, b in 0usize..30, c in 0usize..30) {
            let mk = |n: usize, s: u64| gen_dataset(&GeneratorConfig { count: n.max(1), seed: s, ..Default::default() }).unwrap();
            let (a, b, c) = (mk(a, 1), mk(b, 2), mk(c, 3));
            let left = Dataset::merge(&Dataset::merge(&a, &b), &c);
            let right = Dataset::merge(&a, &Dataset::merge(&b, &c));
            prop_assert_eq!(left.stats().total, a.len() + b.len() + c.len());
            prop_assert_eq!(left, right);
        }
    }
}

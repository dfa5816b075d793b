use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::metrics::MetricSet;
use crate::grammar::Label;
use crate::models::ModelConfig;

/// Everything needed to rerun an experiment, echoed into its report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub dataset: String,
    pub samples: usize,
    pub useful: usize,
    pub not_useful: usize,
    pub folds: usize,
    pub repeats: usize,
    pub cv_seed: u64,
    pub balance: String,
    pub smote_k: usize,
    pub smote_seed: u64,
    pub embedding: String,
    pub models: Vec<(String, ModelConfig)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldScore {
    pub model: String,
    pub repeat: usize,
    pub fold: usize,
    pub train_rows: usize,
    pub synthetic_rows: usize,
    pub test_rows: usize,
    pub metrics: MetricSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub model: String,
    pub folds: usize,
    pub mean: MetricSet,
    pub std_dev: MetricSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub config: ReportConfig,
    /// Repeat-major, then fold, then model order.
    pub folds: Vec<FoldScore>,
    /// One per model, in configuration order.
    pub summaries: Vec<ModelSummary>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum Line {
    Config(ReportConfig),
    Fold(FoldScore),
    Summary(ModelSummary),
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("report i/o: {0}")]
    Io(#[from] io::Error),
    #[error("report line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("report has no config record")]
    MissingConfig,
}

fn pct(v: f64) -> String {
    format!("{:.3}", v * 100.0)
}

impl EvaluationReport {
    /// Aggregates fold scores per model, in the order models first appear.
    pub fn from_folds(config: ReportConfig, folds: Vec<FoldScore>) -> Self {
        let mut names: Vec<&str> = Vec::new();
        for f in &folds {
            if !names.contains(&f.model.as_str()) {
                names.push(&f.model);
            }
        }
        let summaries = names
            .iter()
            .map(|name| {
                let sets: Vec<MetricSet> = folds.iter().filter(|f| f.model == *name).map(|f| f.metrics).collect();
                ModelSummary {
                    model: name.to_string(),
                    folds: sets.len(),
                    mean: MetricSet::mean(&sets),
                    std_dev: MetricSet::std_dev(&sets),
                }
            })
            .collect();
        Self {
            config,
            folds,
            summaries,
        }
    }

    pub fn summary(&self, model: &str) -> Option<&ModelSummary> {
        self.summaries.iter().find(|s| s.model == model)
    }

    pub fn model_names(&self) -> Vec<&str> {
        self.summaries.iter().map(|s| s.model.as_str()).collect()
    }

    /// JSON lines: one `config` record, then `fold` records, then `summary`
    /// records.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> io::Result<()> {
        let mut emit = |line: &Line| -> io::Result<()> {
            serde_json::to_writer(&mut w, line)?;
            w.write_all(b"\n")
        };
        emit(&Line::Config(self.config.clone()))?;
        for f in &self.folds {
            emit(&Line::Fold(f.clone()))?;
        }
        for s in &self.summaries {
            emit(&Line::Summary(s.clone()))?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("json is UTF-8")
    }

    pub fn save_jsonl(&self, path: impl AsRef<Path>) -> io::Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        self.write_jsonl(&mut out)?;
        out.flush()
    }

    pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Self, ReportError> {
        let mut config = None;
        let mut folds = Vec::new();
        let mut summaries = Vec::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<Line>(&line) {
                Ok(Line::Config(c)) => config = Some(c),
                Ok(Line::Fold(f)) => folds.push(f),
                Ok(Line::Summary(s)) => summaries.push(s),
                Err(e) => {
                    return Err(ReportError::Parse {
                        line: n + 1,
                        message: e.to_string(),
                    })
                }
            }
        }
        Ok(Self {
            config: config.ok_or(ReportError::MissingConfig)?,
            folds,
            summaries,
        })
    }

    pub fn load_jsonl(path: impl AsRef<Path>) -> Result<Self, ReportError> {
        Self::read_jsonl(BufReader::new(File::open(path)?))
    }

    /// Summary CSV of mean scores, in percent with 3 decimals.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from(
            "model,folds,accuracy,useful_f1,useful_precision,useful_recall,not_useful_f1,not_useful_precision,not_useful_recall,macro_f1\n",
        );
        for s in &self.summaries {
            let m = &s.mean;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                s.model,
                s.folds,
                pct(m.accuracy),
                pct(m.useful.f1),
                pct(m.useful.precision),
                pct(m.useful.recall),
                pct(m.not_useful.f1),
                pct(m.not_useful.precision),
                pct(m.not_useful.recall),
                pct(m.macro_f1)
            );
        }
        out
    }

    /// Aligned text table of mean scores (percent, 3 decimals). Per-class F1
    /// columns sit under each class; `Macro-F1` is their mean.
    pub fn to_table(&self) -> String {
        let header = [
            "Model", "U F1", "U Prec", "U Rec", "Accuracy", "NU F1", "NU Prec", "NU Rec", "Macro-F1", "±Macro-F1",
        ];
        let mut rows = vec![header.iter().map(|s| s.to_string()).collect::<Vec<_>>()];
        for s in &self.summaries {
            let m = &s.mean;
            rows.push(vec![
                s.model.clone(),
                pct(m.useful.f1),
                pct(m.useful.precision),
                pct(m.useful.recall),
                pct(m.accuracy),
                pct(m.not_useful.f1),
                pct(m.not_useful.precision),
                pct(m.not_useful.recall),
                pct(m.macro_f1),
                pct(s.std_dev.macro_f1),
            ]);
        }
        let mut out = format!(
            "{} | {} folds x {} repeats | balance={} | embedding={}\n",
            self.config.dataset, self.config.folds, self.config.repeats, self.config.balance, self.config.embedding
        );
        out.push_str(&align(&rows));
        out
    }
}

fn align(rows: &[Vec<String>]) -> String {
    let cols = rows[0].len();
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (i, r) in rows.iter().enumerate() {
        let cells: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(c, v)| {
                if c == 0 {
                    format!("{v:<w$}", w = widths[c])
                } else {
                    format!("{v:>w$}", w = widths[c])
                }
            })
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
        if i == 0 {
            let total = widths.iter().sum::<usize>() + 2 * (cols - 1);
            out.push_str(&"-".repeat(total));
            out.push('\n');
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompareError {
    #[error("reports cover different models: {before:?} vs {after:?}")]
    ModelMismatch { before: Vec<String>, after: Vec<String> },
}

/// Per-class F1 change for one model, scores in percent.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaRow {
    pub model: String,
    pub class: Label,
    pub before: f64,
    pub after: f64,
    /// `after - before`, in percentage points.
    pub difference: f64,
    /// `after / before`; `None` when `before` is zero.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaTable {
    /// Model-major, Useful before Not Useful.
    pub rows: Vec<DeltaRow>,
}

/// Builds the before/after per-class F1 table. Both the point difference and
/// the after/before ratio are reported.
pub fn compare_reports(before: &EvaluationReport, after: &EvaluationReport) -> Result<DeltaTable, CompareError> {
    let mut b_names: Vec<String> = before.model_names().iter().map(|s| s.to_string()).collect();
    let mut a_names: Vec<String> = after.model_names().iter().map(|s| s.to_string()).collect();
    b_names.sort();
    a_names.sort();
    if b_names != a_names {
        return Err(CompareError::ModelMismatch {
            before: b_names,
            after: a_names,
        });
    }
    let mut rows = Vec::new();
    for sb in &before.summaries {
        let sa = after.summary(&sb.model).expect("model sets are equal");
        for class in Label::ALL {
            rows.push(delta_row(
                &sb.model,
                class,
                sb.mean.per_class(class).f1 * 100.0,
                sa.mean.per_class(class).f1 * 100.0,
            ));
        }
    }
    Ok(DeltaTable { rows })
}

/// One row from two scores already in percent.
pub fn delta_row(model: &str, class: Label, before: f64, after: f64) -> DeltaRow {
    DeltaRow {
        model: model.to_string(),
        class,
        before,
        after,
        difference: after - before,
        ratio: (before != 0.0).then(|| after / before),
    }
}

impl DeltaTable {
    pub fn to_table(&self) -> String {
        let mut rows = vec![["Model", "Class", "Before", "After", "Increase (pp)", "Ratio"]
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()];
        for r in &self.rows {
            rows.push(vec![
                r.model.clone(),
                r.class.to_string(),
                format!("{:.3}", r.before),
                format!("{:.3}", r.after),
                format!("{:+.3}", r.difference),
                r.ratio.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}")),
            ]);
        }
        align(&rows)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("model,class,before,after,difference,ratio\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{:.3},{:.3},{:.3},{}",
                r.model,
                r.class,
                r.before,
                r.after,
                r.difference,
                r.ratio.map_or_else(String::new, |v| format!("{v:.6}"))
            );
        }
        out
    }
}

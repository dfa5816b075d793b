//! Repeated stratified cross-validation, metrics and report handling.

mod cv;
mod experiment;
mod metrics;
mod report;

pub use cv::{repeated_stratified_kfold, CvConfig, CvError, Split};
pub use experiment::{
    run_experiment, BalanceMode, EmbedSource, ExperimentConfig, ExperimentError, FoldError, ModelSpec,
};
pub use metrics::{compute_metrics, ClassMetrics, Confusion, MetricSet, MetricsError};
pub use report::{
    compare_reports, delta_row, CompareError, DeltaRow, DeltaTable, EvaluationReport, FoldScore, ModelSummary,
    ReportConfig, ReportError,
};

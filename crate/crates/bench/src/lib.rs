//! Evaluation harness: dataset preparation, run matrix, blinded bundles,
//! annotation ingestion and statistics.

mod annotation;
mod bundle;
mod dataset;
mod error;
pub mod io;
mod metrics;
mod report;
mod run;
mod sample;
mod sentence;
mod split;
pub mod stats;
mod tables;
mod task;
mod variant;

pub use annotation::{ingest_annotations, AnnotationRecord, Scores};
pub use bundle::{
    build_blinded_bundle, label, label_permutation, BundleCandidate, BundleKey, BundleManifest,
    BundleTask, KEY_FILE, MANIFEST_FILE,
};
pub use dataset::{convert_uicrit_csv, load_records, Conversion, CritiqueRecord};
pub use error::BenchError;
pub use metrics::{aggregate_metrics, agreement_rate, Metric, MetricSummary, PairTest, ScoreStats, VariantMetrics};
pub use report::{build_report, render_report_tables, BenchReport, ReportGroup, POOLING_NOTE};
pub use run::{
    completed_cells, image_path, load_task_image, record_path, run_matrix, sg_path, CellError,
    CellRecord, RunConfig, RunReport, ERROR_LEDGER,
};
pub use sample::{largest_remainder, stratified_sample};
pub use sentence::{extract_feedback_sentence, split_sentences};
pub use split::{round_proportional, split_counts, stratified_split, Allocation, DEFAULT_ALLOCATIONS};
pub use stats::{mann_whitney_u, sign_test_one_sided, MannWhitney, PMethod};
pub use tables::{render_table, TableBlock};
pub use task::{BenchTask, Split};
pub use variant::{parse_variants, PlannedTask, Preset, RunVariant};

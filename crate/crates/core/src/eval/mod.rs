//! Evaluation harness: dataset loaders, classification and report-quality
//! metrics, the LLM judge, batch and ablation runners, and the perturbation
//! ladder used for robustness runs.

mod ablation;
mod batch;
mod dataset;
mod judge;
mod metrics;
mod perturb;

pub use ablation::{
    canonical_configs, run_ablation, AblationRow, AblationTable, FULL_AGENT, LLM_ONLY,
    NO_CREDIBILITY, NO_NUMERIC, NO_SEARCH,
};
pub use batch::{results_csv, run_batch, score_results, BatchOptions, RecordResult};
pub use dataset::{load_dataset, map_label, Dataset, DatasetFormat, DatasetRecord, DEFAULT_SEED};
pub use judge::{judge_report, mean_quality, ReportQuality, JUDGE_RUNS};
pub use metrics::{
    accuracy_drop, classification_metrics, consistency_mean, consistency_score, diversity_score,
    f1_score, relevance_score, ClassScores, MetricScores,
};
pub use perturb::{
    perturb, perturb_dataset, robustness_csv, run_robustness, FixtureRewriter, LlmRewriter,
    PerturbationLevel, Rewriter, RobustnessRow,
};

use crate::llm::LlmError;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("unknown dataset format `{0}`")]
    UnknownFormat(String),
    #[error("{path}: row {row}: unknown label `{label}`")]
    UnknownLabel { path: String, row: usize, label: String },
    #[error("{path}: row {row}: {message}")]
    Schema { path: String, row: usize, message: String },
    #[error("duplicate record id `{0}`")]
    DuplicateId(String),
    #[error("{pred} predictions for {gold} gold labels")]
    LengthMismatch { pred: usize, gold: usize },
    #[error("label `{0}` is not in the label scheme")]
    OutOfScheme(String),
    #[error("{metric} label {value} is not an allowed value")]
    OutOfSet { metric: &'static str, value: f64 },
    #[error("judge run {run} failed: {source}")]
    Judge {
        run: usize,
        #[source]
        source: LlmError,
    },
    #[error("unknown perturbation level `{0}`")]
    UnknownLevel(String),
    #[error("rewriting `{id}` failed: {source}")]
    Rewrite {
        id: String,
        #[source]
        source: LlmError,
    },
    #[error("no {level} rewrite for `{id}`")]
    MissingRewrite { id: String, level: PerturbationLevel },
    #[error("{level} rewrite of `{id}` has the same tokens as the input")]
    IdenticalRewrite { id: String, level: PerturbationLevel },
    #[error("invalid rewrite fixture: {0}")]
    RewriteFixture(String),
    #[error("invalid run configuration: {0}")]
    Config(String),
    #[error("writing CSV: {0}")]
    Csv(#[from] csv::Error),
}

pub(crate) fn csv_string(w: csv::Writer<Vec<u8>>) -> Result<String, EvalError> {
    let bytes = w.into_inner().map_err(|e| EvalError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("CSV built from UTF-8 strings"))
}

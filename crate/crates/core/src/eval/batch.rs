use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::dataset::{Dataset, DatasetRecord};
use super::metrics::{classification_metrics, MetricScores};
use super::EvalError;
use crate::llm::LlmSource;
use crate::model::{Certainty, Claim, LabelScheme, Tool};
use crate::orchestrator::{verify, AgentConfig, Clock, TerminatedBy, Toolbox, VerificationOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatchOptions {
    pub jobs: usize,
    pub clock: Clock,
}

impl Default for BatchOptions {
    fn default() -> Self {
        BatchOptions {
            jobs: 1,
            clock: Clock::System,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecordResult {
    pub id: String,
    pub gold_label: String,
    pub predicted: String,
    pub certainty: Option<Certainty>,
    pub support_score: Option<f64>,
    pub terminated_by: Option<TerminatedBy>,
    pub error: Option<String>,
    pub tool_calls: BTreeMap<Tool, usize>,
    #[serde(skip)]
    pub outcome: Option<VerificationOutcome>,
}

impl RecordResult {
    fn failed(rec: &DatasetRecord, error: String) -> RecordResult {
        RecordResult {
            id: rec.id.clone(),
            gold_label: rec.gold_label.clone(),
            predicted: "unverified".into(),
            certainty: None,
            support_score: None,
            terminated_by: None,
            error: Some(error),
            tool_calls: BTreeMap::new(),
            outcome: None,
        }
    }

    fn from_outcome(rec: &DatasetRecord, outcome: VerificationOutcome) -> RecordResult {
        let mut tool_calls = BTreeMap::new();
        for r in outcome.log.tool_trace() {
            *tool_calls.entry(r.tool).or_insert(0) += 1;
        }
        let predicted = match outcome.terminated_by {
            TerminatedBy::UnrecoverableError => "unverified".to_string(),
            _ => outcome.report.verdict.label().to_string(),
        };
        RecordResult {
            id: rec.id.clone(),
            gold_label: rec.gold_label.clone(),
            predicted,
            certainty: Some(outcome.report.verdict.certainty),
            support_score: Some(outcome.report.verdict.support_score),
            terminated_by: Some(outcome.terminated_by),
            error: None,
            tool_calls,
            outcome: Some(outcome),
        }
    }
}

fn run_one(
    rec: &DatasetRecord,
    scheme: LabelScheme,
    cfg: &AgentConfig,
    source: &LlmSource,
    tools: &Toolbox,
    clock: Clock,
) -> RecordResult {
    let claim = match Claim::new(&rec.id, &rec.text, scheme) {
        Ok(c) => c,
        Err(e) => return RecordResult::failed(rec, e.to_string()),
    };
    let llm = match source.gateway_for(&rec.id) {
        Ok(l) => l,
        Err(e) => return RecordResult::failed(rec, e.to_string()),
    };
    match verify(&claim, cfg, &llm, tools, clock) {
        Ok(outcome) => RecordResult::from_outcome(rec, outcome),
        Err(e) => RecordResult::failed(rec, e.to_string()),
    }
}

/// Verifies every record, `opts.jobs` at a time. A failed record becomes an
/// `unverified` prediction. Results are sorted by record id.
pub fn run_batch(
    dataset: &Dataset,
    cfg: &AgentConfig,
    source: &LlmSource,
    tools: &Toolbox,
    opts: BatchOptions,
) -> Result<Vec<RecordResult>, EvalError> {
    cfg.validate().map_err(|e| EvalError::Config(e.to_string()))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.max(1))
        .build()
        .map_err(|e| EvalError::Config(e.to_string()))?;
    let mut results: Vec<RecordResult> = pool.install(|| {
        dataset
            .records
            .par_iter()
            .map(|rec| run_one(rec, dataset.scheme, cfg, source, tools, opts.clock))
            .collect()
    });
    results.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(results)
}

pub fn score_results(results: &[RecordResult], scheme: LabelScheme) -> Result<MetricScores, EvalError> {
    let pred: Vec<&str> = results.iter().map(|r| r.predicted.as_str()).collect();
    let gold: Vec<&str> = results.iter().map(|r| r.gold_label.as_str()).collect();
    classification_metrics(&pred, &gold, scheme)
}

/// One CSV line per record.
#[derive(Debug, Serialize)]
struct ResultRow<'a> {
    id: &'a str,
    gold_label: &'a str,
    predicted: &'a str,
    certainty: &'a str,
    support_score: String,
    terminated_by: String,
    web_search_calls: usize,
    credibility_assessment_calls: usize,
    numeric_verification_calls: usize,
    error: &'a str,
}

pub fn results_csv(results: &[RecordResult]) -> Result<String, EvalError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in results {
        let calls = |t| r.tool_calls.get(&t).copied().unwrap_or(0);
        w.serialize(ResultRow {
            id: &r.id,
            gold_label: &r.gold_label,
            predicted: &r.predicted,
            certainty: r.certainty.map_or("", |c| c.as_str()),
            support_score: r.support_score.map_or(String::new(), |s| format!("{s:.4}")),
            terminated_by: r
                .terminated_by
                .map(|t| serde_json::to_value(t).expect("enum serializes").as_str().unwrap_or("").to_string())
                .unwrap_or_default(),
            web_search_calls: calls(Tool::WebSearch),
            credibility_assessment_calls: calls(Tool::CredibilityAssessment),
            numeric_verification_calls: calls(Tool::NumericVerification),
            error: r.error.as_deref().unwrap_or(""),
        })?;
    }
    super::csv_string(w)
}

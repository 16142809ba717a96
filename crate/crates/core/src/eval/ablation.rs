use serde::Serialize;

use super::batch::{run_batch, score_results, BatchOptions, RecordResult};
use super::dataset::Dataset;
use super::metrics::MetricScores;
use super::EvalError;
use crate::llm::LlmSource;
use crate::model::Tool;
use crate::orchestrator::{AgentConfig, Toolbox};

pub const FULL_AGENT: &str = "Full Agent";
pub const NO_SEARCH: &str = "w/o Web Search";
pub const NO_CREDIBILITY: &str = "w/o Credibility Assessment";
pub const NO_NUMERIC: &str = "w/o Numerical Verification";
pub const LLM_ONLY: &str = "LLM Only";

/// The five standard variants, each derived from `base` by removing tools.
pub fn canonical_configs(base: &AgentConfig) -> Vec<(String, AgentConfig)> {
    let full = base.clone().with_tools(Tool::ALL);
    vec![
        (FULL_AGENT.to_string(), full.clone()),
        (NO_SEARCH.to_string(), full.clone().without(Tool::WebSearch)),
        (NO_CREDIBILITY.to_string(), full.clone().without(Tool::CredibilityAssessment)),
        (NO_NUMERIC.to_string(), full.clone().without(Tool::NumericVerification)),
        (LLM_ONLY.to_string(), full.with_tools([])),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRow {
    pub config: String,
    pub enabled_tools: Vec<Tool>,
    pub metrics: MetricScores,
    pub unverified: usize,
    pub web_search_calls: usize,
    pub credibility_assessment_calls: usize,
    pub numeric_verification_calls: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationTable {
    pub rows: Vec<AblationRow>,
    /// Per-config record results, parallel to `rows`.
    #[serde(skip)]
    pub results: Vec<Vec<RecordResult>>,
}

#[derive(Debug, Serialize)]
struct CsvRow<'a> {
    config: &'a str,
    accuracy: String,
    precision: String,
    recall: String,
    f1: String,
    n: usize,
    unverified: usize,
    web_search_calls: usize,
    credibility_assessment_calls: usize,
    numeric_verification_calls: usize,
}

pub(crate) fn pct(x: f64) -> String {
    format!("{:.1}", x * 100.0)
}

impl AblationTable {
    /// Percentages to one decimal, one line per config.
    pub fn to_csv(&self) -> Result<String, EvalError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(CsvRow {
                config: &r.config,
                accuracy: pct(r.metrics.accuracy),
                precision: pct(r.metrics.precision),
                recall: pct(r.metrics.recall),
                f1: pct(r.metrics.f1),
                n: r.metrics.n,
                unverified: r.unverified,
                web_search_calls: r.web_search_calls,
                credibility_assessment_calls: r.credibility_assessment_calls,
                numeric_verification_calls: r.numeric_verification_calls,
            })?;
        }
        super::csv_string(w)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.rows).expect("rows serialize") + "\n"
    }

    /// Names of configs whose traces contain a record for a tool they
    /// disable. Empty when the invariant holds.
    pub fn disabled_tool_violations(&self, configs: &[(String, AgentConfig)]) -> Vec<String> {
        let mut bad = Vec::new();
        for ((name, cfg), results) in configs.iter().zip(&self.results) {
            let violated = results.iter().any(|r| {
                r.outcome
                    .as_ref()
                    .is_some_and(|o| o.log.tool_trace().iter().any(|t| !cfg.enables(t.tool)))
            });
            if violated {
                bad.push(name.clone());
            }
        }
        bad
    }
}

/// Runs every config over the same records and tabulates the metrics.
pub fn run_ablation(
    configs: &[(String, AgentConfig)],
    dataset: &Dataset,
    source: &LlmSource,
    tools: &Toolbox,
    opts: BatchOptions,
) -> Result<AblationTable, EvalError> {
    let mut rows = Vec::with_capacity(configs.len());
    let mut all = Vec::with_capacity(configs.len());
    for (name, cfg) in configs {
        let results = run_batch(dataset, cfg, source, tools, opts)?;
        let metrics = score_results(&results, dataset.scheme)?;
        let calls = |t: Tool| results.iter().map(|r| r.tool_calls.get(&t).copied().unwrap_or(0)).sum();
        rows.push(AblationRow {
            config: name.clone(),
            enabled_tools: cfg.enabled_tools.iter().copied().collect(),
            metrics,
            unverified: results.iter().filter(|r| r.predicted == "unverified").count(),
            web_search_calls: calls(Tool::WebSearch),
            credibility_assessment_calls: calls(Tool::CredibilityAssessment),
            numeric_verification_calls: calls(Tool::NumericVerification),
        });
        all.push(results);
    }
    Ok(AblationTable { rows, results: all })
}

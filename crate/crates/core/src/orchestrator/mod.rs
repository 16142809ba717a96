//! The verification pipeline: plan, execute the tool loop with reflection
//! and replanning under a tool-call budget, then synthesize a report.

mod execute;
mod plan;

pub use execute::{execute, Execution};
pub use plan::plan;

use std::collections::BTreeSet;
use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::credibility::ReliabilityDataset;
use crate::llm::LlmGateway;
use crate::model::{Claim, EvidenceLog, ModelError, Plan, Report, ScoreConfig, Tool, Verdict};
use crate::numeric::DEFAULT_TOLERANCE;
use crate::search::{SearchProvider, DEFAULT_CONTENT_CAP, DEFAULT_MAX_RESULTS};
use crate::synthesis::{self, RenderInput};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("max_tool_calls must be at least 1")]
    ZeroBudget,
    #[error("max_results must be at least 1")]
    ZeroResults,
    #[error("content_cap must be at least 1")]
    ZeroContentCap,
    #[error("numeric tolerance {0} must be finite and non-negative")]
    Tolerance(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub enabled_tools: BTreeSet<Tool>,
    pub max_tool_calls: usize,
    pub max_search_reformulations: u32,
    pub score_config: ScoreConfig,
    pub max_results: usize,
    pub content_cap: usize,
    pub numeric_tolerance: f64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            enabled_tools: Tool::ALL.into_iter().collect(),
            max_tool_calls: 8,
            max_search_reformulations: 3,
            score_config: ScoreConfig::default(),
            max_results: DEFAULT_MAX_RESULTS,
            content_cap: DEFAULT_CONTENT_CAP,
            numeric_tolerance: DEFAULT_TOLERANCE,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.max_tool_calls == 0 {
            return Err(ConfigError::ZeroBudget);
        }
        if self.max_results == 0 {
            return Err(ConfigError::ZeroResults);
        }
        if self.content_cap == 0 {
            return Err(ConfigError::ZeroContentCap);
        }
        if !self.numeric_tolerance.is_finite() || self.numeric_tolerance < 0.0 {
            return Err(ConfigError::Tolerance(self.numeric_tolerance));
        }
        Ok(())
    }

    pub fn with_tools(mut self, tools: impl IntoIterator<Item = Tool>) -> AgentConfig {
        self.enabled_tools = tools.into_iter().collect();
        self
    }

    pub fn without(mut self, tool: Tool) -> AgentConfig {
        self.enabled_tools.remove(&tool);
        self
    }

    pub fn enables(&self, tool: Tool) -> bool {
        self.enabled_tools.contains(&tool)
    }
}

/// Search provider and reliability data shared by every task of a run.
#[derive(Clone)]
pub struct Toolbox {
    pub search: Arc<dyn SearchProvider>,
    pub reliability: Arc<ReliabilityDataset>,
}

/// Wall-clock source for tool-call timings. `Frozen` records zero so
/// traces are byte-stable.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Clock {
    #[default]
    System,
    Frozen,
}

impl Clock {
    pub(crate) fn start(self) -> Option<Instant> {
        match self {
            Clock::System => Some(Instant::now()),
            Clock::Frozen => None,
        }
    }

    pub(crate) fn elapsed_ms(self, start: Option<Instant>) -> u64 {
        start.map_or(0, |s| s.elapsed().as_millis() as u64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminatedBy {
    PlanComplete,
    BudgetExhausted,
    UnrecoverableError,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationOutcome {
    pub report: Report,
    pub log: EvidenceLog,
    pub terminated_by: TerminatedBy,
}

impl VerificationOutcome {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("outcomes always serialize");
        s.push('\n');
        s
    }
}

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Claim(#[from] ModelError),
    #[error("writing trace: {0}")]
    Trace(#[from] std::io::Error),
}

/// Runs the full pipeline. Degraded runs still produce a report.
pub fn verify(
    claim: &Claim,
    cfg: &AgentConfig,
    llm: &LlmGateway,
    tools: &Toolbox,
    clock: Clock,
) -> Result<VerificationOutcome, VerifyError> {
    verify_traced(claim, cfg, llm, tools, clock, None)
}

/// As [`verify`], streaming each trace line to `sink` as it is produced.
pub fn verify_traced(
    claim: &Claim,
    cfg: &AgentConfig,
    llm: &LlmGateway,
    tools: &Toolbox,
    clock: Clock,
    sink: Option<&mut dyn Write>,
) -> Result<VerificationOutcome, VerifyError> {
    cfg.validate()?;
    claim.validate()?;
    let initial = match plan(claim, cfg, llm) {
        Ok(p) => p,
        Err(e) => {
            let notes = vec![format!("Planning failed, so no evidence was gathered ({e}).")];
            let log = EvidenceLog::new(&claim.id);
            let report = degraded_report(claim, &log, Vec::new(), notes, cfg);
            return Ok(VerificationOutcome {
                report,
                log,
                terminated_by: TerminatedBy::UnrecoverableError,
            });
        }
    };
    if initial.direct_synthesis {
        let notes = initial.notes.clone();
        let report = synthesis::render_model_only(claim, vec![initial], notes, &cfg.score_config, llm);
        return Ok(VerificationOutcome {
            report,
            log: EvidenceLog::new(&claim.id),
            terminated_by: TerminatedBy::PlanComplete,
        });
    }

    let mut run = execute(claim, initial, cfg, llm, tools, clock, sink)?;
    let report = match run.terminated_by {
        TerminatedBy::UnrecoverableError => degraded_report(claim, &run.log, run.plans, run.notes, cfg),
        _ => {
            let conflicts = synthesis::resolve_conflicts(&mut run.log);
            let support = synthesis::aggregate_support(&run.log);
            let verdict = synthesis::map_verdict(
                support.score,
                claim.label_scheme,
                &cfg.score_config,
                support.weighted_count,
                conflicts.iter().any(|p| p.is_tie()),
            );
            synthesis::render(
                RenderInput {
                    claim,
                    verdict,
                    log: &run.log,
                    conflicts: &conflicts,
                    plans: run.plans,
                    notes: run.notes,
                    scores: &cfg.score_config,
                },
                Some(llm),
            )
        }
    };
    Ok(VerificationOutcome {
        report,
        log: run.log,
        terminated_by: run.terminated_by,
    })
}

fn degraded_report(claim: &Claim, log: &EvidenceLog, plans: Vec<Plan>, notes: Vec<String>, cfg: &AgentConfig) -> Report {
    synthesis::render(
        RenderInput {
            claim,
            verdict: Verdict::unverified(claim.label_scheme),
            log,
            conflicts: &[],
            plans,
            notes,
            scores: &cfg.score_config,
        },
        None,
    )
}

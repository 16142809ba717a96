use std::io::Write;

use super::plan::{admit_steps, derived_terms, tool_list};
use super::{AgentConfig, Clock, TerminatedBy, Toolbox};
use crate::credibility;
use crate::llm::{prompts, LlmError, LlmGateway, ReflectDecision, ReflectPayload};
use crate::model::{
    log::trace_line_json, retrieve_relevant, Assessment, Claim, CredibilityTier, Evidence, EvidenceLog, Plan,
    PlanStep, Relevance, Stance, Tool, ToolCallRecord, ToolOutcome,
};
use crate::numeric::{evaluate, extract_claims};
use crate::search::{self, IngestContext, SearchQuery};

/// State left by the tool loop.
#[derive(Debug)]
pub struct Execution {
    pub log: EvidenceLog,
    /// Every plan revision, initial plan first.
    pub plans: Vec<Plan>,
    pub terminated_by: TerminatedBy,
    /// Limitations gathered along the way.
    pub notes: Vec<String>,
}

struct Run<'a, 's> {
    claim: &'a Claim,
    cfg: &'a AgentConfig,
    llm: &'a LlmGateway,
    tools: &'a Toolbox,
    clock: Clock,
    log: EvidenceLog,
    notes: Vec<String>,
    sink: Option<&'s mut dyn Write>,
    flushed: usize,
    /// Set when a search gave up on reformulating for lack of budget.
    budget_hit: bool,
}

/// What a step observed, as shown to the reflection prompt.
struct Observation {
    summary: String,
}

impl Run<'_, '_> {
    fn calls(&self) -> usize {
        self.log.tool_trace().len()
    }

    fn budget_left(&self) -> bool {
        self.calls() < self.cfg.max_tool_calls
    }

    /// Writes journal lines produced since the last sync.
    fn sync(&mut self) -> std::io::Result<()> {
        if let Some(sink) = self.sink.as_deref_mut() {
            for line in &self.log.journal()[self.flushed..] {
                sink.write_all(trace_line_json(line).as_bytes())?;
                sink.write_all(b"\n")?;
            }
            sink.flush()?;
        }
        self.flushed = self.log.journal().len();
        Ok(())
    }

    fn record(
        &mut self,
        step: &PlanStep,
        input_summary: String,
        outcome: ToolOutcome,
        evidence_ids: Vec<String>,
        assessments: Vec<Assessment>,
        started: Option<std::time::Instant>,
    ) -> std::io::Result<()> {
        self.log
            .record_tool_call(ToolCallRecord {
                step_index: step.sequence_index,
                tool: step.tool,
                input_summary,
                outcome,
                evidence_ids,
                wall_time_ms: self.clock.elapsed_ms(started),
                assessments,
            })
            .expect("records reference fresh evidence");
        self.sync()
    }

    fn run_search(&mut self, step: &PlanStep) -> std::io::Result<Observation> {
        let original = step
            .search_terms
            .clone()
            .unwrap_or_else(|| derived_terms(&step.sub_claim));
        let mut terms = original.clone();
        let mut used: Vec<String> = Vec::new();
        let mut attempt = 0u32;
        loop {
            if !self.budget_left() {
                self.budget_hit = true;
                return Ok(Observation {
                    summary: format!("search stopped: tool-call budget exhausted after {} queries", used.len()),
                });
            }
            let started = self.clock.start();
            let query = match SearchQuery::new(terms.clone(), attempt, self.cfg.max_results) {
                Ok(q) => q,
                Err(e) => {
                    self.notes.push(format!("Search for \"{}\" could not run: {e}.", step.sub_claim));
                    self.record(step, terms, ToolOutcome::Error, vec![], vec![], started)?;
                    return Ok(Observation { summary: format!("error: {e}") });
                }
            };
            let results = match search::search(&query, self.tools.search.as_ref()) {
                Ok(r) => r,
                Err(e) => {
                    self.notes.push(format!("Search for \"{terms}\" failed: {e}."));
                    self.record(step, terms, ToolOutcome::Error, vec![], vec![], started)?;
                    return Ok(Observation { summary: format!("error: {e}") });
                }
            };
            if !results.is_empty() {
                let ctx = IngestContext {
                    claim: &self.claim.text,
                    sub_claim: &step.sub_claim,
                    terms: &terms,
                    llm: self.llm,
                    scores: &self.cfg.score_config,
                    content_cap: self.cfg.content_cap,
                };
                let ingested = match search::ingest(&results, &ctx, &mut self.log) {
                    Ok(i) => i,
                    Err(e) => {
                        self.notes.push(format!("Search results for \"{terms}\" could not be stored: {e}."));
                        self.record(step, terms, ToolOutcome::Error, vec![], vec![], started)?;
                        return Ok(Observation { summary: format!("error: {e}") });
                    }
                };
                self.notes.extend(ingested.limitations);
                let ids = ingested.evidence_ids;
                let outcome = if ids.is_empty() { ToolOutcome::Empty } else { ToolOutcome::Ok };
                let summary = self.describe(&ids);
                self.record(step, terms, outcome, ids, vec![], started)?;
                return Ok(Observation { summary });
            }

            self.record(step, terms.clone(), ToolOutcome::Empty, vec![], vec![], started)?;
            used.push(terms.clone());
            if attempt >= self.cfg.max_search_reformulations {
                self.notes.push(format!(
                    "Search for \"{}\" found nothing after {} reformulation(s).",
                    step.sub_claim, attempt
                ));
                return Ok(Observation {
                    summary: format!("empty after {} queries", used.len()),
                });
            }
            if !self.budget_left() {
                self.budget_hit = true;
                return Ok(Observation {
                    summary: format!("empty after {} queries; budget exhausted", used.len()),
                });
            }
            attempt += 1;
            match search::reformulate(&step.sub_claim, &original, &used, attempt, self.llm) {
                Some(r) => {
                    if let Some(reason) = r.fallback_reason.filter(|r| r.contains("failed")) {
                        self.notes.push(format!("Query reformulation fell back to keyword expansion: {reason}."));
                    }
                    terms = r.terms;
                }
                None => {
                    self.notes.push(format!(
                        "Search for \"{}\" found nothing and no new query terms were available.",
                        step.sub_claim
                    ));
                    return Ok(Observation {
                        summary: format!("empty after {} queries; no new terms", used.len()),
                    });
                }
            }
        }
    }

    fn run_credibility(&mut self, step: &PlanStep) -> std::io::Result<Observation> {
        let started = self.clock.start();
        let pending: Vec<(String, String)> = self
            .log
            .entries()
            .iter()
            .filter(|e| e.origin_tool == Tool::WebSearch && !self.log.is_assessed(&e.id))
            .filter_map(|e| e.source_url.clone().map(|u| (e.id.clone(), u)))
            .collect();
        let mut assessments = Vec::new();
        for (id, url) in &pending {
            match credibility::assess(url, &self.tools.reliability, &self.cfg.score_config) {
                Ok(a) => assessments.push(Assessment {
                    evidence_id: id.clone(),
                    tier: a.tier,
                    score: a.score,
                }),
                Err(e) => self.notes.push(format!("Source of {id} could not be rated: {e}.")),
            }
        }
        let summary = if assessments.is_empty() {
            "no unassessed sources".to_string()
        } else {
            assessments
                .iter()
                .map(|a| format!("{} {}", a.evidence_id, a.tier.as_str()))
                .collect::<Vec<_>>()
                .join(", ")
        };
        let outcome = if assessments.is_empty() { ToolOutcome::Empty } else { ToolOutcome::Ok };
        let input = format!("{} source(s)", pending.len());
        self.record(step, input, outcome, vec![], assessments, started)?;
        Ok(Observation {
            summary: format!("rated: {summary}"),
        })
    }

    fn run_numeric(&mut self, step: &PlanStep) -> std::io::Result<Observation> {
        let started = self.clock.start();
        let input = self.claim.text.clone();
        let extraction = extract_claims(&input, self.llm);
        if let Some(reason) = extraction.degraded {
            self.notes.push(format!("Numeric verification degraded: {reason}."));
            self.record(step, input, ToolOutcome::Error, vec![], vec![], started)?;
            return Ok(Observation { summary: reason });
        }
        if !extraction.dropped.is_empty() {
            self.notes.push(format!(
                "{} numeric candidate(s) were discarded because their figures do not appear in the claim.",
                extraction.dropped.len()
            ));
        }
        let mut ids = Vec::new();
        let mut lines = Vec::new();
        for c in &extraction.claims {
            let verdict = match evaluate(c, self.cfg.numeric_tolerance) {
                Ok(v) => v,
                Err(e) => {
                    self.notes.push(format!("A numeric claim could not be evaluated: {e}."));
                    continue;
                }
            };
            let (stance, relevance) = match verdict.holds {
                Some(true) => (Stance::Supporting, Relevance::HighlyRelevant),
                Some(false) => (Stance::Contradicting, Relevance::HighlyRelevant),
                None => (Stance::Irrelevant, Relevance::Irrelevant),
            };
            let id = self.log.next_evidence_id();
            lines.push(format!("{id}: {}", verdict.explanation));
            self.log
                .append(Evidence {
                    id: id.clone(),
                    sub_claim: step.sub_claim.clone(),
                    content: verdict.explanation.clone(),
                    source_url: None,
                    source_domain: None,
                    publication_date: None,
                    search_terms: None,
                    credibility_tier: CredibilityTier::High,
                    credibility_score: self.cfg.score_config.tier_score(CredibilityTier::High),
                    stance,
                    relevance_label: relevance,
                    origin_tool: Tool::NumericVerification,
                    retained: true,
                    numeric: Some(verdict),
                })
                .expect("fresh evidence id");
            ids.push(id);
        }
        let outcome = if ids.is_empty() { ToolOutcome::Empty } else { ToolOutcome::Ok };
        let summary = if lines.is_empty() {
            "no checkable numeric relationship".to_string()
        } else {
            lines.join("; ")
        };
        self.record(step, input, outcome, ids, vec![], started)?;
        Ok(Observation { summary })
    }

    fn describe(&self, ids: &[String]) -> String {
        ids.iter()
            .filter_map(|id| self.log.get(id))
            .map(|e| {
                format!(
                    "{} [{} / {}] {}",
                    e.id,
                    e.stance.as_str(),
                    e.relevance_label.as_str(),
                    e.source_domain.as_deref().unwrap_or("-")
                )
            })
            .collect::<Vec<_>>()
            .join("; ")
    }

    fn reflect(&self, step: &PlanStep, obs: &Observation, remaining: &[PlanStep]) -> Result<ReflectPayload, LlmError> {
        let step_line = format!("{} {} \"{}\"", step.sequence_index, step.tool, step.sub_claim);
        let remaining = if remaining.is_empty() {
            "(none)".to_string()
        } else {
            remaining
                .iter()
                .map(|s| format!("{} {} \"{}\"", s.sequence_index, s.tool, s.sub_claim))
                .collect::<Vec<_>>()
                .join("; ")
        };
        let memory = retrieve_relevant(&self.log, &self.claim.text, 5)
            .into_iter()
            .map(|e| format!("{} ({}, {}): {}", e.id, e.stance.as_str(), e.credibility_tier.as_str(), short(&e.content)))
            .collect::<Vec<_>>();
        let memory = if memory.is_empty() { "(empty)".to_string() } else { memory.join("\n") };
        self.llm.request(
            prompts::reflect(),
            &[
                ("tools", &tool_list(self.cfg)),
                ("claim", &self.claim.text),
                ("step", &step_line),
                ("observation", &obs.summary),
                ("remaining", &remaining),
                ("memory", &memory),
            ],
        )
    }
}

fn short(s: &str) -> String {
    let head: String = s.chars().take(160).collect();
    if head.len() < s.len() {
        format!("{head}...")
    } else {
        head
    }
}

/// Runs `plan` step by step. After each step a reflection call decides to
/// continue, replan the remaining steps, or stop. Tool failures are
/// recorded and skipped; a failed planning or reflection call ends the run
/// with the log gathered so far.
pub fn execute(
    claim: &Claim,
    plan: Plan,
    cfg: &AgentConfig,
    llm: &LlmGateway,
    tools: &Toolbox,
    clock: Clock,
    sink: Option<&mut dyn Write>,
) -> std::io::Result<Execution> {
    let mut run = Run {
        claim,
        cfg,
        llm,
        tools,
        clock,
        log: EvidenceLog::new(&claim.id),
        notes: Vec::new(),
        sink,
        flushed: 0,
        budget_hit: false,
    };
    let mut plans = vec![plan.clone()];
    let mut current = plan;
    let mut i = 0;
    let mut terminated_by = TerminatedBy::PlanComplete;

    while i < current.steps.len() {
        if !run.budget_left() {
            terminated_by = TerminatedBy::BudgetExhausted;
            break;
        }
        let step = current.steps[i].clone();
        let obs = if !cfg.enables(step.tool) {
            // plans are filtered on creation; this only guards hand-built plans
            run.notes.push(format!("Skipped step {i}: {} is disabled.", step.tool));
            i += 1;
            continue;
        } else {
            match step.tool {
                Tool::WebSearch => run.run_search(&step)?,
                Tool::CredibilityAssessment => run.run_credibility(&step)?,
                Tool::NumericVerification => run.run_numeric(&step)?,
            }
        };
        if !run.budget_left() {
            if i + 1 < current.steps.len() {
                terminated_by = TerminatedBy::BudgetExhausted;
            }
            break;
        }
        let decision = match run.reflect(&step, &obs, &current.steps[i + 1..]) {
            Ok(d) => d,
            Err(e) => {
                run.notes.push(format!("Verification stopped early because reflection failed ({e})."));
                terminated_by = TerminatedBy::UnrecoverableError;
                break;
            }
        };
        match decision.decision {
            ReflectDecision::Continue => i += 1,
            ReflectDecision::Stop => {
                if i + 1 < current.steps.len() {
                    let reason = if decision.reason.is_empty() { "evidence judged sufficient" } else { &decision.reason };
                    run.notes.push(format!(
                        "Stopped after step {i} with {} step(s) left: {reason}.",
                        current.steps.len() - i - 1
                    ));
                }
                break;
            }
            ReflectDecision::Replan => {
                let (mut new_steps, mut notes) = admit_steps(decision.new_steps, cfg);
                let mut next = Plan {
                    steps: current.steps[..=i].to_vec(),
                    revision: current.revision + 1,
                    direct_synthesis: false,
                    notes: Vec::new(),
                };
                next.steps.append(&mut new_steps);
                if !decision.reason.is_empty() {
                    notes.insert(0, format!("replanned: {}", decision.reason));
                }
                next.notes = notes;
                next.reindex();
                plans.push(next.clone());
                current = next;
                i += 1;
            }
        }
    }
    if run.budget_hit && terminated_by == TerminatedBy::PlanComplete {
        terminated_by = TerminatedBy::BudgetExhausted;
    }
    if terminated_by == TerminatedBy::BudgetExhausted {
        run.notes.push(format!(
            "The tool-call budget of {} was exhausted before the plan completed.",
            cfg.max_tool_calls
        ));
    }
    run.sync()?;
    Ok(Execution {
        log: run.log,
        plans,
        terminated_by,
        notes: run.notes,
    })
}

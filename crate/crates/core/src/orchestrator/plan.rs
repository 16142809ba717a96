use super::AgentConfig;
use crate::llm::{prompts, LlmError, LlmGateway, PlanPayload, PlannedStep};
use crate::model::{Claim, Plan, PlanStep, Tool};
use crate::numeric::has_numeric_assertion;
use crate::text;

pub(crate) fn tool_list(cfg: &AgentConfig) -> String {
    cfg.enabled_tools.iter().map(|t| t.as_str()).collect::<Vec<_>>().join(", ")
}

/// Search terms derived from a sub-claim: its first eight keywords.
pub(crate) fn derived_terms(sub_claim: &str) -> String {
    let kws = text::keywords(sub_claim);
    let terms = kws.iter().take(8).cloned().collect::<Vec<_>>().join(" ");
    if terms.is_empty() {
        sub_claim.trim().to_string()
    } else {
        terms
    }
}

fn step(sub_claim: &str, tool: Tool, rationale: &str) -> PlanStep {
    PlanStep {
        sub_claim: sub_claim.to_string(),
        tool,
        rationale: rationale.to_string(),
        sequence_index: 0,
        search_terms: (tool == Tool::WebSearch).then(|| derived_terms(sub_claim)),
    }
}

/// Keeps steps whose tool is enabled, filling in missing search terms.
/// Returns the kept steps and a note per dropped step.
pub(crate) fn admit_steps(planned: Vec<PlannedStep>, cfg: &AgentConfig) -> (Vec<PlanStep>, Vec<String>) {
    let mut steps = Vec::new();
    let mut notes = Vec::new();
    for (i, p) in planned.into_iter().enumerate() {
        if !cfg.enables(p.tool) {
            notes.push(format!("dropped proposed step {i} ({}): tool is disabled", p.tool));
            continue;
        }
        let mut s = p.into_step(0);
        if s.tool == Tool::WebSearch && s.search_terms.is_none() {
            s.search_terms = Some(derived_terms(&s.sub_claim));
        }
        if s.tool != Tool::WebSearch {
            s.search_terms = None;
        }
        steps.push(s);
    }
    (steps, notes)
}

/// Appends the steps the enabled tools require but the planner left out:
/// a numeric check for claims that state numbers, and a credibility pass
/// after the last search.
pub(crate) fn complete_steps(claim: &Claim, steps: &mut Vec<PlanStep>, notes: &mut Vec<String>, cfg: &AgentConfig) {
    if cfg.enables(Tool::NumericVerification)
        && has_numeric_assertion(&claim.text)
        && !steps.iter().any(|s| s.tool == Tool::NumericVerification)
    {
        steps.push(step(
            &claim.text,
            Tool::NumericVerification,
            "the claim states figures that can be recomputed",
        ));
        notes.push("added a numeric_verification step for the figures in the claim".into());
    }
    if cfg.enables(Tool::CredibilityAssessment) {
        if let Some(last_search) = steps.iter().rposition(|s| s.tool == Tool::WebSearch) {
            if !steps[last_search..].iter().any(|s| s.tool == Tool::CredibilityAssessment) {
                steps.insert(
                    last_search + 1,
                    step(&claim.text, Tool::CredibilityAssessment, "rate the sources found by search"),
                );
                notes.push("added a credibility_assessment step after the last search".into());
            }
        }
    }
}

fn default_steps(claim: &Claim, cfg: &AgentConfig) -> Vec<PlanStep> {
    let mut steps = Vec::new();
    if cfg.enables(Tool::WebSearch) {
        steps.push(step(&claim.text, Tool::WebSearch, "look up reporting on the claim"));
    }
    steps
}

/// Builds the initial plan. With no tools enabled this is a direct-synthesis
/// plan and no model call is made.
pub fn plan(claim: &Claim, cfg: &AgentConfig, llm: &LlmGateway) -> Result<Plan, LlmError> {
    if cfg.enabled_tools.is_empty() {
        return Ok(Plan::direct());
    }
    let topic = claim.topic_hint.as_deref().unwrap_or("none");
    let payload: PlanPayload = llm.request(
        prompts::plan(),
        &[("tools", &tool_list(cfg)), ("claim", &claim.text), ("topic", topic)],
    )?;
    let (mut steps, mut notes) = admit_steps(payload.steps, cfg);
    if steps.is_empty() {
        steps = default_steps(claim, cfg);
        if !steps.is_empty() {
            notes.push("planner proposed no usable steps; using the default search plan".into());
        }
    }
    complete_steps(claim, &mut steps, &mut notes, cfg);
    if steps.is_empty() {
        let mut p = Plan::direct();
        p.notes = notes;
        p.notes.push("no executable steps for the enabled tools; synthesis uses model knowledge only".into());
        return Ok(p);
    }
    let mut p = Plan {
        steps,
        revision: 0,
        direct_synthesis: false,
        notes,
    };
    p.reindex();
    Ok(p)
}

//! Structured payloads the gateway can decode, with strict validation.

use std::fmt;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::model::{Plan, PlanStep, Relevance, Stance, Tool};
use crate::numeric::{ClaimKind, RelationOp};

/// Output schema expected from a call site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schema {
    Plan,
    StanceAndRelevance,
    QueryReformulation,
    NumericExtraction,
    SynthesisNarrative,
    JudgeScores,
    ReflectDecision,
    FreeText,
}

impl Schema {
    pub const ALL: [Schema; 8] = [
        Schema::Plan,
        Schema::StanceAndRelevance,
        Schema::QueryReformulation,
        Schema::NumericExtraction,
        Schema::SynthesisNarrative,
        Schema::JudgeScores,
        Schema::ReflectDecision,
        Schema::FreeText,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Schema::Plan => "plan",
            Schema::StanceAndRelevance => "stance_and_relevance",
            Schema::QueryReformulation => "query_reformulation",
            Schema::NumericExtraction => "numeric_extraction",
            Schema::SynthesisNarrative => "synthesis_narrative",
            Schema::JudgeScores => "judge_scores",
            Schema::ReflectDecision => "reflect_decision",
            Schema::FreeText => "free_text",
        }
    }

    pub fn parse(name: &str) -> Option<Schema> {
        Schema::ALL.into_iter().find(|s| s.as_str() == name)
    }

    pub fn is_json(self) -> bool {
        self != Schema::FreeText
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The first validation violation found in a model reply.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{schema} payload rejected: {message}")]
pub struct ParseFailure {
    pub schema: Schema,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannedStep {
    pub sub_claim: String,
    pub tool: Tool,
    pub rationale: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search_terms: Option<String>,
}

impl PlannedStep {
    fn validate(&self, at: &str) -> Result<(), String> {
        if self.sub_claim.trim().is_empty() {
            return Err(format!("{at}.sub_claim is empty"));
        }
        if let Some(t) = &self.search_terms {
            if t.trim().is_empty() {
                return Err(format!("{at}.search_terms is empty"));
            }
        }
        Ok(())
    }

    pub fn into_step(self, sequence_index: usize) -> PlanStep {
        PlanStep {
            sub_claim: self.sub_claim,
            tool: self.tool,
            rationale: self.rationale,
            sequence_index,
            search_terms: self.search_terms,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanPayload {
    pub steps: Vec<PlannedStep>,
}

impl PlanPayload {
    pub fn into_plan(self) -> Plan {
        Plan {
            steps: self
                .steps
                .into_iter()
                .enumerate()
                .map(|(i, s)| s.into_step(i))
                .collect(),
            revision: 0,
            direct_synthesis: false,
            notes: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StancePayload {
    pub stance: Stance,
    pub relevance: Relevance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReformulationPayload {
    pub terms: String,
}

/// A numeric literal as it appears in the text, e.g. `"23,196"` or `"30%"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateQuantity {
    pub literal: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateClaim {
    pub kind: ClaimKind,
    pub operands: Vec<CandidateQuantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub asserted: Option<CandidateQuantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relation_op: Option<RelationOp>,
    /// Character range `[start, end)` of the supporting text.
    pub span: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtractionPayload {
    pub claims: Vec<CandidateClaim>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NarrativePayload {
    pub summary: String,
    #[serde(default)]
    pub inferences: Vec<String>,
    /// Model-knowledge support in [-1, 1]; read only on tool-less runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_support: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JudgedEvidence {
    pub evidence_id: String,
    pub relevance: f64,
    pub consistency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JudgePayload {
    pub evidence: Vec<JudgedEvidence>,
    pub relevant_count: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReflectDecision {
    Continue,
    Replan,
    Stop,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReflectPayload {
    pub decision: ReflectDecision,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub new_steps: Vec<PlannedStep>,
    #[serde(default)]
    pub reason: String,
}

/// A decoded, validated model reply.
#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Plan(PlanPayload),
    Stance(StancePayload),
    Reformulation(ReformulationPayload),
    NumericExtraction(ExtractionPayload),
    Narrative(NarrativePayload),
    Judge(JudgePayload),
    Reflect(ReflectPayload),
    FreeText(String),
}

/// A payload type bound to one schema.
pub trait Structured: Sized + Serialize + DeserializeOwned {
    const SCHEMA: Schema;

    fn validate(&self) -> Result<(), String> {
        Ok(())
    }

    fn into_payload(self) -> Payload;

    fn from_payload(payload: Payload) -> Option<Self>;
}

macro_rules! structured {
    ($ty:ty, $schema:expr, $variant:ident) => {
        impl Structured for $ty {
            const SCHEMA: Schema = $schema;

            fn validate(&self) -> Result<(), String> {
                <$ty>::check(self)
            }

            fn into_payload(self) -> Payload {
                Payload::$variant(self)
            }

            fn from_payload(payload: Payload) -> Option<Self> {
                match payload {
                    Payload::$variant(p) => Some(p),
                    _ => None,
                }
            }
        }
    };
}

impl PlanPayload {
    fn check(&self) -> Result<(), String> {
        if self.steps.is_empty() {
            return Err("steps must contain at least one step".into());
        }
        for (i, s) in self.steps.iter().enumerate() {
            s.validate(&format!("steps[{i}]"))?;
        }
        Ok(())
    }
}

impl StancePayload {
    fn check(&self) -> Result<(), String> {
        Ok(())
    }
}

impl ReformulationPayload {
    fn check(&self) -> Result<(), String> {
        if self.terms.trim().is_empty() {
            return Err("terms is empty".into());
        }
        Ok(())
    }
}

impl ExtractionPayload {
    fn check(&self) -> Result<(), String> {
        for (i, c) in self.claims.iter().enumerate() {
            if c.span[0] > c.span[1] {
                return Err(format!("range violation: claims[{i}].span start exceeds end"));
            }
            if c.operands.iter().any(|q| q.literal.trim().is_empty()) {
                return Err(format!("claims[{i}] has an empty operand literal"));
            }
        }
        Ok(())
    }
}

impl NarrativePayload {
    fn check(&self) -> Result<(), String> {
        if let Some(s) = self.model_support {
            if !s.is_finite() || !(-1.0..=1.0).contains(&s) {
                return Err(format!("range violation: model_support = {s} outside [-1, 1]"));
            }
        }
        Ok(())
    }
}

impl JudgePayload {
    fn check(&self) -> Result<(), String> {
        for (i, e) in self.evidence.iter().enumerate() {
            if ![1.0, 0.5, 0.0].contains(&e.relevance) {
                return Err(format!(
                    "range violation: evidence[{i}].relevance = {} not in {{1.0, 0.5, 0.0}}",
                    e.relevance
                ));
            }
            if ![1.0, 0.0, -1.0].contains(&e.consistency) {
                return Err(format!(
                    "range violation: evidence[{i}].consistency = {} not in {{1.0, 0.0, -1.0}}",
                    e.consistency
                ));
            }
        }
        Ok(())
    }
}

impl ReflectPayload {
    fn check(&self) -> Result<(), String> {
        for (i, s) in self.new_steps.iter().enumerate() {
            s.validate(&format!("new_steps[{i}]"))?;
        }
        if self.decision != ReflectDecision::Replan && !self.new_steps.is_empty() {
            return Err("new_steps is only allowed with decision `replan`".into());
        }
        Ok(())
    }
}

structured!(PlanPayload, Schema::Plan, Plan);
structured!(StancePayload, Schema::StanceAndRelevance, Stance);
structured!(ReformulationPayload, Schema::QueryReformulation, Reformulation);
structured!(ExtractionPayload, Schema::NumericExtraction, NumericExtraction);
structured!(NarrativePayload, Schema::SynthesisNarrative, Narrative);
structured!(JudgePayload, Schema::JudgeScores, Judge);
structured!(ReflectPayload, Schema::ReflectDecision, Reflect);

/// Strips surrounding whitespace and a Markdown code fence, if any.
fn unfence(raw: &str) -> &str {
    let t = raw.trim();
    if let Some(rest) = t.strip_prefix("```") {
        let rest = rest.strip_prefix("json").unwrap_or(rest);
        if let Some(body) = rest.trim_end().strip_suffix("```") {
            return body.trim();
        }
    }
    t
}

fn parse_as<T: Structured>(raw: &str) -> Result<T, ParseFailure> {
    let fail = |message: String| ParseFailure {
        schema: T::SCHEMA,
        message,
    };
    let value: T = serde_json::from_str(unfence(raw)).map_err(|e| fail(e.to_string()))?;
    value.validate().map_err(fail)?;
    Ok(value)
}

/// Decodes `raw` against `schema`. Unknown fields, out-of-set enum values and
/// out-of-range numbers are rejected with the first violation found.
pub fn parse_structured(raw: &str, schema: Schema) -> Result<Payload, ParseFailure> {
    match schema {
        Schema::Plan => parse_as::<PlanPayload>(raw).map(Structured::into_payload),
        Schema::StanceAndRelevance => parse_as::<StancePayload>(raw).map(Structured::into_payload),
        Schema::QueryReformulation => {
            parse_as::<ReformulationPayload>(raw).map(Structured::into_payload)
        }
        Schema::NumericExtraction => {
            parse_as::<ExtractionPayload>(raw).map(Structured::into_payload)
        }
        Schema::SynthesisNarrative => {
            parse_as::<NarrativePayload>(raw).map(Structured::into_payload)
        }
        Schema::JudgeScores => parse_as::<JudgePayload>(raw).map(Structured::into_payload),
        Schema::ReflectDecision => parse_as::<ReflectPayload>(raw).map(Structured::into_payload),
        Schema::FreeText => {
            let text = raw.trim();
            if text.is_empty() {
                Err(ParseFailure {
                    schema,
                    message: "empty reply".into(),
                })
            } else {
                Ok(Payload::FreeText(text.to_string()))
            }
        }
    }
}

//! Domain types shared by every stage of a verification run, plus the
//! per-task evidence log that serves as the agent's working memory.

pub(crate) mod log;
mod report;
mod score;

pub use log::{
    retrieve_relevant, Assessment, EvidenceLog, ToolCallRecord, ToolOutcome, TraceLine,
};
pub use report::{
    BinaryLabel, Certainty, Citation, ReasoningStep, Report, SixLevelLabel, Verdict,
};
pub use score::{
    CredibilityTier, ScoreConfig, TierScores, CONSISTENCY_VALUES, DIVERSITY_INCREMENT,
    RELEVANCE_VALUES,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::numeric::NumericVerdict;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("claim text is empty")]
    EmptyClaim,
    #[error("duplicate evidence id `{0}`")]
    DuplicateEvidence(String),
    #[error("tool call references unknown evidence id `{0}`")]
    UnknownEvidence(String),
    #[error("evidence `{0}` is already listed by another tool call")]
    EvidenceAlreadyTraced(String),
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("invalid score config: {0}")]
    InvalidScoreConfig(String),
    #[error("invalid trace line {line}: {message}")]
    Trace { line: usize, message: String },
    #[error("unknown tool `{0}`")]
    UnknownTool(String),
}

/// The three verification tools.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tool {
    WebSearch,
    CredibilityAssessment,
    NumericVerification,
}

impl Tool {
    pub const ALL: [Tool; 3] = [
        Tool::WebSearch,
        Tool::CredibilityAssessment,
        Tool::NumericVerification,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Tool::WebSearch => "web_search",
            Tool::CredibilityAssessment => "credibility_assessment",
            Tool::NumericVerification => "numeric_verification",
        }
    }
}

impl fmt::Display for Tool {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Tool {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "web_search" => Ok(Tool::WebSearch),
            "credibility_assessment" => Ok(Tool::CredibilityAssessment),
            "numeric_verification" => Ok(Tool::NumericVerification),
            other => Err(ModelError::UnknownTool(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelScheme {
    #[default]
    Binary,
    SixLevel,
}

/// A statement submitted for verification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    pub id: String,
    pub text: String,
    #[serde(default)]
    pub topic_hint: Option<String>,
    #[serde(default)]
    pub label_scheme: LabelScheme,
}

impl Claim {
    pub fn new(
        id: impl Into<String>,
        text: impl Into<String>,
        label_scheme: LabelScheme,
    ) -> Result<Claim, ModelError> {
        let claim = Claim {
            id: id.into(),
            text: text.into(),
            topic_hint: None,
            label_scheme,
        };
        claim.validate()?;
        Ok(claim)
    }

    pub fn with_topic_hint(mut self, hint: impl Into<String>) -> Claim {
        self.topic_hint = Some(hint.into());
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.text.trim().is_empty() {
            return Err(ModelError::EmptyClaim);
        }
        Ok(())
    }
}

/// Evidence stance toward the claim: +1, 0 or -1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stance {
    Supporting,
    Irrelevant,
    Contradicting,
}

impl Stance {
    pub fn value(self) -> f64 {
        match self {
            Stance::Supporting => 1.0,
            Stance::Irrelevant => 0.0,
            Stance::Contradicting => -1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stance::Supporting => "supporting",
            Stance::Irrelevant => "irrelevant",
            Stance::Contradicting => "contradicting",
        }
    }
}

/// Relevance of evidence to the claim: 1.0, 0.5 or 0.0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relevance {
    HighlyRelevant,
    SlightlyRelevant,
    Irrelevant,
}

impl Relevance {
    pub fn value(self) -> f64 {
        match self {
            Relevance::HighlyRelevant => RELEVANCE_VALUES[0],
            Relevance::SlightlyRelevant => RELEVANCE_VALUES[1],
            Relevance::Irrelevant => RELEVANCE_VALUES[2],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Relevance::HighlyRelevant => "highly relevant",
            Relevance::SlightlyRelevant => "slightly relevant",
            Relevance::Irrelevant => "irrelevant",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanStep {
    pub sub_claim: String,
    pub tool: Tool,
    pub rationale: String,
    pub sequence_index: usize,
    /// Search terms proposed by the planner; only meaningful for web search.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search_terms: Option<String>,
}

/// An ordered verification plan. A plan with `direct_synthesis` set has no
/// steps and routes straight to model-only synthesis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plan {
    pub steps: Vec<PlanStep>,
    pub revision: u32,
    #[serde(default)]
    pub direct_synthesis: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Plan {
    pub fn direct() -> Plan {
        Plan {
            steps: Vec::new(),
            revision: 0,
            direct_synthesis: true,
            notes: vec!["no tools enabled; synthesis uses model knowledge only".into()],
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.steps.is_empty() && !self.direct_synthesis {
            return Err(ModelError::InvalidPlan("plan has no steps".into()));
        }
        if !self.steps.is_empty() && self.direct_synthesis {
            return Err(ModelError::InvalidPlan(
                "direct-synthesis plan must not have steps".into(),
            ));
        }
        for (i, step) in self.steps.iter().enumerate() {
            if step.sequence_index != i {
                return Err(ModelError::InvalidPlan(format!(
                    "step {i} has sequence_index {}",
                    step.sequence_index
                )));
            }
        }
        Ok(())
    }

    /// Reassigns sequence indices 0..n in current order.
    pub fn reindex(&mut self) {
        for (i, step) in self.steps.iter_mut().enumerate() {
            step.sequence_index = i;
        }
    }

    pub fn uses(&self, tool: Tool) -> bool {
        self.steps.iter().any(|s| s.tool == tool)
    }
}

/// A provenance-stamped unit of information gathered by a tool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub id: String,
    pub sub_claim: String,
    pub content: String,
    pub source_url: Option<String>,
    pub source_domain: Option<String>,
    pub publication_date: Option<String>,
    pub search_terms: Option<String>,
    pub credibility_tier: CredibilityTier,
    pub credibility_score: f64,
    pub stance: Stance,
    pub relevance_label: Relevance,
    pub origin_tool: Tool,
    pub retained: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub numeric: Option<NumericVerdict>,
}

impl Evidence {
    /// Synthesis weight: credibility score times relevance value.
    pub fn weight(&self) -> f64 {
        self.credibility_score * self.relevance_label.value()
    }
}

/// Normalizes a date string to `YYYY-MM-DD`; unparseable input yields `None`.
pub fn normalize_date(raw: &str) -> Option<String> {
    use chrono::{DateTime, NaiveDate, NaiveDateTime};

    let raw = raw.trim();
    if raw.is_empty() {
        return None;
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(raw) {
        return Some(dt.date_naive().format("%Y-%m-%d").to_string());
    }
    if let Ok(dt) = DateTime::parse_from_rfc2822(raw) {
        return Some(dt.date_naive().format("%Y-%m-%d").to_string());
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(raw, fmt) {
            return Some(dt.date().format("%Y-%m-%d").to_string());
        }
    }
    for fmt in ["%Y-%m-%d", "%Y/%m/%d", "%B %d, %Y", "%b %d, %Y", "%d %B %Y", "%d %b %Y"] {
        if let Ok(d) = NaiveDate::parse_from_str(raw, fmt) {
            return Some(d.format("%Y-%m-%d").to_string());
        }
    }
    None
}

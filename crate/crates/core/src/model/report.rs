use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use super::{Claim, LabelScheme, Plan, Stance};
use crate::numeric::NumericVerdict;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinaryLabel {
    Real,
    Fake,
    Unverified,
}

impl BinaryLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            BinaryLabel::Real => "real",
            BinaryLabel::Fake => "fake",
            BinaryLabel::Unverified => "unverified",
        }
    }
}

/// LIAR-style truthfulness levels, least to most truthful.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SixLevelLabel {
    PantsFire,
    False,
    BarelyTrue,
    HalfTrue,
    MostlyTrue,
    True,
}

impl SixLevelLabel {
    pub const ALL: [SixLevelLabel; 6] = [
        SixLevelLabel::PantsFire,
        SixLevelLabel::False,
        SixLevelLabel::BarelyTrue,
        SixLevelLabel::HalfTrue,
        SixLevelLabel::MostlyTrue,
        SixLevelLabel::True,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SixLevelLabel::PantsFire => "pants_fire",
            SixLevelLabel::False => "false",
            SixLevelLabel::BarelyTrue => "barely_true",
            SixLevelLabel::HalfTrue => "half_true",
            SixLevelLabel::MostlyTrue => "mostly_true",
            SixLevelLabel::True => "true",
        }
    }

    pub fn parse(s: &str) -> Option<SixLevelLabel> {
        SixLevelLabel::ALL.into_iter().find(|l| l.as_str() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Certainty {
    Low,
    Medium,
    High,
}

impl Certainty {
    pub fn as_str(self) -> &'static str {
        match self {
            Certainty::Low => "low",
            Certainty::Medium => "medium",
            Certainty::High => "high",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub scheme: LabelScheme,
    pub binary_label: Option<BinaryLabel>,
    pub six_level_label: Option<SixLevelLabel>,
    pub support_score: f64,
    pub certainty: Certainty,
}

impl Verdict {
    /// Fallback verdict for runs that could not gather or weigh evidence.
    pub fn unverified(scheme: LabelScheme) -> Verdict {
        Verdict {
            scheme,
            binary_label: (scheme == LabelScheme::Binary).then_some(BinaryLabel::Unverified),
            six_level_label: (scheme == LabelScheme::SixLevel).then_some(SixLevelLabel::BarelyTrue),
            support_score: 0.0,
            certainty: Certainty::Low,
        }
    }

    /// The populated label as a string, matching dataset gold labels.
    pub fn label(&self) -> &'static str {
        match (self.binary_label, self.six_level_label) {
            (Some(b), _) => b.as_str(),
            (None, Some(s)) => s.as_str(),
            (None, None) => BinaryLabel::Unverified.as_str(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReasoningStep {
    pub evidence_ids: Vec<String>,
    pub inference: String,
    pub sub_claim: String,
    pub stance: Stance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub numeric: Option<NumericVerdict>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Citation {
    pub evidence_id: String,
    pub source_url: String,
    pub publication_date: Option<String>,
}

/// The auditable output of a verification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub claim: Claim,
    pub verdict: Verdict,
    pub summary: String,
    pub reasoning_chain: Vec<ReasoningStep>,
    pub citations: Vec<Citation>,
    pub limitations: Vec<String>,
    pub plan_history: Vec<Plan>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(json: &str) -> serde_json::Result<Report> {
        serde_json::from_str(json)
    }

    /// Every evidence id referenced by the reasoning chain.
    pub fn cited_evidence_ids(&self) -> impl Iterator<Item = &str> {
        self.reasoning_chain
            .iter()
            .flat_map(|s| s.evidence_ids.iter().map(String::as_str))
    }
}

/// Human-readable rendering: Verdict, Reasoning, Citations, Limitations,
/// Plan history, in that order.
impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        let v = &self.verdict;
        writeln!(out, "Claim [{}]: {}", self.claim.id, self.claim.text)?;
        writeln!(out)?;
        writeln!(out, "== Verdict ==")?;
        writeln!(
            out,
            "{} (support {:+.3}, certainty {})",
            v.label(),
            v.support_score,
            v.certainty.as_str()
        )?;
        if !self.summary.is_empty() {
            writeln!(out, "{}", self.summary)?;
        }
        writeln!(out)?;
        writeln!(out, "== Reasoning ==")?;
        if self.reasoning_chain.is_empty() {
            writeln!(out, "(no evidence-backed reasoning steps)")?;
        }
        for (i, step) in self.reasoning_chain.iter().enumerate() {
            writeln!(
                out,
                "{}. [{}] ({}) {}",
                i + 1,
                step.evidence_ids.join(", "),
                step.stance.as_str(),
                step.inference
            )?;
        }
        writeln!(out)?;
        writeln!(out, "== Citations ==")?;
        if self.citations.is_empty() {
            writeln!(out, "(none)")?;
        }
        for c in &self.citations {
            match &c.publication_date {
                Some(d) => writeln!(out, "[{}] {} ({d})", c.evidence_id, c.source_url)?,
                None => writeln!(out, "[{}] {}", c.evidence_id, c.source_url)?,
            }
        }
        writeln!(out)?;
        writeln!(out, "== Limitations ==")?;
        if self.limitations.is_empty() {
            writeln!(out, "(none)")?;
        }
        for l in &self.limitations {
            writeln!(out, "- {l}")?;
        }
        writeln!(out)?;
        writeln!(out, "== Plan history ==")?;
        for plan in &self.plan_history {
            if plan.direct_synthesis {
                writeln!(out, "revision {}: direct synthesis", plan.revision)?;
                continue;
            }
            let steps: Vec<String> = plan
                .steps
                .iter()
                .map(|s| format!("{}:{}", s.sequence_index, s.tool))
                .collect();
            writeln!(out, "revision {}: {}", plan.revision, steps.join(" -> "))?;
        }
        f.write_str(&out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unverified_matches_scheme() {
        let b = Verdict::unverified(LabelScheme::Binary);
        assert_eq!(b.binary_label, Some(BinaryLabel::Unverified));
        assert!(b.six_level_label.is_none());
        let s = Verdict::unverified(LabelScheme::SixLevel);
        assert!(s.binary_label.is_none());
        assert!(s.six_level_label.is_some());
        assert_eq!(s.certainty, Certainty::Low);
    }

    #[test]
    fn six_level_names() {
        for l in SixLevelLabel::ALL {
            assert_eq!(SixLevelLabel::parse(l.as_str()), Some(l));
            assert_eq!(serde_json::to_string(&l).unwrap(), format!("\"{}\"", l.as_str()));
        }
    }
}

use super::{map_model_verdict, ConflictPair};
use crate::llm::{prompts, LlmGateway, NarrativePayload};
use crate::model::{
    Certainty, Citation, Claim, CredibilityTier, Evidence, EvidenceLog, Plan, ReasoningStep, Relevance, Report,
    ScoreConfig, Stance, Tool, Verdict,
};

pub struct RenderInput<'a> {
    pub claim: &'a Claim,
    pub verdict: Verdict,
    pub log: &'a EvidenceLog,
    pub conflicts: &'a [ConflictPair],
    pub plans: Vec<Plan>,
    /// Run-level limitations gathered during planning and execution.
    pub notes: Vec<String>,
    pub scores: &'a ScoreConfig,
}

fn stance_verb(s: Stance) -> &'static str {
    match s {
        Stance::Supporting => "supports",
        Stance::Contradicting => "contradicts",
        Stance::Irrelevant => "neither supports nor contradicts",
    }
}

fn source_name(e: &Evidence) -> String {
    match (&e.source_domain, e.origin_tool) {
        (Some(d), _) => d.clone(),
        (None, Tool::NumericVerification) => "The arithmetic check".to_string(),
        (None, t) => format!("Evidence from {t}"),
    }
}

fn template_inference(e: &Evidence) -> String {
    if let Some(v) = &e.numeric {
        return format!("Arithmetic check: {}.", v.explanation);
    }
    format!(
        "{} {} \"{}\" ({} credibility, {}).",
        source_name(e),
        stance_verb(e.stance),
        e.sub_claim,
        e.credibility_tier.as_str(),
        e.relevance_label.as_str()
    )
}

fn verdict_line(v: &Verdict) -> String {
    format!(
        "{} (support {:+.3}, certainty {})",
        v.label(),
        v.support_score,
        v.certainty.as_str()
    )
}

fn template_summary(v: &Verdict, n: usize) -> String {
    format!(
        "The claim is rated {} with {} certainty, based on {n} evidence item(s) weighted by source credibility and relevance (support {:+.3}).",
        v.label(),
        v.certainty.as_str(),
        v.support_score
    )
}

fn excerpt(s: &str, max: usize) -> String {
    if s.chars().count() <= max {
        return s.to_string();
    }
    let head: String = s.chars().take(max).collect();
    format!("{head}...")
}

fn limitations(input: &RenderInput<'_>, weighted: usize) -> Vec<String> {
    let mut out = input.notes.clone();
    for pair in input.conflicts.iter().filter(|p| p.is_tie()) {
        out.push(format!(
            "Evidence {} and {} conflict on \"{}\" with equal credibility; both were kept and certainty is capped at medium.",
            pair.evidence_a, pair.evidence_b, pair.sub_claim
        ));
    }
    let unknown = input
        .log
        .entries()
        .iter()
        .filter(|e| e.retained && e.weight() > 0.0)
        .filter(|e| e.origin_tool == Tool::WebSearch && e.credibility_tier == CredibilityTier::Unknown)
        .count();
    if unknown > 0 {
        out.push(format!(
            "{unknown} source(s) are not in the reliability dataset or were not assessed; they were weighted at the unknown-tier score."
        ));
    }
    for e in input.log.entries() {
        if let Some(v) = e.numeric.as_ref().filter(|v| v.holds.is_none()) {
            out.push(format!("A numeric check could not be decided: {}.", v.explanation));
        }
    }
    let v = &input.verdict;
    if v.certainty != Certainty::High {
        let min = input.scores.certainty_evidence_min();
        let reason = if weighted < min {
            format!("only {weighted} weighted evidence item(s) were available (minimum {min})")
        } else if v.support_score.abs() < 0.5 {
            format!("the weighted evidence is mixed (support {:+.3})", v.support_score)
        } else {
            "conflicting evidence of equal credibility remains".to_string()
        };
        out.push(format!("Certainty is {} because {reason}.", v.certainty.as_str()));
    }
    out
}

/// Assembles the report. The reasoning chain, citations and limitations are
/// built from the log alone; the model only supplies wording, and any
/// narrative failure falls back to template sentences.
pub fn render(input: RenderInput<'_>, llm: Option<&LlmGateway>) -> Report {
    let chain_items: Vec<&Evidence> = input
        .log
        .entries()
        .iter()
        .filter(|e| e.retained && e.relevance_label != Relevance::Irrelevant)
        .collect();
    let weighted = input
        .log
        .entries()
        .iter()
        .filter(|e| e.retained && e.weight() > 0.0)
        .count();

    let mut notes = Vec::new();
    let narrative = llm.and_then(|llm| {
        let listing: Vec<String> = chain_items
            .iter()
            .map(|e| {
                format!(
                    "[{}] {} | {} | {} credibility | {}",
                    e.id,
                    source_name(e),
                    e.stance.as_str(),
                    e.credibility_tier.as_str(),
                    excerpt(&e.content, 300)
                )
            })
            .collect();
        let listing = if listing.is_empty() { "(none)".to_string() } else { listing.join("\n") };
        match llm.request::<NarrativePayload>(
            prompts::narrative(),
            &[
                ("claim", &input.claim.text),
                ("verdict", &verdict_line(&input.verdict)),
                ("evidence", &listing),
            ],
        ) {
            Ok(n) => Some(n),
            Err(e) => {
                notes.push(format!("Narrative generation failed; template wording was used ({e})."));
                None
            }
        }
    });

    let inference_for = |i: usize, e: &Evidence| {
        narrative
            .as_ref()
            .and_then(|n| n.inferences.get(i))
            .map(|s| s.trim())
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .unwrap_or_else(|| template_inference(e))
    };
    let reasoning_chain = chain_items
        .iter()
        .enumerate()
        .map(|(i, e)| ReasoningStep {
            evidence_ids: vec![e.id.clone()],
            inference: inference_for(i, e),
            sub_claim: e.sub_claim.clone(),
            stance: e.stance,
            numeric: e.numeric.clone(),
        })
        .collect();
    let citations = input
        .log
        .entries()
        .iter()
        .filter(|e| e.retained)
        .filter_map(|e| {
            e.source_url.as_ref().map(|url| Citation {
                evidence_id: e.id.clone(),
                source_url: url.clone(),
                publication_date: e.publication_date.clone(),
            })
        })
        .collect();
    let summary = narrative
        .as_ref()
        .map(|n| n.summary.trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| template_summary(&input.verdict, weighted));
    let mut limitations = limitations(&input, weighted);
    limitations.extend(notes);

    Report {
        claim: input.claim.clone(),
        verdict: input.verdict,
        summary,
        reasoning_chain,
        citations,
        limitations,
        plan_history: input.plans,
    }
}

pub const MODEL_ONLY_NOTE: &str =
    "No external tools were used; the verdict rests on the model's own knowledge and cites no sources.";

/// Report for a tool-less run: the model estimates support from its own
/// knowledge and certainty stays at or below medium.
pub fn render_model_only(
    claim: &Claim,
    plans: Vec<Plan>,
    mut notes: Vec<String>,
    scores: &ScoreConfig,
    llm: &LlmGateway,
) -> Report {
    notes.push(MODEL_ONLY_NOTE.to_string());
    let (verdict, summary) = match llm.request::<NarrativePayload>(prompts::model_only(), &[("claim", &claim.text)]) {
        Ok(n) => match n.model_support {
            Some(s) => {
                let v = map_model_verdict(s, claim.label_scheme, scores);
                let summary = if n.summary.trim().is_empty() {
                    template_summary(&v, 0)
                } else {
                    n.summary.trim().to_string()
                };
                (v, summary)
            }
            None => {
                notes.push("The model gave no support estimate; the claim is unverified.".into());
                let v = Verdict::unverified(claim.label_scheme);
                (v.clone(), template_summary(&v, 0))
            }
        },
        Err(e) => {
            notes.push(format!("Model-only assessment failed ({e}); the claim is unverified."));
            let v = Verdict::unverified(claim.label_scheme);
            (v.clone(), template_summary(&v, 0))
        }
    };
    Report {
        claim: claim.clone(),
        verdict,
        summary,
        reasoning_chain: Vec::new(),
        citations: Vec::new(),
        limitations: notes,
        plan_history: plans,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::{Script, ScriptEntry};
    use crate::model::{LabelScheme, Relevance};
    use crate::synthesis::{aggregate_support, map_verdict, resolve_conflicts};

    fn ev(id: &str, stance: Stance, tier: CredibilityTier, score: f64) -> Evidence {
        Evidence {
            id: id.into(),
            sub_claim: "nurses quit".into(),
            content: format!("content of {id}"),
            source_url: Some(format!("https://{id}.example/a")),
            source_domain: Some(format!("{id}.example")),
            publication_date: Some("2023-01-01".into()),
            search_terms: Some("q".into()),
            credibility_tier: tier,
            credibility_score: score,
            stance,
            relevance_label: Relevance::HighlyRelevant,
            origin_tool: Tool::WebSearch,
            retained: true,
            numeric: None,
        }
    }

    fn run(items: Vec<Evidence>, llm: Option<&LlmGateway>) -> Report {
        let claim = Claim::new("c1", "Nurses quit en masse", LabelScheme::Binary).unwrap();
        let sc = ScoreConfig::default();
        let mut log = EvidenceLog::new("c1");
        for e in items {
            log.append(e).unwrap();
        }
        let conflicts = resolve_conflicts(&mut log);
        let s = aggregate_support(&log);
        let verdict = map_verdict(s.score, LabelScheme::Binary, &sc, s.weighted_count, conflicts.iter().any(|p| p.is_tie()));
        render(
            RenderInput {
                claim: &claim,
                verdict,
                log: &log,
                conflicts: &conflicts,
                plans: vec![Plan::direct()],
                notes: vec![],
                scores: &sc,
            },
            llm,
        )
    }

    #[test]
    fn one_step_and_citation_per_item() {
        let r = run(
            vec![
                ev("a", Stance::Supporting, CredibilityTier::High, 1.0),
                ev("b", Stance::Supporting, CredibilityTier::Medium, 0.6),
                ev("c", Stance::Supporting, CredibilityTier::High, 1.0),
            ],
            None,
        );
        assert_eq!(r.reasoning_chain.len(), 3);
        assert_eq!(r.citations.len(), 3);
        assert_eq!(r.verdict.label(), "real");
    }

    #[test]
    fn tie_is_reported() {
        let r = run(
            vec![
                ev("a", Stance::Supporting, CredibilityTier::High, 1.0),
                ev("b", Stance::Contradicting, CredibilityTier::High, 1.0),
            ],
            None,
        );
        assert!(r.limitations.iter().any(|l| l.contains("equal credibility")));
        assert_ne!(r.verdict.certainty, Certainty::High);
    }

    #[test]
    fn narrative_words_chain_but_not_structure() {
        let llm = LlmGateway::scripted(
            Script::ordered(vec![ScriptEntry::reply(
                r#"{"summary":"S.","inferences":["First.","Second."]}"#,
            )])
            .unwrap(),
        );
        let items = vec![
            ev("a", Stance::Supporting, CredibilityTier::High, 1.0),
            ev("b", Stance::Supporting, CredibilityTier::High, 1.0),
            ev("c", Stance::Supporting, CredibilityTier::High, 1.0),
        ];
        let with = run(items.clone(), Some(&llm));
        let without = run(items, None);
        assert_eq!(with.summary, "S.");
        assert_eq!(with.reasoning_chain[1].inference, "Second.");
        // third inference missing from the narrative falls back to the template
        assert_eq!(with.reasoning_chain[2].inference, without.reasoning_chain[2].inference);
        let ids = |r: &Report| r.cited_evidence_ids().map(str::to_string).collect::<Vec<_>>();
        assert_eq!(ids(&with), ids(&without));
        assert_eq!(with.citations, without.citations);
    }

    #[test]
    fn narrative_failure_falls_back() {
        let llm = LlmGateway::scripted(
            Script::ordered(vec![ScriptEntry::reply("no"), ScriptEntry::reply("no")]).unwrap(),
        );
        let r = run(vec![ev("a", Stance::Supporting, CredibilityTier::High, 1.0)], Some(&llm));
        assert!(r.summary.starts_with("The claim is rated real"));
        assert!(r.limitations.iter().any(|l| l.contains("Narrative generation failed")));
    }

    #[test]
    fn unknown_tier_noted() {
        let r = run(vec![ev("a", Stance::Supporting, CredibilityTier::Unknown, 0.4)], None);
        assert!(r.limitations.iter().any(|l| l.contains("unknown-tier")));
    }

    #[test]
    fn model_only_report() {
        let claim = Claim::new("c", "The moon is made of cheese", LabelScheme::Binary).unwrap();
        let llm = LlmGateway::scripted(
            Script::ordered(vec![ScriptEntry::reply(
                r#"{"summary":"Implausible.","inferences":[],"model_support":-0.9}"#,
            )])
            .unwrap(),
        );
        let r = render_model_only(&claim, vec![Plan::direct()], vec![], &ScoreConfig::default(), &llm);
        assert_eq!(r.verdict.label(), "fake");
        assert_eq!(r.verdict.certainty, Certainty::Medium);
        assert!(r.citations.is_empty());
        assert!(r.limitations.iter().any(|l| l == MODEL_ONLY_NOTE));
    }
}

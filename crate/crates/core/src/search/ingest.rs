use super::{extract_content, SearchError, SearchResult};
use crate::credibility::normalize_domain;
use crate::llm::{prompts, LlmGateway, ReformulationPayload, StancePayload};
use crate::model::{normalize_date, CredibilityTier, Evidence, EvidenceLog, Relevance, ScoreConfig, Stance, Tool};
use crate::text;

/// What one ingestion pass added to the log.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Ingested {
    pub evidence_ids: Vec<String>,
    pub limitations: Vec<String>,
}

pub struct IngestContext<'a> {
    pub claim: &'a str,
    pub sub_claim: &'a str,
    pub terms: &'a str,
    pub llm: &'a LlmGateway,
    pub scores: &'a ScoreConfig,
    pub content_cap: usize,
}

/// Appends one evidence entry per usable result, labeled with stance and
/// relevance by one model call each. Credibility starts at the unknown
/// tier until assessed. A failed stance call stores the entry as
/// irrelevant and notes the failure.
pub fn ingest(
    results: &[SearchResult],
    ctx: &IngestContext<'_>,
    log: &mut EvidenceLog,
) -> Result<Ingested, SearchError> {
    let mut out = Ingested::default();
    for r in results {
        r.validate()?;
        let content = match extract_content(r, ctx.content_cap) {
            Ok(c) if !c.is_empty() => c,
            _ => {
                out.limitations.push(format!("Result {} had no usable text and was skipped.", r.url));
                continue;
            }
        };
        let (stance, relevance) = match ctx.llm.request::<StancePayload>(
            prompts::stance(),
            &[
                ("claim", ctx.claim),
                ("sub_claim", ctx.sub_claim),
                ("source", &r.url),
                ("content", &content),
            ],
        ) {
            Ok(p) => (p.stance, p.relevance),
            Err(e) => {
                out.limitations.push(format!(
                    "Stance labeling failed for {}; it was treated as irrelevant ({e}).",
                    r.url
                ));
                (Stance::Irrelevant, Relevance::Irrelevant)
            }
        };
        let id = log.next_evidence_id();
        log.append(Evidence {
            id: id.clone(),
            sub_claim: ctx.sub_claim.to_string(),
            content,
            source_url: Some(r.url.clone()),
            source_domain: normalize_domain(&r.url).ok(),
            publication_date: r.published.as_deref().and_then(normalize_date),
            search_terms: Some(ctx.terms.to_string()),
            credibility_tier: CredibilityTier::Unknown,
            credibility_score: ctx.scores.tier_score(CredibilityTier::Unknown),
            stance,
            relevance_label: relevance,
            origin_tool: Tool::WebSearch,
            retained: true,
            numeric: None,
        })?;
        out.evidence_ids.push(id);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reformulation {
    pub terms: String,
    /// Why the deterministic fallback was used instead of the model's terms.
    pub fallback_reason: Option<String>,
}

/// The original terms extended with the first `attempt` sub-claim keywords
/// that no used query contains.
pub fn fallback_terms(original: &str, sub_claim: &str, used: &[String], attempt: u32) -> Option<String> {
    let seen: std::collections::BTreeSet<String> = used.iter().flat_map(|u| text::tokens(u)).collect();
    let fresh: Vec<String> = text::keywords(sub_claim)
        .into_iter()
        .filter(|k| !seen.contains(k))
        .take(attempt.max(1) as usize)
        .collect();
    if fresh.is_empty() {
        return None;
    }
    let terms = format!("{} {}", original.trim(), fresh.join(" "));
    (!used.iter().any(|u| u.trim() == terms)).then_some(terms)
}

/// New search terms for an empty search, distinct from every query already
/// used for this step. Returns `None` when neither the model nor the
/// fallback can produce distinct terms.
pub fn reformulate(
    sub_claim: &str,
    original: &str,
    used: &[String],
    attempt: u32,
    llm: &LlmGateway,
) -> Option<Reformulation> {
    let used_list = used.join(" | ");
    let attempt_str = attempt.to_string();
    let reason = match llm.request::<ReformulationPayload>(
        prompts::reformulate(),
        &[("sub_claim", sub_claim), ("used", &used_list), ("attempt", &attempt_str)],
    ) {
        Ok(p) => {
            let terms = p.terms.trim().to_string();
            if !used.iter().any(|u| u.trim().eq_ignore_ascii_case(&terms)) {
                return Some(Reformulation {
                    terms,
                    fallback_reason: None,
                });
            }
            format!("reformulation repeated a used query (`{terms}`)")
        }
        Err(e) => format!("reformulation failed: {e}"),
    };
    fallback_terms(original, sub_claim, used, attempt).map(|terms| Reformulation {
        terms,
        fallback_reason: Some(reason),
    })
}

//! Builds an evidence log by hand, resolves a conflict, aggregates support
//! and pulls the entries most related to a query.

use factlab::model::{retrieve_relevant, CredibilityTier, Evidence, EvidenceLog, Relevance, ScoreConfig, Stance, Tool};
use factlab::synthesis::{aggregate_support, map_verdict, resolve_conflicts};
use factlab::model::LabelScheme;

fn item(log: &EvidenceLog, content: &str, tier: CredibilityTier, stance: Stance, sc: &ScoreConfig) -> Evidence {
    Evidence {
        id: log.next_evidence_id(),
        sub_claim: "nurse resignation rate".into(),
        content: content.into(),
        source_url: None,
        source_domain: None,
        publication_date: None,
        search_terms: None,
        credibility_tier: tier,
        credibility_score: sc.tier_score(tier),
        stance,
        relevance_label: Relevance::HighlyRelevant,
        origin_tool: Tool::WebSearch,
        retained: true,
        numeric: None,
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sc = ScoreConfig::default();
    let mut log = EvidenceLog::new("demo");
    let entries = [
        ("Federal data put the hospital nurse separation rate near 27 percent.", CredibilityTier::High, Stance::Contradicting),
        ("A wire report cites the same 27 percent figure.", CredibilityTier::Medium, Stance::Contradicting),
        ("A blog says more than half of nurses quit.", CredibilityTier::Low, Stance::Supporting),
    ];
    for (content, tier, stance) in entries {
        let e = item(&log, content, tier, stance, &sc);
        log.append(e)?;
    }

    for pair in resolve_conflicts(&mut log) {
        println!("conflict {} vs {}: {:?}", pair.evidence_a, pair.evidence_b, pair.resolution);
    }
    let s = aggregate_support(&log);
    let v = map_verdict(s.score, LabelScheme::Binary, &sc, s.weighted_count, false);
    println!("support {:.3} over {} items -> {} ({})", s.score, s.weighted_count, v.label(), v.certainty.as_str());

    for e in retrieve_relevant(&log, "nurse separation percent", 2) {
        println!("  {} [{}] {}", e.id, if e.retained { "kept" } else { "dropped" }, e.content);
    }
    print!("{}", log.to_jsonl());
    Ok(())
}

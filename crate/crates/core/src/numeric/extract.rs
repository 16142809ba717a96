use std::sync::OnceLock;

use regex::Regex;

use super::{Exact, NumericClaim, Quantity};
use crate::llm::{prompts, CandidateClaim, CandidateQuantity, ExtractionPayload, LlmGateway};

/// Grounded claims plus the reasons any candidates were dropped.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Extraction {
    pub claims: Vec<NumericClaim>,
    pub dropped: Vec<String>,
    /// Set when the extractor could not run; the claim list is then empty.
    pub degraded: Option<String>,
}

fn number_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"[0-9]+(?:[,\u{2009}\u{202F}][0-9]{3})*(?:\.[0-9]+)?%?").expect("valid regex")
    })
}

/// Strips thousands separators and a trailing percent sign.
fn normalize_literal(s: &str) -> (String, bool) {
    let s = s.trim();
    let (body, percent) = match s.strip_suffix('%') {
        Some(b) => (b.trim_end(), true),
        None => (s, false),
    };
    let cleaned = body
        .chars()
        .filter(|c| !matches!(c, ',' | '\u{2009}' | '\u{202F}'))
        .collect();
    (cleaned, percent)
}

/// Normalized numeric literals in `text`, in order, with percent flags.
pub fn numbers_in(text: &str) -> Vec<(String, bool)> {
    number_re()
        .find_iter(text)
        .map(|m| normalize_literal(m.as_str()))
        .collect()
}

/// Whether `text` states something the numeric tool could check: any
/// percentage, or at least two numbers.
pub fn has_numeric_assertion(text: &str) -> bool {
    let nums = numbers_in(text);
    nums.iter().any(|(_, pct)| *pct) || nums.len() >= 2
}

fn char_slice(text: &str, start: usize, end: usize) -> Option<String> {
    let count = text.chars().count();
    if start >= end || end > count {
        return None;
    }
    Some(text.chars().skip(start).take(end - start).collect())
}

fn ground_quantity(q: &CandidateQuantity, span_numbers: &[String]) -> Result<Quantity, String> {
    let (normalized, percent) = normalize_literal(&q.literal);
    if !span_numbers.contains(&normalized) {
        return Err(format!("literal `{}` does not appear in the cited span", q.literal));
    }
    let value = Exact::parse_decimal(&normalized)
        .ok_or_else(|| format!("literal `{}` is not a number", q.literal))?;
    let unit = match (&q.unit, percent) {
        (Some(u), _) => Some(u.trim().to_string()),
        (None, true) => Some("%".to_string()),
        (None, false) => None,
    };
    Ok(Quantity { value, unit })
}

fn ground_one(text: &str, c: &CandidateClaim) -> Result<NumericClaim, String> {
    let [start, end] = c.span;
    let span = char_slice(text, start, end)
        .ok_or_else(|| format!("span [{start}, {end}) is outside the text"))?;
    let span_numbers: Vec<String> = numbers_in(&span).into_iter().map(|(n, _)| n).collect();
    let operands = c
        .operands
        .iter()
        .map(|q| ground_quantity(q, &span_numbers))
        .collect::<Result<Vec<_>, _>>()?;
    let asserted_value = c
        .asserted
        .as_ref()
        .map(|q| ground_quantity(q, &span_numbers))
        .transpose()?;
    let claim = NumericClaim {
        kind: c.kind,
        operands,
        asserted_value,
        relation_op: c.relation_op,
        source_span: c.span,
    };
    claim.check_well_typed().map_err(|e| e.to_string())?;
    Ok(claim)
}

/// Keeps only candidates whose every literal appears, modulo thousands
/// separators and percent signs, inside the candidate's span of `text`,
/// and which are well-typed. Failing candidates are dropped, never repaired.
pub fn ground_candidates(text: &str, candidates: &[CandidateClaim]) -> (Vec<NumericClaim>, Vec<String>) {
    let mut claims = Vec::new();
    let mut dropped = Vec::new();
    for (i, c) in candidates.iter().enumerate() {
        match ground_one(text, c) {
            Ok(claim) => claims.push(claim),
            Err(reason) => dropped.push(format!("candidate {i} dropped: {reason}")),
        }
    }
    (claims, dropped)
}

/// Asks the model for candidate claims and grounds them in `text`.
/// A model failure yields no claims and a degradation note.
pub fn extract_claims(text: &str, llm: &LlmGateway) -> Extraction {
    match llm.request::<ExtractionPayload>(prompts::numeric_extraction(), &[("text", text)]) {
        Ok(payload) => {
            let (claims, dropped) = ground_candidates(text, &payload.claims);
            Extraction {
                claims,
                dropped,
                degraded: None,
            }
        }
        Err(e) => Extraction {
            claims: Vec::new(),
            dropped: Vec::new(),
            degraded: Some(format!("numeric extraction unavailable: {e}")),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::{Script, ScriptEntry};
    use crate::numeric::ClaimKind;
    use proptest::prelude::*;

    const FNN: &str = "FakeNewsNet has 23,196 real and 21,417 fake articles, 44,613 in total.";

    fn lit(s: &str) -> CandidateQuantity {
        CandidateQuantity {
            literal: s.into(),
            unit: None,
        }
    }

    fn sum_candidate(ops: &[&str], asserted: &str, span: [usize; 2]) -> CandidateClaim {
        CandidateClaim {
            kind: ClaimKind::Sum,
            operands: ops.iter().map(|s| lit(s)).collect(),
            asserted: Some(lit(asserted)),
            relation_op: None,
            span,
        }
    }

    fn whole(text: &str) -> [usize; 2] {
        [0, text.chars().count()]
    }

    #[test]
    fn scripted_sum_extraction() {
        let payload = serde_json::json!({"claims": [{
            "kind": "sum",
            "operands": [{"literal": "23,196"}, {"literal": "21,417"}],
            "asserted": {"literal": "44,613"},
            "span": whole(FNN),
        }]});
        let llm = LlmGateway::scripted(Script::ordered(vec![ScriptEntry::json(&payload)]).unwrap());
        let ex = extract_claims(FNN, &llm);
        assert!(ex.degraded.is_none());
        assert_eq!(ex.claims.len(), 1);
        let c = &ex.claims[0];
        assert_eq!(c.kind, ClaimKind::Sum);
        assert_eq!(c.operands[0].value, Exact::from_integer(23196));
        assert_eq!(c.operands[1].value, Exact::from_integer(21417));
        assert_eq!(c.asserted_value.as_ref().unwrap().value, Exact::from_integer(44613));
    }

    #[test]
    fn bare_quantity_yields_nothing() {
        let text = "The vaccine has a 99% survival rate.";
        let llm = LlmGateway::scripted(
            Script::ordered(vec![ScriptEntry::reply(r#"{"claims":[]}"#)]).unwrap(),
        );
        assert!(extract_claims(text, &llm).claims.is_empty());
        // a single-operand candidate is ill-typed and dropped
        let c = CandidateClaim {
            kind: ClaimKind::PercentageOf,
            operands: vec![lit("99%")],
            asserted: None,
            relation_op: None,
            span: whole(text),
        };
        let (claims, dropped) = ground_candidates(text, &[c]);
        assert!(claims.is_empty());
        assert_eq!(dropped.len(), 1);
    }

    #[test]
    fn ungrounded_operand_dropped() {
        let c = sum_candidate(&["5000", "21,417"], "44,613", whole(FNN));
        let (claims, dropped) = ground_candidates(FNN, &[c]);
        assert!(claims.is_empty());
        assert!(dropped[0].contains("5000"));
    }

    #[test]
    fn span_limits_grounding() {
        // span covers only "23,196 real", so 21,417 is not grounded
        let start = FNN.find("23,196").unwrap();
        let c = sum_candidate(&["23,196", "21,417"], "44,613", [start, start + 11]);
        assert!(ground_candidates(FNN, &[c]).0.is_empty());
        let c = sum_candidate(&["23,196", "21,417"], "44,613", [0, 10_000]);
        assert!(ground_candidates(FNN, &[c]).0.is_empty());
    }

    #[test]
    fn percent_literal_gets_unit() {
        let text = "30% of 200 is 61";
        let c = CandidateClaim {
            kind: ClaimKind::PercentageOf,
            operands: vec![lit("30%"), lit("200")],
            asserted: Some(lit("61")),
            relation_op: None,
            span: whole(text),
        };
        let (claims, _) = ground_candidates(text, &[c]);
        assert_eq!(claims[0].operands[0].unit.as_deref(), Some("%"));
    }

    #[test]
    fn llm_failure_degrades() {
        let llm = LlmGateway::scripted(Script::ordered(vec![ScriptEntry::reply("x")]).unwrap());
        let ex = extract_claims(FNN, &llm);
        assert!(ex.claims.is_empty());
        assert!(ex.degraded.is_some());
    }

    #[test]
    fn detection() {
        assert!(has_numeric_assertion("a 99% survival rate"));
        assert!(has_numeric_assertion("1,200 of 3,000 nurses"));
        assert!(!has_numeric_assertion("the senator lied about the bill"));
        assert!(!has_numeric_assertion("born in 1961"));
    }

    fn text_with_numbers() -> impl Strategy<Value = (String, Vec<u32>)> {
        proptest::collection::vec(0u32..100_000, 1..5).prop_map(|nums| {
            let words: Vec<String> = nums.iter().map(|n| format!("word {n} and")).collect();
            (words.join(" "), nums)
        })
    }

    proptest! {
        #[test]
        fn never_emits_ungrounded_operands(
            (text, nums) in text_with_numbers(),
            fake in proptest::collection::vec(0u32..100_000, 2..4),
            span_end in 0usize..200,
        ) {
            let c = sum_candidate(
                &fake.iter().map(|n| n.to_string()).collect::<Vec<_>>().iter().map(String::as_str).collect::<Vec<_>>(),
                &nums[0].to_string(),
                [0, span_end],
            );
            let (claims, _) = ground_candidates(&text, &[c]);
            let present: Vec<Exact> = nums.iter().map(|n| Exact::from_integer(*n as i64)).collect();
            for claim in claims {
                for q in claim.operands.iter().chain(claim.asserted_value.iter()) {
                    prop_assert!(present.contains(&q.value));
                }
            }
        }
    }
}

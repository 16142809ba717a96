use num_rational::Ratio;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::metrics::{consistency_mean_exact, diversity_exact, ratio_f64, relevance_exact};
use super::EvalError;
use crate::llm::{prompts, JudgePayload, LlmGateway};
use crate::model::Report;

/// Number of identical judge calls averaged per report.
pub const JUDGE_RUNS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportQuality {
    pub relevance: f64,
    pub consistency: f64,
    pub diversity: f64,
    /// Consistency before clamping at zero.
    pub consistency_raw: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct ExactQuality {
    relevance: Ratio<i64>,
    consistency: Ratio<i64>,
    diversity: Ratio<i64>,
    consistency_raw: Ratio<i64>,
}

impl ExactQuality {
    fn from_payload(p: &JudgePayload) -> Result<ExactQuality, EvalError> {
        let rel: Vec<f64> = p.evidence.iter().map(|e| e.relevance).collect();
        let con: Vec<f64> = p.evidence.iter().map(|e| e.consistency).collect();
        let raw = consistency_mean_exact(&con)?;
        Ok(ExactQuality {
            relevance: relevance_exact(&rel)?,
            consistency: raw.max(Ratio::zero()),
            diversity: diversity_exact(p.relevant_count as u64),
            consistency_raw: raw,
        })
    }

    fn mean(runs: &[ExactQuality]) -> ReportQuality {
        let n = Ratio::from_integer(runs.len().max(1) as i64);
        let avg = |f: fn(&ExactQuality) -> Ratio<i64>| {
            ratio_f64(runs.iter().map(f).fold(Ratio::zero(), |a, b| a + b) / n)
        };
        ReportQuality {
            relevance: avg(|q| q.relevance),
            consistency: avg(|q| q.consistency),
            diversity: avg(|q| q.diversity),
            consistency_raw: avg(|q| q.consistency_raw),
        }
    }
}

/// Scores a report with three identical judge calls and averages the
/// per-run (relevance, consistency, diversity) triples. Any failed call
/// fails the whole evaluation.
pub fn judge_report(report: &Report, llm: &LlmGateway) -> Result<ReportQuality, EvalError> {
    let text = report.to_string();
    let mut runs = Vec::with_capacity(JUDGE_RUNS);
    for run in 1..=JUDGE_RUNS {
        let payload: JudgePayload = llm
            .request(prompts::judge(), &[("report", &text)])
            .map_err(|source| EvalError::Judge { run, source })?;
        runs.push(ExactQuality::from_payload(&payload)?);
    }
    Ok(ExactQuality::mean(&runs))
}

/// Component-wise mean over several reports.
pub fn mean_quality(qs: &[ReportQuality]) -> Option<ReportQuality> {
    if qs.is_empty() {
        return None;
    }
    let n = qs.len() as f64;
    let sum = |f: fn(&ReportQuality) -> f64| qs.iter().map(f).sum::<f64>() / n;
    Some(ReportQuality {
        relevance: sum(|q| q.relevance),
        consistency: sum(|q| q.consistency),
        diversity: sum(|q| q.diversity),
        consistency_raw: sum(|q| q.consistency_raw),
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::llm::{Script, ScriptEntry};
    use crate::model::{Claim, LabelScheme, Verdict};

    pub(crate) fn report() -> Report {
        Report {
            claim: Claim::new("c1", "The sky is green.", LabelScheme::Binary).unwrap(),
            verdict: Verdict::unverified(LabelScheme::Binary),
            summary: "s".into(),
            reasoning_chain: vec![],
            citations: vec![],
            limitations: vec![],
            plan_history: vec![],
        }
    }

    /// A judge reply whose derived triple is (relevance, consistency, diversity)
    /// over five evidence items.
    pub(crate) fn reply(rel: [f64; 5], con: [f64; 5], count: u32) -> ScriptEntry {
        let ev: Vec<serde_json::Value> = (0..5)
            .map(|i| serde_json::json!({"evidence_id": format!("ev-{i}"), "relevance": rel[i], "consistency": con[i]}))
            .collect();
        ScriptEntry::json(&serde_json::json!({"evidence": ev, "relevant_count": count}))
    }

    #[test]
    fn three_runs_average_exactly() {
        let con = [1.0, 1.0, 1.0, 1.0, 0.0];
        let script = Script::ordered(vec![
            reply([1.0, 1.0, 1.0, 0.0, 0.0], con, 3),
            reply([1.0, 1.0, 1.0, 0.5, 0.0], con, 3),
            reply([1.0, 1.0, 1.0, 1.0, 0.0], con, 3),
        ])
        .unwrap();
        let q = judge_report(&report(), &LlmGateway::scripted(script)).unwrap();
        assert_eq!((q.relevance, q.consistency, q.diversity), (0.7, 0.8, 0.6));
    }

    #[test]
    fn identical_runs_are_idempotent() {
        let r = reply([1.0, 0.5, 0.5, 1.0, 0.0], [1.0, -1.0, 0.0, 1.0, 1.0], 4);
        let script = Script::ordered(vec![r.clone(), r.clone(), r]).unwrap();
        let q = judge_report(&report(), &LlmGateway::scripted(script)).unwrap();
        assert_eq!((q.relevance, q.consistency, q.diversity), (0.6, 0.4, 0.8));
    }

    #[test]
    fn failed_second_run_yields_no_score() {
        let ok = reply([1.0; 5], [1.0; 5], 5);
        let script = Script::ordered(vec![
            ok,
            ScriptEntry::reply("not json"),
            ScriptEntry::reply("still not json"),
        ])
        .unwrap();
        match judge_report(&report(), &LlmGateway::scripted(script)) {
            Err(EvalError::Judge { run, .. }) => assert_eq!(run, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn out_of_set_labels_rejected() {
        let bad = ScriptEntry::reply(r#"{"evidence":[{"evidence_id":"e","relevance":0.7,"consistency":1}],"relevant_count":1}"#);
        let script = Script::ordered(vec![bad.clone(), bad.clone(), bad]).unwrap();
        assert!(judge_report(&report(), &LlmGateway::scripted(script)).is_err());
    }
}

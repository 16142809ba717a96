use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{CredibilityTier, Evidence, ModelError, Tool};
use crate::text;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToolOutcome {
    Ok,
    Empty,
    Error,
}

/// A credibility rating applied to an earlier evidence entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assessment {
    pub evidence_id: String,
    pub tier: CredibilityTier,
    pub score: f64,
}

/// One tool invocation. `evidence_ids` lists the entries this call created;
/// `assessments` lists credibility ratings it applied to existing entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolCallRecord {
    pub step_index: usize,
    pub tool: Tool,
    pub input_summary: String,
    pub outcome: ToolOutcome,
    pub evidence_ids: Vec<String>,
    pub wall_time_ms: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub assessments: Vec<Assessment>,
}

/// One line of the JSON-lines trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceLine {
    Evidence(Evidence),
    ToolCall(ToolCallRecord),
}

/// Append-only working memory for a single verification task.
///
/// Entries are immutable once appended with two exceptions: a credibility
/// assessment may rate an entry exactly once, and synthesis toggles the
/// `retained` flag. Every mutation that reaches the trace is journaled, so
/// the JSON-lines rendering replays to an identical log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvidenceLog {
    task_id: String,
    entries: Vec<Evidence>,
    tool_trace: Vec<ToolCallRecord>,
    #[serde(skip)]
    journal: Vec<TraceLine>,
    #[serde(skip)]
    index: HashMap<String, usize>,
    #[serde(skip)]
    traced: BTreeSet<String>,
    #[serde(skip)]
    assessed: BTreeSet<String>,
}

impl EvidenceLog {
    pub fn new(task_id: impl Into<String>) -> EvidenceLog {
        EvidenceLog {
            task_id: task_id.into(),
            entries: Vec::new(),
            tool_trace: Vec::new(),
            journal: Vec::new(),
            index: HashMap::new(),
            traced: BTreeSet::new(),
            assessed: BTreeSet::new(),
        }
    }

    pub fn task_id(&self) -> &str {
        &self.task_id
    }

    pub fn entries(&self) -> &[Evidence] {
        &self.entries
    }

    pub fn tool_trace(&self) -> &[ToolCallRecord] {
        &self.tool_trace
    }

    pub fn journal(&self) -> &[TraceLine] {
        &self.journal
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Evidence> {
        self.index.get(id).map(|&i| &self.entries[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    /// Id the next appended entry should use.
    pub fn next_evidence_id(&self) -> String {
        format!("ev{:03}", self.entries.len() + 1)
    }

    pub fn is_assessed(&self, id: &str) -> bool {
        self.assessed.contains(id)
    }

    pub fn append(&mut self, evidence: Evidence) -> Result<(), ModelError> {
        if self.index.contains_key(&evidence.id) {
            return Err(ModelError::DuplicateEvidence(evidence.id));
        }
        self.index.insert(evidence.id.clone(), self.entries.len());
        self.journal.push(TraceLine::Evidence(evidence.clone()));
        self.entries.push(evidence);
        Ok(())
    }

    /// Records a tool invocation. Every listed evidence id must already be
    /// in the log and not claimed by an earlier record; assessments are
    /// applied to their entries.
    pub fn record_tool_call(&mut self, record: ToolCallRecord) -> Result<(), ModelError> {
        let mut fresh = BTreeSet::new();
        for id in &record.evidence_ids {
            if !self.index.contains_key(id) {
                return Err(ModelError::UnknownEvidence(id.clone()));
            }
            if self.traced.contains(id) || !fresh.insert(id.clone()) {
                return Err(ModelError::EvidenceAlreadyTraced(id.clone()));
            }
        }
        for a in &record.assessments {
            if !self.index.contains_key(&a.evidence_id) {
                return Err(ModelError::UnknownEvidence(a.evidence_id.clone()));
            }
        }
        for a in &record.assessments {
            let i = self.index[&a.evidence_id];
            self.entries[i].credibility_tier = a.tier;
            self.entries[i].credibility_score = a.score;
            self.assessed.insert(a.evidence_id.clone());
        }
        self.traced.extend(fresh);
        self.journal.push(TraceLine::ToolCall(record.clone()));
        self.tool_trace.push(record);
        Ok(())
    }

    pub fn set_retained(&mut self, id: &str, retained: bool) -> Result<(), ModelError> {
        let i = *self
            .index
            .get(id)
            .ok_or_else(|| ModelError::UnknownEvidence(id.to_string()))?;
        self.entries[i].retained = retained;
        Ok(())
    }

    /// Evidence ids not listed by any tool call record.
    pub fn untraced_ids(&self) -> Vec<&str> {
        self.entries
            .iter()
            .map(|e| e.id.as_str())
            .filter(|id| !self.traced.contains(*id))
            .collect()
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for line in &self.journal {
            out.push_str(&trace_line_json(line));
            out.push('\n');
        }
        out
    }

    /// Rebuilds a log by replaying a JSON-lines trace.
    pub fn from_jsonl(task_id: impl Into<String>, jsonl: &str) -> Result<EvidenceLog, ModelError> {
        let mut log = EvidenceLog::new(task_id);
        for (n, raw) in jsonl.lines().enumerate() {
            if raw.trim().is_empty() {
                continue;
            }
            let line: TraceLine = serde_json::from_str(raw).map_err(|e| ModelError::Trace {
                line: n + 1,
                message: e.to_string(),
            })?;
            log.replay(line).map_err(|e| ModelError::Trace {
                line: n + 1,
                message: e.to_string(),
            })?;
        }
        Ok(log)
    }

    pub fn replay(&mut self, line: TraceLine) -> Result<(), ModelError> {
        match line {
            TraceLine::Evidence(e) => self.append(e),
            TraceLine::ToolCall(r) => self.record_tool_call(r),
        }
    }
}

/// Serializes one trace line as compact JSON.
pub(crate) fn trace_line_json(line: &TraceLine) -> String {
    serde_json::to_string(line).expect("trace lines always serialize")
}

/// Up to `k` entries ranked by token-set Jaccard similarity between `query`
/// and each entry's content plus sub-claim. Ties keep insertion order.
pub fn retrieve_relevant<'a>(log: &'a EvidenceLog, query: &str, k: usize) -> Vec<&'a Evidence> {
    let q = text::token_set(query);
    let mut scored: Vec<(f64, &Evidence)> = log
        .entries()
        .iter()
        .map(|e| {
            let mut doc = text::token_set(&e.content);
            doc.extend(text::token_set(&e.sub_claim));
            (text::jaccard(&q, &doc), e)
        })
        .collect();
    // stable sort keeps insertion order among equal scores
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    scored.into_iter().take(k).map(|(_, e)| e).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Relevance, Stance};

    pub(crate) fn evidence(id: &str, content: &str) -> Evidence {
        Evidence {
            id: id.into(),
            sub_claim: "sub".into(),
            content: content.into(),
            source_url: None,
            source_domain: None,
            publication_date: None,
            search_terms: None,
            credibility_tier: CredibilityTier::Unknown,
            credibility_score: 0.4,
            stance: Stance::Irrelevant,
            relevance_label: Relevance::Irrelevant,
            origin_tool: Tool::NumericVerification,
            retained: true,
            numeric: None,
        }
    }

    fn record(ids: &[&str]) -> ToolCallRecord {
        ToolCallRecord {
            step_index: 0,
            tool: Tool::NumericVerification,
            input_summary: "x".into(),
            outcome: ToolOutcome::Ok,
            evidence_ids: ids.iter().map(|s| s.to_string()).collect(),
            wall_time_ms: 0,
            assessments: vec![],
        }
    }

    #[test]
    fn append_to_empty() {
        let mut log = EvidenceLog::new("t");
        log.append(evidence("a", "x")).unwrap();
        assert_eq!(log.len(), 1);
    }

    #[test]
    fn duplicate_id_rejected() {
        let mut log = EvidenceLog::new("t");
        for id in ["a", "b", "c"] {
            log.append(evidence(id, "x")).unwrap();
        }
        let before = log.clone();
        assert!(matches!(
            log.append(evidence("b", "y")),
            Err(ModelError::DuplicateEvidence(id)) if id == "b"
        ));
        assert_eq!(log, before);
    }

    #[test]
    fn insertion_order_kept() {
        let mut log = EvidenceLog::new("t");
        for i in 0..5 {
            log.append(evidence(&format!("e{i}"), "x")).unwrap();
        }
        let ids: Vec<_> = log.entries().iter().map(|e| e.id.as_str()).collect();
        assert_eq!(ids, ["e0", "e1", "e2", "e3", "e4"]);
    }

    #[test]
    fn tool_records_must_reference_known_untraced_ids() {
        let mut log = EvidenceLog::new("t");
        log.append(evidence("a", "x")).unwrap();
        assert!(log.record_tool_call(record(&["zzz"])).is_err());
        log.record_tool_call(record(&["a"])).unwrap();
        assert!(matches!(
            log.record_tool_call(record(&["a"])),
            Err(ModelError::EvidenceAlreadyTraced(_))
        ));
        assert!(log.untraced_ids().is_empty());
    }

    #[test]
    fn assessments_apply_once_and_replay() {
        let mut log = EvidenceLog::new("t");
        log.append(evidence("a", "x")).unwrap();
        log.record_tool_call(record(&["a"])).unwrap();
        let mut cred = record(&[]);
        cred.tool = Tool::CredibilityAssessment;
        cred.assessments.push(Assessment {
            evidence_id: "a".into(),
            tier: CredibilityTier::High,
            score: 1.0,
        });
        log.record_tool_call(cred).unwrap();
        assert_eq!(log.get("a").unwrap().credibility_tier, CredibilityTier::High);
        assert!(log.is_assessed("a"));

        let replayed = EvidenceLog::from_jsonl("t", &log.to_jsonl()).unwrap();
        assert_eq!(replayed, log);
        assert_eq!(replayed.to_jsonl(), log.to_jsonl());
    }

    #[test]
    fn jsonl_lines_are_tagged() {
        let mut log = EvidenceLog::new("t");
        log.append(evidence("a", "x")).unwrap();
        log.record_tool_call(record(&["a"])).unwrap();
        let text = log.to_jsonl();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with(r#"{"kind":"evidence""#));
        assert!(lines[1].starts_with(r#"{"kind":"tool_call""#));
    }

    #[test]
    fn retrieval_exact_match_first() {
        let mut log = EvidenceLog::new("t");
        log.append(evidence("a", "flu season started early")).unwrap();
        log.append(evidence("b", "vaccine survival rate data")).unwrap();
        let top = retrieve_relevant(&log, "vaccine survival rate data sub", 1);
        assert_eq!(top.len(), 1);
        assert_eq!(top[0].id, "b");
    }

    #[test]
    fn retrieval_all_zero_keeps_order() {
        let mut log = EvidenceLog::new("t");
        for id in ["a", "b", "c", "d"] {
            log.append(evidence(id, "alpha beta")).unwrap();
        }
        let got: Vec<_> = retrieve_relevant(&log, "zebra", 3)
            .iter()
            .map(|e| e.id.clone())
            .collect();
        assert_eq!(got, ["a", "b", "c"]);
        assert!(retrieve_relevant(&EvidenceLog::new("x"), "q", 3).is_empty());
    }
}

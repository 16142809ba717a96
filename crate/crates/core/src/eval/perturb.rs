use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ablation::pct;
use super::batch::{run_batch, score_results, BatchOptions};
use super::dataset::Dataset;
use super::metrics::accuracy_drop;
use super::EvalError;
use crate::llm::{prompts, LlmSource};
use crate::orchestrator::{AgentConfig, Toolbox};
use crate::text::tokens;

/// Rewriting levels, ordered by intended difficulty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PerturbationLevel {
    #[serde(rename = "L0_original")]
    L0Original,
    #[serde(rename = "L1_paraphrase")]
    L1Paraphrase,
    #[serde(rename = "L2_restructure")]
    L2Restructure,
    #[serde(rename = "L3_whitewash")]
    L3Whitewash,
}

impl PerturbationLevel {
    pub const ALL: [PerturbationLevel; 4] = [
        PerturbationLevel::L0Original,
        PerturbationLevel::L1Paraphrase,
        PerturbationLevel::L2Restructure,
        PerturbationLevel::L3Whitewash,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PerturbationLevel::L0Original => "L0_original",
            PerturbationLevel::L1Paraphrase => "L1_paraphrase",
            PerturbationLevel::L2Restructure => "L2_restructure",
            PerturbationLevel::L3Whitewash => "L3_whitewash",
        }
    }
}

impl fmt::Display for PerturbationLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PerturbationLevel {
    type Err = EvalError;

    /// Accepts `L1` or `L1_paraphrase`, case-insensitively.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        PerturbationLevel::ALL
            .into_iter()
            .find(|l| l.as_str().eq_ignore_ascii_case(s) || l.as_str()[..2].eq_ignore_ascii_case(s))
            .ok_or_else(|| EvalError::UnknownLevel(s.to_string()))
    }
}

/// Produces a rewritten claim text for a level above L0.
pub trait Rewriter: Send + Sync {
    fn rewrite(&self, claim_id: &str, text: &str, level: PerturbationLevel) -> Result<String, EvalError>;
}

/// Rewrites looked up from a JSON map: original text to level to rewrite.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FixtureRewriter {
    pub rewrites: BTreeMap<String, BTreeMap<PerturbationLevel, String>>,
}

impl FixtureRewriter {
    pub fn from_json(json: &str) -> Result<FixtureRewriter, EvalError> {
        serde_json::from_str(json).map_err(|e| EvalError::RewriteFixture(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<FixtureRewriter, EvalError> {
        let text = std::fs::read_to_string(path).map_err(|source| EvalError::Io {
            path: path.display().to_string(),
            source,
        })?;
        FixtureRewriter::from_json(&text)
    }
}

impl Rewriter for FixtureRewriter {
    fn rewrite(&self, claim_id: &str, text: &str, level: PerturbationLevel) -> Result<String, EvalError> {
        self.rewrites
            .get(text)
            .and_then(|m| m.get(&level))
            .cloned()
            .ok_or_else(|| EvalError::MissingRewrite {
                id: claim_id.to_string(),
                level,
            })
    }
}

/// Rewrites with the chat model using the rewrite template.
#[derive(Debug, Clone)]
pub struct LlmRewriter {
    pub source: LlmSource,
}

impl Rewriter for LlmRewriter {
    fn rewrite(&self, claim_id: &str, text: &str, level: PerturbationLevel) -> Result<String, EvalError> {
        let wrap = |source| EvalError::Rewrite {
            id: claim_id.to_string(),
            source,
        };
        let llm = self.source.gateway_for(claim_id).map_err(wrap)?;
        let out = llm
            .request_text(prompts::rewrite(), &[("level", level.as_str()), ("text", text)])
            .map_err(wrap)?;
        Ok(out.trim().to_string())
    }
}

/// Rewrites `text` at `level`. L0 returns the input; higher levels must
/// change its token sequence.
pub fn perturb(
    claim_id: &str,
    text: &str,
    level: PerturbationLevel,
    rewriter: &dyn Rewriter,
) -> Result<String, EvalError> {
    if level == PerturbationLevel::L0Original {
        return Ok(text.to_string());
    }
    let out = rewriter.rewrite(claim_id, text, level)?;
    if tokens(&out) == tokens(text) {
        return Err(EvalError::IdenticalRewrite {
            id: claim_id.to_string(),
            level,
        });
    }
    Ok(out)
}

/// Rewrites every record's text; ids and gold labels are carried over.
pub fn perturb_dataset(
    dataset: &Dataset,
    level: PerturbationLevel,
    rewriter: &dyn Rewriter,
) -> Result<Dataset, EvalError> {
    let mut out = dataset.clone();
    for rec in &mut out.records {
        rec.text = perturb(&rec.id, &rec.text, level, rewriter)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RobustnessRow {
    pub level: PerturbationLevel,
    /// Accuracy in percent.
    pub accuracy: f64,
    /// Percentage-point drop from the L0 accuracy.
    pub drop: f64,
    pub unverified: usize,
}

#[derive(Debug, Serialize)]
struct CsvRow {
    level: &'static str,
    accuracy: String,
    drop: String,
    unverified: usize,
}

pub fn robustness_csv(rows: &[RobustnessRow]) -> Result<String, EvalError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(CsvRow {
            level: r.level.as_str(),
            accuracy: format!("{:.1}", r.accuracy),
            drop: format!("{:.1}", r.drop),
            unverified: r.unverified,
        })?;
    }
    super::csv_string(w)
}

/// Evaluates the dataset at L0 and at each requested level.
pub fn run_robustness(
    dataset: &Dataset,
    levels: &[PerturbationLevel],
    rewriter: &dyn Rewriter,
    cfg: &AgentConfig,
    source: &LlmSource,
    tools: &Toolbox,
    opts: BatchOptions,
) -> Result<Vec<RobustnessRow>, EvalError> {
    let mut ladder = vec![PerturbationLevel::L0Original];
    ladder.extend(levels.iter().copied().filter(|l| *l != PerturbationLevel::L0Original));
    let mut rows = Vec::with_capacity(ladder.len());
    let mut baseline = None;
    for level in ladder {
        let data = perturb_dataset(dataset, level, rewriter)?;
        let results = run_batch(&data, cfg, source, tools, opts)?;
        let m = score_results(&results, data.scheme)?;
        let acc: f64 = pct(m.accuracy).parse().expect("formatted float");
        let base = *baseline.get_or_insert(acc);
        rows.push(RobustnessRow {
            level,
            accuracy: acc,
            drop: accuracy_drop(base, acc),
            unverified: results.iter().filter(|r| r.predicted == "unverified").count(),
        });
    }
    Ok(rows)
}

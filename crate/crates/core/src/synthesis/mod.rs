//! Evidence integration: conflict resolution, credibility-weighted support,
//! verdict mapping and report rendering.

mod render;

pub use render::{render, render_model_only, RenderInput, MODEL_ONLY_NOTE};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{
    BinaryLabel, Certainty, EvidenceLog, LabelScheme, Relevance, ScoreConfig, SixLevelLabel, Stance, Verdict,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resolution {
    RetainA,
    RetainB,
    RetainBothFlagUncertainty,
}

/// Two items with opposite stances on one sub-claim. `evidence_a` is the
/// supporting item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConflictPair {
    pub evidence_a: String,
    pub evidence_b: String,
    pub sub_claim: String,
    pub resolution: Resolution,
}

impl ConflictPair {
    pub fn is_tie(&self) -> bool {
        self.resolution == Resolution::RetainBothFlagUncertainty
    }
}

/// Resolves opposite-stance evidence per sub-claim by credibility.
///
/// The most credible supporting and contradicting items are compared. When
/// one side is strictly more credible, its top item is paired with every
/// item of the other side and those items are dropped. Equal scores keep
/// everything and record a single tie. Irrelevant evidence and sub-claims
/// without opposition are left alone.
pub fn resolve_conflicts(log: &mut EvidenceLog) -> Vec<ConflictPair> {
    let mut groups: BTreeMap<&str, (Vec<(&str, f64)>, Vec<(&str, f64)>)> = BTreeMap::new();
    for e in log.entries() {
        if !e.retained || e.relevance_label == Relevance::Irrelevant {
            continue;
        }
        let g = groups.entry(e.sub_claim.as_str()).or_default();
        match e.stance {
            Stance::Supporting => g.0.push((&e.id, e.credibility_score)),
            Stance::Contradicting => g.1.push((&e.id, e.credibility_score)),
            Stance::Irrelevant => {}
        }
    }

    // first maximum keeps insertion order on equal scores
    fn top<'a>(items: &[(&'a str, f64)]) -> (&'a str, f64) {
        items
            .iter()
            .copied()
            .fold(items[0], |best, x| if x.1 > best.1 { x } else { best })
    }

    let mut pairs = Vec::new();
    let mut drop = Vec::new();
    for (sub_claim, (sup, con)) in &groups {
        if sup.is_empty() || con.is_empty() {
            continue;
        }
        let (s_id, s_score) = top(sup);
        let (c_id, c_score) = top(con);
        let pair = |a: &str, b: &str, resolution| ConflictPair {
            evidence_a: a.to_string(),
            evidence_b: b.to_string(),
            sub_claim: sub_claim.to_string(),
            resolution,
        };
        if s_score > c_score {
            for (id, _) in con {
                pairs.push(pair(s_id, id, Resolution::RetainA));
                drop.push(id.to_string());
            }
        } else if c_score > s_score {
            for (id, _) in sup {
                pairs.push(pair(id, c_id, Resolution::RetainB));
                drop.push(id.to_string());
            }
        } else {
            pairs.push(pair(s_id, c_id, Resolution::RetainBothFlagUncertainty));
        }
    }
    for id in drop {
        log.set_retained(&id, false).expect("id comes from the log");
    }
    pairs
}

/// Credibility-weighted support over retained evidence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    /// In [-1, 1]; 0 when no retained item carries weight.
    pub score: f64,
    pub total_weight: f64,
    /// Retained items with positive weight.
    pub weighted_count: usize,
}

pub fn aggregate_support(log: &EvidenceLog) -> Support {
    let mut num = 0.0;
    let mut den = 0.0;
    let mut count = 0;
    for e in log.entries().iter().filter(|e| e.retained) {
        let w = e.weight();
        if w > 0.0 {
            num += e.stance.value() * w;
            den += w;
            count += 1;
        }
    }
    // balanced evidence lands exactly on 0 whatever the weight scale
    if f64::abs(num) <= 1e-12 * den {
        num = 0.0;
    }
    let score = if den > 0.0 { (num / den).clamp(-1.0, 1.0) } else { 0.0 };
    Support {
        score,
        total_weight: den,
        weighted_count: count,
    }
}

fn binary_label(support: f64, sc: &ScoreConfig) -> BinaryLabel {
    let t = sc.binary_threshold();
    if support > t {
        BinaryLabel::Real
    } else if support < t {
        BinaryLabel::Fake
    } else {
        BinaryLabel::Unverified
    }
}

/// Bins are left-open and right-closed: `(e[i-1], e[i]]`.
fn six_level_label(support: f64, sc: &ScoreConfig) -> SixLevelLabel {
    let bin = sc.six_level_bin_edges().iter().filter(|&&e| support > e).count();
    SixLevelLabel::ALL[bin]
}

fn labelled(support: f64, scheme: LabelScheme, sc: &ScoreConfig, certainty: Certainty) -> Verdict {
    Verdict {
        scheme,
        binary_label: (scheme == LabelScheme::Binary).then(|| binary_label(support, sc)),
        six_level_label: (scheme == LabelScheme::SixLevel).then(|| six_level_label(support, sc)),
        support_score: support,
        certainty,
    }
}

/// Maps aggregated support to a graded verdict. `weighted_count` is the
/// number of retained items with positive weight; zero means there was no
/// usable evidence and the binary label is unverified.
pub fn map_verdict(
    support: f64,
    scheme: LabelScheme,
    sc: &ScoreConfig,
    weighted_count: usize,
    tie_flag: bool,
) -> Verdict {
    let min = sc.certainty_evidence_min();
    let certainty = if weighted_count == 0 || weighted_count < min {
        Certainty::Low
    } else if support.abs() >= 0.5 && !tie_flag {
        Certainty::High
    } else {
        Certainty::Medium
    };
    if weighted_count == 0 {
        return Verdict {
            certainty,
            ..Verdict::unverified(scheme)
        };
    }
    labelled(support, scheme, sc, certainty)
}

/// Verdict from the model's own estimate on a tool-less run; certainty
/// never exceeds medium.
pub fn map_model_verdict(model_support: f64, scheme: LabelScheme, sc: &ScoreConfig) -> Verdict {
    let s = model_support.clamp(-1.0, 1.0);
    let certainty = if s.abs() >= 0.5 { Certainty::Medium } else { Certainty::Low };
    labelled(s, scheme, sc, certainty)
}

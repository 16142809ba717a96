//! Scoring constants and the configurable score mapping.

use serde::{Deserialize, Serialize};

use super::ModelError;

/// Per-evidence contribution to the diversity score.
pub const DIVERSITY_INCREMENT: f64 = 0.2;
/// Relevance label values: highly relevant, slightly relevant, irrelevant.
pub const RELEVANCE_VALUES: [f64; 3] = [1.0, 0.5, 0.0];
/// Consistency label values: supporting, irrelevant, contradicting.
pub const CONSISTENCY_VALUES: [f64; 3] = [1.0, 0.0, -1.0];

/// Source credibility tier. `Unknown` covers sources absent from the
/// reliability dataset and evidence that has not been assessed yet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CredibilityTier {
    High,
    Medium,
    Low,
    Unknown,
}

impl CredibilityTier {
    pub fn as_str(self) -> &'static str {
        match self {
            CredibilityTier::High => "high",
            CredibilityTier::Medium => "medium",
            CredibilityTier::Low => "low",
            CredibilityTier::Unknown => "unknown",
        }
    }
}

/// Numeric score attached to each credibility tier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TierScores {
    pub high: f64,
    pub medium: f64,
    pub low: f64,
    pub unknown: f64,
}

impl Default for TierScores {
    fn default() -> Self {
        TierScores {
            high: 1.0,
            medium: 0.6,
            low: 0.2,
            unknown: 0.4,
        }
    }
}

impl TierScores {
    pub fn score(&self, tier: CredibilityTier) -> f64 {
        match tier {
            CredibilityTier::High => self.high,
            CredibilityTier::Medium => self.medium,
            CredibilityTier::Low => self.low,
            CredibilityTier::Unknown => self.unknown,
        }
    }

    /// Multiplies every tier score by `factor`.
    pub fn scaled(&self, factor: f64) -> TierScores {
        TierScores {
            high: self.high * factor,
            medium: self.medium * factor,
            low: self.low * factor,
            unknown: self.unknown * factor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScoreConfig {
    #[serde(default)]
    tier_scores: TierScores,
    #[serde(default)]
    binary_threshold: f64,
    #[serde(default = "default_bin_edges")]
    six_level_bin_edges: [f64; 5],
    #[serde(default = "default_certainty_min")]
    certainty_evidence_min: usize,
}

fn default_bin_edges() -> [f64; 5] {
    [-0.6, -0.2, 0.0, 0.2, 0.6]
}

fn default_certainty_min() -> usize {
    2
}

/// Score mapping used by credibility assessment and verdict synthesis.
///
/// The relevance, consistency and diversity constants are fixed and live
/// outside this struct; only the tier mapping, the binary threshold, the
/// six-level bin edges and the certainty evidence minimum are tunable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScoreConfig", into = "RawScoreConfig")]
pub struct ScoreConfig {
    tier_scores: TierScores,
    binary_threshold: f64,
    six_level_bin_edges: [f64; 5],
    certainty_evidence_min: usize,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        ScoreConfig {
            tier_scores: TierScores::default(),
            binary_threshold: 0.0,
            six_level_bin_edges: default_bin_edges(),
            certainty_evidence_min: default_certainty_min(),
        }
    }
}

impl TryFrom<RawScoreConfig> for ScoreConfig {
    type Error = ModelError;

    fn try_from(raw: RawScoreConfig) -> Result<Self, Self::Error> {
        ScoreConfig::new(
            raw.tier_scores,
            raw.binary_threshold,
            raw.six_level_bin_edges,
            raw.certainty_evidence_min,
        )
    }
}

impl From<ScoreConfig> for RawScoreConfig {
    fn from(sc: ScoreConfig) -> Self {
        RawScoreConfig {
            tier_scores: sc.tier_scores,
            binary_threshold: sc.binary_threshold,
            six_level_bin_edges: sc.six_level_bin_edges,
            certainty_evidence_min: sc.certainty_evidence_min,
        }
    }
}

impl ScoreConfig {
    pub fn new(
        tier_scores: TierScores,
        binary_threshold: f64,
        six_level_bin_edges: [f64; 5],
        certainty_evidence_min: usize,
    ) -> Result<Self, ModelError> {
        let t = &tier_scores;
        let all = [t.high, t.medium, t.low, t.unknown];
        if all.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(ModelError::InvalidScoreConfig(
                "tier scores must be finite and non-negative".into(),
            ));
        }
        if !(t.high > t.medium && t.medium > t.low) {
            return Err(ModelError::InvalidScoreConfig(format!(
                "tier scores must satisfy high > medium > low (got {}, {}, {})",
                t.high, t.medium, t.low
            )));
        }
        if !binary_threshold.is_finite() || !(-1.0..=1.0).contains(&binary_threshold) {
            return Err(ModelError::InvalidScoreConfig(format!(
                "binary threshold {binary_threshold} outside [-1, 1]"
            )));
        }
        let edges = &six_level_bin_edges;
        if edges.iter().any(|e| !e.is_finite() || *e <= -1.0 || *e >= 1.0) {
            return Err(ModelError::InvalidScoreConfig(
                "six-level bin edges must lie strictly inside (-1, 1)".into(),
            ));
        }
        if edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ModelError::InvalidScoreConfig(
                "six-level bin edges must be strictly ascending".into(),
            ));
        }
        Ok(ScoreConfig {
            tier_scores,
            binary_threshold,
            six_level_bin_edges,
            certainty_evidence_min,
        })
    }

    pub fn tier_scores(&self) -> &TierScores {
        &self.tier_scores
    }

    pub fn tier_score(&self, tier: CredibilityTier) -> f64 {
        self.tier_scores.score(tier)
    }

    pub fn binary_threshold(&self) -> f64 {
        self.binary_threshold
    }

    pub fn six_level_bin_edges(&self) -> &[f64; 5] {
        &self.six_level_bin_edges
    }

    pub fn certainty_evidence_min(&self) -> usize {
        self.certainty_evidence_min
    }

    /// Same configuration with every tier score multiplied by `factor`.
    pub fn with_scaled_tiers(&self, factor: f64) -> Result<ScoreConfig, ModelError> {
        ScoreConfig::new(
            self.tier_scores.scaled(factor),
            self.binary_threshold,
            self.six_level_bin_edges,
            self.certainty_evidence_min,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let sc = ScoreConfig::default();
        assert_eq!(sc.tier_score(CredibilityTier::High), 1.0);
        assert_eq!(sc.tier_score(CredibilityTier::Medium), 0.6);
        assert_eq!(sc.tier_score(CredibilityTier::Low), 0.2);
        assert_eq!(sc.tier_score(CredibilityTier::Unknown), 0.4);
        assert_eq!(sc.binary_threshold(), 0.0);
        assert_eq!(sc.six_level_bin_edges(), &[-0.6, -0.2, 0.0, 0.2, 0.6]);
        assert_eq!(sc.certainty_evidence_min(), 2);
    }

    #[test]
    fn rejects_unordered_tiers() {
        let bad = TierScores {
            high: 0.5,
            medium: 0.6,
            low: 0.2,
            unknown: 0.4,
        };
        assert!(ScoreConfig::new(bad, 0.0, default_bin_edges(), 2).is_err());
    }

    #[test]
    fn rejects_unsorted_edges() {
        let edges = [-0.6, 0.0, -0.2, 0.2, 0.6];
        assert!(ScoreConfig::new(TierScores::default(), 0.0, edges, 2).is_err());
        let edges = [-1.0, -0.2, 0.0, 0.2, 0.6];
        assert!(ScoreConfig::new(TierScores::default(), 0.0, edges, 2).is_err());
    }

    #[test]
    fn deserialization_validates() {
        let err = serde_json::from_str::<ScoreConfig>(
            r#"{"tier_scores":{"high":0.1,"medium":0.6,"low":0.2,"unknown":0.4}}"#,
        );
        assert!(err.is_err());
        // fixed constants are not configurable
        let err = serde_json::from_str::<ScoreConfig>(r#"{"diversity_increment":0.3}"#);
        assert!(err.is_err());
        let ok: ScoreConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(ok, ScoreConfig::default());
    }
}

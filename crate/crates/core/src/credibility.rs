//! Source credibility assessment against a tiered reliability dataset.
//!
//! The dataset is a UTF-8 CSV with the header `domain,tier,notes`. Domains
//! are bare hosts (`cdc.gov`), tiers are `high`, `medium` or `low`. A row
//! matches its domain and every subdomain of it.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use url::Url;

use crate::model::{CredibilityTier, ScoreConfig};

#[derive(Debug, thiserror::Error)]
pub enum CredibilityError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("line {line}: unknown tier `{value}` (expected high, medium or low)")]
    UnknownTier { line: u64, value: String },
    #[error("line {line}: `{value}` is not a bare domain")]
    InvalidDomain { line: u64, value: String },
    #[error("line {line}: duplicate domain `{domain}` (first seen on line {first_line})")]
    DuplicateDomain {
        domain: String,
        line: u64,
        first_line: u64,
    },
    #[error("invalid URL `{url}`: {message}")]
    InvalidUrl { url: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceRating {
    pub tier: CredibilityTier,
    pub notes: Option<String>,
}

/// Immutable domain → tier table.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ReliabilityDataset {
    entries: BTreeMap<String, SourceRating>,
    version: String,
}

#[derive(Debug, Deserialize)]
struct Row {
    domain: String,
    tier: String,
    #[serde(default)]
    notes: Option<String>,
}

fn parse_tier(s: &str) -> Option<CredibilityTier> {
    match s.trim() {
        "high" => Some(CredibilityTier::High),
        "medium" => Some(CredibilityTier::Medium),
        "low" => Some(CredibilityTier::Low),
        _ => None,
    }
}

fn valid_bare_domain(d: &str) -> bool {
    !d.is_empty()
        && d.split('.').all(|label| {
            !label.is_empty()
                && label
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
        })
}

impl ReliabilityDataset {
    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, domain: &str) -> Option<&SourceRating> {
        self.entries.get(domain)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &SourceRating)> {
        self.entries.iter().map(|(d, r)| (d.as_str(), r))
    }

    /// Builds a dataset from `(domain, tier)` pairs, normalizing domains.
    pub fn from_pairs<'a>(
        version: &str,
        pairs: impl IntoIterator<Item = (&'a str, CredibilityTier)>,
    ) -> Result<ReliabilityDataset, CredibilityError> {
        let mut csv = String::from("domain,tier,notes\n");
        for (d, t) in pairs {
            csv.push_str(&format!("{d},{},\n", t.as_str()));
        }
        ReliabilityDataset::from_reader(csv.as_bytes(), version)
    }

    pub fn from_reader(reader: impl Read, version: &str) -> Result<ReliabilityDataset, CredibilityError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers().map_err(|e| CredibilityError::Malformed {
            line: 1,
            message: e.to_string(),
        })?;
        if headers.iter().collect::<Vec<_>>() != ["domain", "tier", "notes"] {
            return Err(CredibilityError::Malformed {
                line: 1,
                message: format!(
                    "header must be `domain,tier,notes`, got `{}`",
                    headers.iter().collect::<Vec<_>>().join(",")
                ),
            });
        }
        let mut entries = BTreeMap::new();
        let mut first_seen: BTreeMap<String, u64> = BTreeMap::new();
        for result in rdr.deserialize::<Row>() {
            let row = result.map_err(|e| CredibilityError::Malformed {
                line: e.position().map_or(0, |p| p.line()),
                message: e.to_string(),
            })?;
            // data rows start on line 2
            let line = first_seen.len() as u64 + 2;
            let tier = parse_tier(&row.tier).ok_or_else(|| CredibilityError::UnknownTier {
                line,
                value: row.tier.clone(),
            })?;
            let lowered = row.domain.trim().to_lowercase();
            let domain = lowered.strip_prefix("www.").unwrap_or(&lowered).to_string();
            if !valid_bare_domain(&domain) {
                return Err(CredibilityError::InvalidDomain {
                    line,
                    value: row.domain,
                });
            }
            if let Some(&first_line) = first_seen.get(&domain) {
                return Err(CredibilityError::DuplicateDomain {
                    domain,
                    line,
                    first_line,
                });
            }
            first_seen.insert(domain.clone(), line);
            let notes = row.notes.filter(|n| !n.is_empty());
            entries.insert(domain, SourceRating { tier, notes });
        }
        Ok(ReliabilityDataset {
            entries,
            version: version.to_string(),
        })
    }
}

/// Loads a reliability dataset; the version is the file stem.
pub fn load_dataset(path: &Path) -> Result<ReliabilityDataset, CredibilityError> {
    let file = std::fs::File::open(path).map_err(|source| CredibilityError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let version = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    ReliabilityDataset::from_reader(file, &version)
}

/// Lowercase host with scheme, credentials, port, path and a leading
/// `www.` removed.
pub fn normalize_domain(url: &str) -> Result<String, CredibilityError> {
    let invalid = |message: String| CredibilityError::InvalidUrl {
        url: url.to_string(),
        message,
    };
    let parsed = Url::parse(url.trim()).map_err(|e| invalid(e.to_string()))?;
    let host = parsed
        .host_str()
        .ok_or_else(|| invalid("URL has no host".into()))?
        .trim_end_matches('.')
        .to_lowercase();
    if host.is_empty() {
        return Err(invalid("URL has no host".into()));
    }
    Ok(host.strip_prefix("www.").unwrap_or(&host).to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CredibilityAssessment {
    pub domain: String,
    pub tier: CredibilityTier,
    pub score: f64,
    /// Dataset row that matched, if any.
    pub matched: Option<String>,
}

/// Longest dataset suffix of `domain` on label boundaries.
fn longest_suffix_match<'a>(domain: &'a str, ds: &ReliabilityDataset) -> Option<&'a str> {
    let mut candidate = domain;
    loop {
        if ds.entries.contains_key(candidate) {
            return Some(candidate);
        }
        match candidate.split_once('.') {
            Some((_, rest)) => candidate = rest,
            None => return None,
        }
    }
}

/// Rates the source of `url`. Unlisted sources get the `unknown` tier.
pub fn assess(
    url: &str,
    ds: &ReliabilityDataset,
    sc: &ScoreConfig,
) -> Result<CredibilityAssessment, CredibilityError> {
    let domain = normalize_domain(url)?;
    let matched = longest_suffix_match(&domain, ds).map(str::to_string);
    let tier = matched
        .as_deref()
        .map_or(CredibilityTier::Unknown, |m| ds.entries[m].tier);
    Ok(CredibilityAssessment {
        domain,
        tier,
        score: sc.tier_score(tier),
        matched,
    })
}

//! Web search: provider abstraction, page content extraction, and evidence
//! ingestion with provenance metadata.

mod content;
mod http;
mod ingest;

pub use content::{extract_content, DEFAULT_CONTENT_CAP};
pub use http::{HttpSearchProvider, SEARCH_API_KEY_ENV};
pub use ingest::{fallback_terms, ingest, reformulate, IngestContext, Ingested, Reformulation};

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

pub const DEFAULT_MAX_RESULTS: usize = 5;

#[derive(Debug, thiserror::Error)]
pub enum SearchError {
    #[error("search terms are empty")]
    EmptyQuery,
    #[error("max results must be positive")]
    ZeroResults,
    #[error("search transport failed after {attempts} attempts: {message}")]
    Transport { attempts: u32, message: String },
    #[error("search provider error: {0}")]
    Provider(String),
    #[error("result URL `{0}` is not an absolute URL")]
    InvalidUrl(String),
    #[error("result has neither raw content nor a snippet")]
    EmptyContent,
    #[error("fixture {path}: {message}")]
    Fixture { path: String, message: String },
    #[error("{0} is not set")]
    MissingKey(&'static str),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchQuery {
    pub terms: String,
    /// 0 for the original query, n for the n-th reformulation.
    pub attempt: u32,
    pub max_results: usize,
}

impl SearchQuery {
    pub fn new(terms: impl Into<String>, attempt: u32, max_results: usize) -> Result<SearchQuery, SearchError> {
        let terms = terms.into().trim().to_string();
        if terms.is_empty() {
            return Err(SearchError::EmptyQuery);
        }
        if max_results == 0 {
            return Err(SearchError::ZeroResults);
        }
        Ok(SearchQuery {
            terms,
            attempt,
            max_results,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchResult {
    #[serde(alias = "link")]
    pub url: String,
    #[serde(default)]
    pub title: String,
    #[serde(default, alias = "description")]
    pub snippet: String,
    #[serde(default, skip_serializing_if = "Option::is_none", alias = "date")]
    pub published: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none", alias = "content")]
    pub raw_content: Option<String>,
}

impl SearchResult {
    pub fn validate(&self) -> Result<(), SearchError> {
        match url::Url::parse(&self.url) {
            Ok(u) if u.has_host() => Ok(()),
            _ => Err(SearchError::InvalidUrl(self.url.clone())),
        }
    }
}

pub trait SearchProvider: Send + Sync {
    fn provider_id(&self) -> &str;

    /// Raw provider results; [`search`] applies validation and truncation.
    fn fetch(&self, query: &SearchQuery) -> Result<Vec<SearchResult>, SearchError>;
}

/// Runs `query` against `provider`, keeping at most `max_results` results.
pub fn search(query: &SearchQuery, provider: &dyn SearchProvider) -> Result<Vec<SearchResult>, SearchError> {
    let mut results = provider.fetch(query)?;
    for r in &results {
        r.validate()?;
    }
    results.truncate(query.max_results);
    Ok(results)
}

/// Canned results keyed by exact query string. A missing key is an empty
/// result list.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FixtureProvider {
    fixtures: BTreeMap<String, Vec<SearchResult>>,
}

impl FixtureProvider {
    pub fn new(fixtures: BTreeMap<String, Vec<SearchResult>>) -> Result<FixtureProvider, SearchError> {
        for r in fixtures.values().flatten() {
            r.validate()?;
        }
        Ok(FixtureProvider { fixtures })
    }

    pub fn from_json(json: &str) -> Result<FixtureProvider, SearchError> {
        let fixtures = serde_json::from_str(json).map_err(|e| SearchError::Fixture {
            path: "<inline>".into(),
            message: e.to_string(),
        })?;
        FixtureProvider::new(fixtures)
    }

    pub fn from_file(path: &Path) -> Result<FixtureProvider, SearchError> {
        let fixture_err = |message: String| SearchError::Fixture {
            path: path.display().to_string(),
            message,
        };
        let text = std::fs::read_to_string(path).map_err(|e| fixture_err(e.to_string()))?;
        let fixtures = serde_json::from_str(&text).map_err(|e| fixture_err(e.to_string()))?;
        FixtureProvider::new(fixtures)
    }

    pub fn queries(&self) -> impl Iterator<Item = &str> {
        self.fixtures.keys().map(String::as_str)
    }
}

impl SearchProvider for FixtureProvider {
    fn provider_id(&self) -> &str {
        "fixture"
    }

    fn fetch(&self, query: &SearchQuery) -> Result<Vec<SearchResult>, SearchError> {
        Ok(self.fixtures.get(&query.terms).cloned().unwrap_or_default())
    }
}

/// Passes queries through to another provider and captures every response
/// so it can be written out as a fixture file.
pub struct RecordingProvider<P> {
    inner: P,
    recorded: Mutex<BTreeMap<String, Vec<SearchResult>>>,
}

impl<P: SearchProvider> RecordingProvider<P> {
    pub fn new(inner: P) -> RecordingProvider<P> {
        RecordingProvider {
            inner,
            recorded: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn recorded(&self) -> BTreeMap<String, Vec<SearchResult>> {
        self.recorded.lock().expect("recording lock").clone()
    }

    /// Writes the captured responses, merged over any fixtures already at
    /// `path`.
    pub fn save(&self, path: &Path) -> Result<(), SearchError> {
        let mut merged = if path.exists() {
            FixtureProvider::from_file(path)?.fixtures
        } else {
            BTreeMap::new()
        };
        merged.extend(self.recorded());
        let json = serde_json::to_string_pretty(&merged).expect("fixtures serialize");
        std::fs::write(path, json + "\n").map_err(|e| SearchError::Fixture {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }
}

impl<P: SearchProvider> SearchProvider for RecordingProvider<P> {
    fn provider_id(&self) -> &str {
        self.inner.provider_id()
    }

    fn fetch(&self, query: &SearchQuery) -> Result<Vec<SearchResult>, SearchError> {
        let mut results = self.inner.fetch(query)?;
        results.truncate(query.max_results);
        self.recorded
            .lock()
            .expect("recording lock")
            .insert(query.terms.clone(), results.clone());
        Ok(results)
    }
}

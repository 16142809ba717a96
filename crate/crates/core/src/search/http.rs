use std::time::Duration;

use serde::Deserialize;

use super::{SearchError, SearchProvider, SearchQuery, SearchResult};

/// Environment variable holding the search API key.
pub const SEARCH_API_KEY_ENV: &str = "FACTLAB_SEARCH_API_KEY";

/// Generic JSON search API: `GET {endpoint}?q=..&count=..` with a bearer
/// key, answering either a bare result array or `{"results": [...]}`.
pub struct HttpSearchProvider {
    endpoint: String,
    api_key: String,
    agent: ureq::Agent,
    retries: u32,
    backoff: Duration,
}

impl std::fmt::Debug for HttpSearchProvider {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpSearchProvider")
            .field("endpoint", &self.endpoint)
            .field("api_key", &"<redacted>")
            .finish()
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Body {
    Bare(Vec<SearchResult>),
    Wrapped { results: Vec<SearchResult> },
}

impl HttpSearchProvider {
    pub fn new(endpoint: &str, api_key: String, timeout: Duration) -> HttpSearchProvider {
        HttpSearchProvider {
            endpoint: endpoint.to_string(),
            api_key,
            agent: ureq::AgentBuilder::new().timeout(timeout).build(),
            retries: 2,
            backoff: Duration::from_millis(500),
        }
    }

    pub fn from_env(endpoint: &str, timeout: Duration) -> Result<HttpSearchProvider, SearchError> {
        let key = std::env::var(SEARCH_API_KEY_ENV)
            .ok()
            .filter(|k| !k.trim().is_empty())
            .ok_or(SearchError::MissingKey(SEARCH_API_KEY_ENV))?;
        Ok(HttpSearchProvider::new(endpoint, key, timeout))
    }

    fn attempt(&self, query: &SearchQuery) -> Result<Vec<SearchResult>, (bool, String)> {
        let resp = self
            .agent
            .get(&self.endpoint)
            .query("q", &query.terms)
            .query("count", &query.max_results.to_string())
            .set("Authorization", &format!("Bearer {}", self.api_key))
            .call();
        let resp = match resp {
            Ok(r) => r,
            Err(ureq::Error::Status(code, _)) => return Err((code == 429 || code >= 500, format!("HTTP {code}"))),
            Err(e) => return Err((true, e.to_string())),
        };
        match resp.into_json::<Body>() {
            Ok(Body::Bare(r)) | Ok(Body::Wrapped { results: r }) => Ok(r),
            Err(e) => Err((false, format!("malformed search response: {e}"))),
        }
    }
}

impl SearchProvider for HttpSearchProvider {
    fn provider_id(&self) -> &str {
        "http"
    }

    fn fetch(&self, query: &SearchQuery) -> Result<Vec<SearchResult>, SearchError> {
        let mut backoff = self.backoff;
        let mut attempts = 0;
        loop {
            attempts += 1;
            match self.attempt(query) {
                Ok(results) => return Ok(results),
                Err((true, message)) if attempts <= self.retries => {
                    tracing::warn!(attempts, %message, "search transport failure, retrying");
                    std::thread::sleep(backoff);
                    backoff = backoff.saturating_mul(2);
                }
                Err((true, message)) => return Err(SearchError::Transport { attempts, message }),
                Err((false, message)) => return Err(SearchError::Provider(message)),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_body_shapes_decode() {
        let bare: Body = serde_json::from_str(r#"[{"url":"https://a.example","snippet":"s"}]"#).unwrap();
        assert!(matches!(bare, Body::Bare(v) if v.len() == 1));
        let wrapped: Body =
            serde_json::from_str(r#"{"results":[{"link":"https://a.example","title":"t"}]}"#).unwrap();
        assert!(matches!(wrapped, Body::Wrapped { results } if results[0].title == "t"));
    }

    #[test]
    fn key_is_redacted() {
        let p = HttpSearchProvider::new("https://search.example", "sk-secret".into(), Duration::from_secs(1));
        assert!(!format!("{p:?}").contains("sk-secret"));
    }
}

//! Chat-completion gateway with schema-validated replies.
//!
//! A [`ChatBackend`] moves text; [`LlmGateway`] adds transport retries with
//! exponential backoff, strict decoding, and a single repair reprompt when a
//! reply fails validation.

mod http;
pub mod prompts;
mod schema;
mod scripted;

pub use http::{OpenAiCompatible, LLM_API_KEY_ENV};
pub use prompts::Template;
pub use schema::{
    parse_structured, CandidateClaim, CandidateQuantity, ExtractionPayload,
    JudgePayload, JudgedEvidence, NarrativePayload, ParseFailure, Payload, PlanPayload,
    PlannedStep, ReflectDecision, ReflectPayload, ReformulationPayload, Schema, StancePayload,
    Structured,
};
pub use scripted::{Script, ScriptBook, ScriptEntry, ScriptedBackend};

use std::sync::Arc;
use std::time::{Duration, Instant};

#[derive(Debug, Clone, PartialEq)]
pub struct ChatRequest {
    /// Template tag (`id@vN`) the prompts were rendered from.
    pub template: String,
    pub system_prompt: String,
    pub user_prompt: String,
    pub expected_schema: Schema,
    pub temperature: f64,
    pub max_output_tokens: u32,
}

impl ChatRequest {
    pub fn from_template(template: &Template, vars: &[(&str, &str)]) -> ChatRequest {
        ChatRequest {
            template: template.tag(),
            system_prompt: template.system.clone(),
            user_prompt: template.render_user(vars),
            expected_schema: template.schema,
            temperature: 0.0,
            max_output_tokens: 1024,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChatResponse {
    pub raw_text: String,
    pub parsed: Payload,
    pub provider_id: String,
    pub latency_ms: u64,
    /// Repair reprompts issued (0 or 1).
    pub repairs: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BackendError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("script exhausted for schema `{0}`")]
    Exhausted(Schema),
    #[error("{0}")]
    Fatal(String),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LlmError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("transport failed after {attempts} attempts: {message}")]
    Transport { attempts: u32, message: String },
    #[error("reply still invalid after repair: {0}")]
    Parse(ParseFailure),
    #[error("scripted backend exhausted for schema `{0}`")]
    ScriptExhausted(Schema),
    #[error("backend error: {0}")]
    Backend(String),
    #[error("reply decoded as the wrong schema (expected `{0}`)")]
    WrongPayload(Schema),
    #[error("no script for claim `{0}` and no default script")]
    MissingScript(String),
}

/// Transport to a chat model. Implementations must be reentrant.
pub trait ChatBackend: Send + Sync {
    fn provider_id(&self) -> &str;

    fn send(&self, request: &ChatRequest) -> Result<String, BackendError>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    /// Retries after the first failed attempt.
    pub retries: u32,
    pub initial_backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            retries: 2,
            initial_backoff: Duration::from_millis(250),
        }
    }
}

#[derive(Clone)]
pub struct LlmGateway {
    backend: Arc<dyn ChatBackend>,
    retry: RetryPolicy,
}

impl std::fmt::Debug for LlmGateway {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LlmGateway")
            .field("provider", &self.backend.provider_id())
            .field("retry", &self.retry)
            .finish()
    }
}

impl LlmGateway {
    pub fn new(backend: Arc<dyn ChatBackend>) -> LlmGateway {
        LlmGateway {
            backend,
            retry: RetryPolicy::default(),
        }
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> LlmGateway {
        self.retry = retry;
        self
    }

    pub fn scripted(script: Script) -> LlmGateway {
        LlmGateway::new(Arc::new(ScriptedBackend::new(script)))
    }

    pub fn provider_id(&self) -> &str {
        self.backend.provider_id()
    }

    fn send_with_retry(&self, request: &ChatRequest) -> Result<String, LlmError> {
        let mut backoff = self.retry.initial_backoff;
        let mut attempt = 0;
        loop {
            attempt += 1;
            match self.backend.send(request) {
                Ok(text) => return Ok(text),
                Err(BackendError::Transport(message)) => {
                    if attempt > self.retry.retries {
                        return Err(LlmError::Transport {
                            attempts: attempt,
                            message,
                        });
                    }
                    tracing::warn!(attempt, %message, "chat transport failure, retrying");
                    if !backoff.is_zero() {
                        std::thread::sleep(backoff);
                    }
                    backoff = backoff.saturating_mul(2);
                }
                Err(BackendError::Exhausted(schema)) => {
                    return Err(LlmError::ScriptExhausted(schema))
                }
                Err(BackendError::Fatal(m)) => return Err(LlmError::Backend(m)),
            }
        }
    }

    /// Sends `request`, decodes the reply, and on a validation failure
    /// reprompts once with the error message before giving up.
    pub fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
        if request.system_prompt.trim().is_empty() || request.user_prompt.trim().is_empty() {
            return Err(LlmError::InvalidRequest("prompts must be non-empty".into()));
        }
        let start = Instant::now();
        let raw = self.send_with_retry(request)?;
        let (raw, parsed, repairs) = match parse_structured(&raw, request.expected_schema) {
            Ok(p) => (raw, p, 0),
            Err(failure) => {
                tracing::debug!(template = %request.template, %failure, "repairing reply");
                let mut repair = request.clone();
                repair.user_prompt = format!(
                    "{}\n\nYour previous reply was rejected: {}\nReply again with only valid JSON for the `{}` schema.",
                    request.user_prompt, failure.message, request.expected_schema
                );
                let raw = self.send_with_retry(&repair)?;
                let parsed =
                    parse_structured(&raw, request.expected_schema).map_err(LlmError::Parse)?;
                (raw, parsed, 1)
            }
        };
        Ok(ChatResponse {
            raw_text: raw,
            parsed,
            provider_id: self.backend.provider_id().to_string(),
            latency_ms: start.elapsed().as_millis() as u64,
            repairs,
        })
    }

    /// Renders `template`, completes it, and returns the typed payload.
    pub fn request<T: Structured>(
        &self,
        template: &Template,
        vars: &[(&str, &str)],
    ) -> Result<T, LlmError> {
        debug_assert_eq!(template.schema, T::SCHEMA);
        let response = self.complete(&ChatRequest::from_template(template, vars))?;
        T::from_payload(response.parsed).ok_or(LlmError::WrongPayload(T::SCHEMA))
    }

    /// Free-text completion.
    pub fn request_text(&self, template: &Template, vars: &[(&str, &str)]) -> Result<String, LlmError> {
        let response = self.complete(&ChatRequest::from_template(template, vars))?;
        match response.parsed {
            Payload::FreeText(t) => Ok(t),
            _ => Err(LlmError::WrongPayload(Schema::FreeText)),
        }
    }
}

/// Where each task gets its gateway: one shared live client, or a fresh
/// scripted playback per claim so concurrent runs stay deterministic.
#[derive(Debug, Clone)]
pub enum LlmSource {
    Shared(LlmGateway),
    Scripted(Arc<ScriptBook>),
}

impl LlmSource {
    pub fn gateway_for(&self, claim_id: &str) -> Result<LlmGateway, LlmError> {
        match self {
            LlmSource::Shared(gw) => Ok(gw.clone()),
            LlmSource::Scripted(book) => book
                .for_claim(claim_id)
                .cloned()
                .map(LlmGateway::scripted)
                .ok_or_else(|| LlmError::MissingScript(claim_id.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_wait(retries: u32) -> RetryPolicy {
        RetryPolicy {
            retries,
            initial_backoff: Duration::ZERO,
        }
    }

    fn stance_request() -> ChatRequest {
        ChatRequest::from_template(prompts::stance(), &[("claim", "c")])
    }

    #[test]
    fn scripted_reply_returned_verbatim() {
        let raw = r#"{"stance":"supporting","relevance":"highly_relevant"}"#;
        let gw = LlmGateway::scripted(Script::ordered(vec![ScriptEntry::reply(raw)]).unwrap());
        let resp = gw.complete(&stance_request()).unwrap();
        assert_eq!(resp.raw_text, raw);
        assert_eq!(resp.repairs, 0);
        assert_eq!(resp.provider_id, "scripted");
        assert!(matches!(resp.parsed, Payload::Stance(_)));
    }

    #[test]
    fn one_repair_then_success() {
        let backend = Arc::new(ScriptedBackend::new(
            Script::ordered(vec![
                ScriptEntry::reply(r#"{"stance":"maybe","relevance":"irrelevant"}"#),
                ScriptEntry::reply(r#"{"stance":"irrelevant","relevance":"irrelevant"}"#),
            ])
            .unwrap(),
        ));
        let gw = LlmGateway::new(backend.clone());
        let resp = gw.complete(&stance_request()).unwrap();
        assert_eq!(resp.repairs, 1);
        let calls = backend.calls();
        assert_eq!(calls.len(), 2);
        assert!(calls[1].user_prompt.contains("rejected"));
    }

    #[test]
    fn second_parse_failure_is_fatal() {
        let gw = LlmGateway::scripted(
            Script::ordered(vec![ScriptEntry::reply("nope"), ScriptEntry::reply("still nope")])
                .unwrap(),
        );
        assert!(matches!(gw.complete(&stance_request()), Err(LlmError::Parse(_))));
    }

    #[test]
    fn transport_retries_then_surfaces() {
        let retries = 2;
        let entries = (0..=retries)
            .map(|_| ScriptEntry::TransportError("down".into()))
            .chain([ScriptEntry::reply(r#"{"stance":"supporting","relevance":"irrelevant"}"#)])
            .collect();
        let gw = LlmGateway::scripted(Script::ordered(entries).unwrap()).with_retry(no_wait(retries));
        match gw.complete(&stance_request()) {
            Err(LlmError::Transport { attempts, .. }) => assert_eq!(attempts, retries + 1),
            other => panic!("expected transport error, got {other:?}"),
        }
    }

    #[test]
    fn transport_recovers_within_budget() {
        let gw = LlmGateway::scripted(
            Script::ordered(vec![
                ScriptEntry::TransportError("blip".into()),
                ScriptEntry::reply(r#"{"terms":"x"}"#),
            ])
            .unwrap(),
        )
        .with_retry(no_wait(1));
        let t: ReformulationPayload = gw.request(prompts::reformulate(), &[]).unwrap();
        assert_eq!(t.terms, "x");
    }

    #[test]
    fn empty_prompt_rejected() {
        let gw = LlmGateway::scripted(Script::ordered(vec![ScriptEntry::reply("x")]).unwrap());
        let mut req = stance_request();
        req.user_prompt = " ".into();
        assert!(matches!(gw.complete(&req), Err(LlmError::InvalidRequest(_))));
    }
}

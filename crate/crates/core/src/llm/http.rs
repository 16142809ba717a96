//! OpenAI-compatible chat-completions adapter.

use std::time::Duration;

use serde_json::{json, Value};

use super::{BackendError, ChatBackend, ChatRequest};

/// Environment variable holding the API key. Keys are never accepted as
/// flags and never logged.
pub const LLM_API_KEY_ENV: &str = "FACTLAB_LLM_API_KEY";

pub struct OpenAiCompatible {
    base_url: String,
    model: String,
    api_key: String,
    agent: ureq::Agent,
    provider_id: String,
}

impl std::fmt::Debug for OpenAiCompatible {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OpenAiCompatible")
            .field("base_url", &self.base_url)
            .field("model", &self.model)
            .field("api_key", &"<redacted>")
            .finish()
    }
}

impl OpenAiCompatible {
    pub fn new(base_url: &str, model: &str, api_key: String, timeout: Duration) -> OpenAiCompatible {
        OpenAiCompatible {
            base_url: base_url.trim_end_matches('/').to_string(),
            model: model.to_string(),
            api_key,
            agent: ureq::AgentBuilder::new().timeout(timeout).build(),
            provider_id: format!("openai-compatible:{model}"),
        }
    }

    /// Reads the key from [`LLM_API_KEY_ENV`].
    pub fn from_env(base_url: &str, model: &str, timeout: Duration) -> Result<OpenAiCompatible, String> {
        let key = std::env::var(LLM_API_KEY_ENV)
            .map_err(|_| format!("{LLM_API_KEY_ENV} is not set"))?;
        if key.trim().is_empty() {
            return Err(format!("{LLM_API_KEY_ENV} is empty"));
        }
        Ok(OpenAiCompatible::new(base_url, model, key, timeout))
    }

    fn body(&self, request: &ChatRequest) -> Value {
        let mut body = json!({
            "model": self.model,
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
            "messages": [
                {"role": "system", "content": request.system_prompt},
                {"role": "user", "content": request.user_prompt},
            ],
        });
        if request.expected_schema.is_json() {
            body["response_format"] = json!({"type": "json_object"});
        }
        body
    }
}

impl ChatBackend for OpenAiCompatible {
    fn provider_id(&self) -> &str {
        &self.provider_id
    }

    fn send(&self, request: &ChatRequest) -> Result<String, BackendError> {
        let url = format!("{}/chat/completions", self.base_url);
        tracing::debug!(template = %request.template, %url, "chat completion");
        let resp = self
            .agent
            .post(&url)
            .set("Authorization", &format!("Bearer {}", self.api_key))
            .send_json(self.body(request));
        let resp = match resp {
            Ok(r) => r,
            Err(ureq::Error::Status(code, r)) if code == 429 || code >= 500 => {
                return Err(BackendError::Transport(format!(
                    "HTTP {code}: {}",
                    r.into_string().unwrap_or_default()
                )))
            }
            Err(ureq::Error::Status(code, r)) => {
                return Err(BackendError::Fatal(format!(
                    "HTTP {code}: {}",
                    r.into_string().unwrap_or_default()
                )))
            }
            Err(e) => return Err(BackendError::Transport(e.to_string())),
        };
        let value: Value = resp
            .into_json()
            .map_err(|e| BackendError::Transport(format!("reading response: {e}")))?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| BackendError::Fatal("response has no choices[0].message.content".into()))
    }
}

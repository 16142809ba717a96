//! Deterministic backend that plays back canned replies.
//!
//! Script files are JSON. An array is played back in order regardless of
//! schema; an object keyed by schema name keeps one queue per schema, so
//! the same script serves runs that issue different numbers of calls.
//! Entries are strings (sent verbatim), `{"transport_error": "..."}`, or
//! any other JSON value (sent as compact JSON).
//!
//! A [`ScriptBook`] maps claim ids to scripts for batch runs:
//! `{"default": <script>, "claims": {"<id>": <script>}}`.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Mutex;

use serde_json::Value;

use super::{BackendError, ChatBackend, ChatRequest, Schema};

#[derive(Debug, thiserror::Error)]
pub enum ScriptError {
    #[error("script is empty")]
    Empty,
    #[error("invalid script: {0}")]
    Invalid(String),
    #[error("reading script {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScriptEntry {
    Reply(String),
    TransportError(String),
}

impl ScriptEntry {
    pub fn reply(text: impl Into<String>) -> ScriptEntry {
        ScriptEntry::Reply(text.into())
    }

    pub fn json(value: &Value) -> ScriptEntry {
        ScriptEntry::Reply(value.to_string())
    }

    fn from_value(v: &Value) -> ScriptEntry {
        match v {
            Value::String(s) => ScriptEntry::Reply(s.clone()),
            Value::Object(m) if m.len() == 1 && m.contains_key("transport_error") => {
                let msg = m["transport_error"].as_str().unwrap_or("transport error");
                ScriptEntry::TransportError(msg.to_string())
            }
            other => ScriptEntry::Reply(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Script {
    Ordered(Vec<ScriptEntry>),
    BySchema(BTreeMap<Schema, Vec<ScriptEntry>>),
}

impl Script {
    pub fn ordered(entries: Vec<ScriptEntry>) -> Result<Script, ScriptError> {
        if entries.is_empty() {
            return Err(ScriptError::Empty);
        }
        Ok(Script::Ordered(entries))
    }

    pub fn by_schema(queues: BTreeMap<Schema, Vec<ScriptEntry>>) -> Result<Script, ScriptError> {
        if queues.values().all(Vec::is_empty) {
            return Err(ScriptError::Empty);
        }
        Ok(Script::BySchema(queues))
    }

    pub fn from_value(value: &Value) -> Result<Script, ScriptError> {
        match value {
            Value::Array(items) => Script::ordered(items.iter().map(ScriptEntry::from_value).collect()),
            Value::Object(map) => {
                let mut queues = BTreeMap::new();
                for (k, v) in map {
                    let schema = Schema::parse(k)
                        .ok_or_else(|| ScriptError::Invalid(format!("unknown schema `{k}`")))?;
                    let items = v.as_array().ok_or_else(|| {
                        ScriptError::Invalid(format!("queue `{k}` must be an array"))
                    })?;
                    queues.insert(schema, items.iter().map(ScriptEntry::from_value).collect());
                }
                Script::by_schema(queues)
            }
            _ => Err(ScriptError::Invalid("script must be an array or an object".into())),
        }
    }

    pub fn from_json(json: &str) -> Result<Script, ScriptError> {
        let value: Value =
            serde_json::from_str(json).map_err(|e| ScriptError::Invalid(e.to_string()))?;
        Script::from_value(&value)
    }
}

#[derive(Debug, Default)]
struct Cursor {
    ordered: usize,
    by_schema: BTreeMap<Schema, usize>,
}

/// Plays back a [`Script`]. Exhaustion is an error, never a repeat.
#[derive(Debug)]
pub struct ScriptedBackend {
    script: Script,
    cursor: Mutex<Cursor>,
    calls: Mutex<Vec<ChatRequest>>,
}

impl ScriptedBackend {
    pub fn new(script: Script) -> ScriptedBackend {
        ScriptedBackend {
            script,
            cursor: Mutex::new(Cursor::default()),
            calls: Mutex::new(Vec::new()),
        }
    }

    /// Requests received so far, in order.
    pub fn calls(&self) -> Vec<ChatRequest> {
        self.calls.lock().expect("calls lock").clone()
    }

    fn next(&self, schema: Schema) -> Option<ScriptEntry> {
        let mut cursor = self.cursor.lock().expect("cursor lock");
        match &self.script {
            Script::Ordered(entries) => {
                let e = entries.get(cursor.ordered).cloned();
                cursor.ordered += 1;
                e
            }
            Script::BySchema(queues) => {
                let i = cursor.by_schema.entry(schema).or_default();
                let e = queues.get(&schema).and_then(|q| q.get(*i)).cloned();
                *i += 1;
                e
            }
        }
    }
}

impl ChatBackend for ScriptedBackend {
    fn provider_id(&self) -> &str {
        "scripted"
    }

    fn send(&self, request: &ChatRequest) -> Result<String, BackendError> {
        self.calls.lock().expect("calls lock").push(request.clone());
        match self.next(request.expected_schema) {
            Some(ScriptEntry::Reply(text)) => Ok(text),
            Some(ScriptEntry::TransportError(m)) => Err(BackendError::Transport(m)),
            None => Err(BackendError::Exhausted(request.expected_schema)),
        }
    }
}

/// Per-claim scripts for batch runs; each task gets a fresh playback.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ScriptBook {
    pub default: Option<Script>,
    pub claims: BTreeMap<String, Script>,
}

impl ScriptBook {
    pub fn single(script: Script) -> ScriptBook {
        ScriptBook {
            default: Some(script),
            claims: BTreeMap::new(),
        }
    }

    /// Script for `claim_id`, falling back to the default.
    pub fn for_claim(&self, claim_id: &str) -> Option<&Script> {
        self.claims.get(claim_id).or(self.default.as_ref())
    }

    /// Accepts either a book or a bare script (used as the default).
    pub fn from_json(json: &str) -> Result<ScriptBook, ScriptError> {
        let value: Value =
            serde_json::from_str(json).map_err(|e| ScriptError::Invalid(e.to_string()))?;
        let is_book = value
            .as_object()
            .is_some_and(|m| m.contains_key("default") || m.contains_key("claims"));
        if !is_book {
            return Ok(ScriptBook::single(Script::from_value(&value)?));
        }
        let mut book = ScriptBook::default();
        for (k, v) in value.as_object().expect("checked above") {
            match k.as_str() {
                "default" => book.default = Some(Script::from_value(v)?),
                "claims" => {
                    let map = v
                        .as_object()
                        .ok_or_else(|| ScriptError::Invalid("`claims` must be an object".into()))?;
                    for (id, s) in map {
                        book.claims.insert(id.clone(), Script::from_value(s)?);
                    }
                }
                other => {
                    return Err(ScriptError::Invalid(format!("unknown script book key `{other}`")))
                }
            }
        }
        Ok(book)
    }

    pub fn from_file(path: &Path) -> Result<ScriptBook, ScriptError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScriptError::Io {
            path: path.display().to_string(),
            source,
        })?;
        ScriptBook::from_json(&text)
    }
}

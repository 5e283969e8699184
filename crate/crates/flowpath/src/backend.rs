//! Chat-completion backends: a retrying HTTP client for hosted models,
//! plus deterministic scripted and cassette-replay backends for tests and
//! offline runs.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::toolkit::ToolCall;

const MAX_IMAGE_BYTES: usize = 8 * 1024 * 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    System,
    User,
    Assistant,
    Tool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageAttachment {
    pub media_type: String,
    /// Base64 payload, sent as a data URI.
    pub data: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub text: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub image: Option<ImageAttachment>,
    /// Binds a tool-role message to the call it answers.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tool_call_id: Option<String>,
}

impl Message {
    pub fn system(text: impl Into<String>) -> Self {
        Message {
            role: Role::System,
            text: text.into(),
            image: None,
            tool_call_id: None,
        }
    }
    pub fn user(text: impl Into<String>) -> Self {
        Message {
            role: Role::User,
            text: text.into(),
            image: None,
            tool_call_id: None,
        }
    }
    pub fn assistant(text: impl Into<String>) -> Self {
        Message {
            role: Role::Assistant,
            text: text.into(),
            image: None,
            tool_call_id: None,
        }
    }
    pub fn tool(call_id: impl Into<String>, text: impl Into<String>) -> Self {
        Message {
            role: Role::Tool,
            text: text.into(),
            image: None,
            tool_call_id: Some(call_id.into()),
        }
    }
    pub fn with_image(mut self, media_type: impl Into<String>, data: impl Into<String>) -> Self {
        self.image = Some(ImageAttachment {
            media_type: media_type.into(),
            data: data.into(),
        });
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub messages: Vec<Message>,
    pub tools: Value,
    #[serde(default)]
    pub decoding: Map<String, Value>,
}

/// One model reply: free text, a tool call, or both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatReply {
    #[serde(default)]
    pub text: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tool_call: Option<ToolCall>,
}

impl ChatReply {
    pub fn text_only(text: impl Into<String>) -> Self {
        ChatReply {
            text: text.into(),
            tool_call: None,
        }
    }
    pub fn call(tool: &str, arguments: Value) -> Self {
        ChatReply {
            text: String::new(),
            tool_call: Some(ToolCall {
                tool: tool.to_string(),
                arguments: arguments.as_object().cloned().unwrap_or_default(),
                call_id: format!("call_{tool}"),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendErrorKind {
    Transport,
    RateLimited,
    MalformedResponse,
    Timeout,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("backend error ({kind:?}): {detail}")]
pub struct BackendError {
    pub kind: BackendErrorKind,
    pub retriable: bool,
    pub detail: String,
}

impl BackendError {
    pub fn transport(detail: impl Into<String>) -> Self {
        BackendError {
            kind: BackendErrorKind::Transport,
            retriable: false,
            detail: detail.into(),
        }
    }
    pub fn rate_limited(detail: impl Into<String>) -> Self {
        BackendError {
            kind: BackendErrorKind::RateLimited,
            retriable: true,
            detail: detail.into(),
        }
    }
    pub fn timeout(detail: impl Into<String>) -> Self {
        BackendError {
            kind: BackendErrorKind::Timeout,
            retriable: true,
            detail: detail.into(),
        }
    }
    pub fn malformed(detail: impl Into<String>) -> Self {
        BackendError {
            kind: BackendErrorKind::MalformedResponse,
            retriable: false,
            detail: detail.into(),
        }
    }
}

pub trait ChatBackend: Send + Sync {
    fn chat(&self, request: &ChatRequest) -> Result<ChatReply, BackendError>;
}

/// Credential wrapper that never renders its contents.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct Secret(String);

impl Secret {
    pub fn new(value: impl Into<String>) -> Self {
        Secret(value.into())
    }
    pub fn expose(&self) -> &str {
        &self.0
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Debug for Secret {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Secret(***)")
    }
}

impl fmt::Display for Secret {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("***")
    }
}

#[derive(Debug, Clone)]
pub struct BackendConfig {
    pub endpoint: String,
    pub model: String,
    pub credential: Secret,
    pub timeout_secs: u64,
    pub max_retries: u32,
    pub concurrency: usize,
    /// Base backoff in milliseconds; production default is 1000.
    pub backoff_base_ms: u64,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            endpoint: String::new(),
            model: String::new(),
            credential: Secret::default(),
            timeout_secs: 60,
            max_retries: 3,
            concurrency: 4,
            backoff_base_ms: 1000,
        }
    }
}

impl BackendConfig {
    /// Merge environment variables over an optional TOML config file.
    pub fn from_env_and_file(path: Option<&Path>) -> Result<Self, BackendError> {
        let mut config = BackendConfig::default();
        if let Some(path) = path {
            let text = fs::read_to_string(path)
                .map_err(|e| BackendError::transport(format!("config file {path:?}: {e}")))?;
            let value: toml::Value = text
                .parse()
                .map_err(|e| BackendError::transport(format!("config file {path:?}: {e}")))?;
            if let Some(s) = value.get("endpoint").and_then(|v| v.as_str()) {
                config.endpoint = s.to_string();
            }
            if let Some(s) = value.get("model").and_then(|v| v.as_str()) {
                config.model = s.to_string();
            }
            if let Some(s) = value.get("credential").and_then(|v| v.as_str()) {
                config.credential = Secret::new(s);
            }
            if let Some(n) = value.get("timeout_secs").and_then(|v| v.as_integer()) {
                config.timeout_secs = n as u64;
            }
            if let Some(n) = value.get("max_retries").and_then(|v| v.as_integer()) {
                config.max_retries = n as u32;
            }
            if let Some(n) = value.get("concurrency").and_then(|v| v.as_integer()) {
                config.concurrency = n as usize;
            }
        }
        let env = |key: &str| std::env::var(key).ok().filter(|v| !v.is_empty());
        if let Some(v) = env("FLOWPATH_ENDPOINT") {
            config.endpoint = v;
        }
        if let Some(v) = env("FLOWPATH_MODEL") {
            config.model = v;
        }
        if let Some(v) = env("FLOWPATH_API_KEY") {
            config.credential = Secret::new(v);
        }
        if let Some(v) = env("FLOWPATH_TIMEOUT_SECS") {
            config.timeout_secs = v.parse().unwrap_or(config.timeout_secs);
        }
        if let Some(v) = env("FLOWPATH_MAX_RETRIES") {
            config.max_retries = v.parse().unwrap_or(config.max_retries);
        }
        if let Some(v) = env("FLOWPATH_CONCURRENCY") {
            config.concurrency = v.parse().unwrap_or(config.concurrency);
        }
        Ok(config)
    }
}

/// Counting semaphore bounding concurrent in-flight requests.
struct Limiter {
    permits: Mutex<usize>,
    cond: Condvar,
}

impl Limiter {
    fn new(permits: usize) -> Self {
        Limiter {
            permits: Mutex::new(permits.max(1)),
            cond: Condvar::new(),
        }
    }
    fn acquire(&self) {
        let mut permits = self.permits.lock().unwrap();
        while *permits == 0 {
            permits = self.cond.wait(permits).unwrap();
        }
        *permits -= 1;
    }
    fn release(&self) {
        *self.permits.lock().unwrap() += 1;
        self.cond.notify_one();
    }
}

/// Chat-completions HTTP client with exponential backoff on retriable
/// failures and a global concurrent-request limit.
pub struct HttpBackend {
    config: BackendConfig,
    client: reqwest::blocking::Client,
    limiter: Limiter,
}

impl HttpBackend {
    pub fn new(config: BackendConfig) -> Result<Self, BackendError> {
        if config.endpoint.is_empty() {
            return Err(BackendError::transport("no endpoint configured"));
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| BackendError::transport(e.to_string()))?;
        let limiter = Limiter::new(config.concurrency);
        Ok(HttpBackend {
            config,
            client,
            limiter,
        })
    }

    fn wire_request(&self, request: &ChatRequest) -> Result<Value, BackendError> {
        let mut messages = Vec::new();
        for message in &request.messages {
            let role = match message.role {
                Role::System => "system",
                Role::User => "user",
                Role::Assistant => "assistant",
                Role::Tool => "tool",
            };
            let mut obj = Map::new();
            obj.insert("role".into(), json!(role));
            match &message.image {
                Some(image) => {
                    if image.data.len() > MAX_IMAGE_BYTES {
                        return Err(BackendError::transport(format!(
                            "image attachment exceeds {MAX_IMAGE_BYTES} bytes; downscale before sending"
                        )));
                    }
                    obj.insert(
                        "content".into(),
                        json!([
                            {"type": "text", "text": message.text},
                            {"type": "image_url", "image_url": {
                                "url": format!("data:{};base64,{}", image.media_type, image.data)
                            }},
                        ]),
                    );
                }
                None => {
                    obj.insert("content".into(), json!(message.text));
                }
            }
            if let Some(id) = &message.tool_call_id {
                obj.insert("tool_call_id".into(), json!(id));
            }
            messages.push(Value::Object(obj));
        }
        let tools: Vec<Value> = request
            .tools
            .as_array()
            .cloned()
            .unwrap_or_default()
            .into_iter()
            .map(|schema| json!({"type": "function", "function": schema}))
            .collect();
        let mut body = Map::new();
        body.insert("model".into(), json!(self.config.model));
        body.insert("messages".into(), Value::Array(messages));
        if !tools.is_empty() {
            body.insert("tools".into(), Value::Array(tools));
        }
        if request.decoding.is_empty() {
            // Deterministic default; overridable through `decoding`.
            body.insert("temperature".into(), json!(0));
        } else {
            for (key, value) in &request.decoding {
                body.insert(key.clone(), value.clone());
            }
        }
        Ok(Value::Object(body))
    }

    fn send_once(&self, body: &Value) -> Result<ChatReply, BackendError> {
        let mut builder = self
            .client
            .post(&self.config.endpoint)
            .header("content-type", "application/json");
        if !self.config.credential.is_empty() {
            builder = builder.bearer_auth(self.config.credential.expose());
        }
        let response = builder.json(body).send().map_err(|e| {
            if e.is_timeout() {
                BackendError::timeout(e.to_string())
            } else {
                // reqwest errors embed the URL, never the auth header.
                BackendError::transport(e.to_string())
            }
        })?;
        let status = response.status();
        if status.as_u16() == 429 {
            return Err(BackendError::rate_limited(format!("http {status}")));
        }
        if status.is_server_error() {
            return Err(BackendError {
                kind: BackendErrorKind::Transport,
                retriable: true,
                detail: format!("http {status}"),
            });
        }
        if !status.is_success() {
            return Err(BackendError::transport(format!("http {status}")));
        }
        let payload: Value = response
            .json()
            .map_err(|e| BackendError::malformed(e.to_string()))?;
        parse_reply(&payload)
    }
}

impl ChatBackend for HttpBackend {
    fn chat(&self, request: &ChatRequest) -> Result<ChatReply, BackendError> {
        let body = self.wire_request(request)?;
        self.limiter.acquire();
        let result = (|| {
            let mut attempt = 0;
            loop {
                log::debug!(
                    "chat request attempt {attempt} to {} ({} messages)",
                    self.config.endpoint,
                    request.messages.len()
                );
                match self.send_once(&body) {
                    Ok(reply) => return Ok(reply),
                    Err(err) if err.retriable && attempt < self.config.max_retries => {
                        let backoff = self.config.backoff_base_ms << attempt;
                        let jitter = rand::thread_rng().gen_range(0..=backoff / 2 + 1);
                        log::debug!("retriable failure ({}); backing off {backoff}ms", err.detail);
                        std::thread::sleep(Duration::from_millis(backoff + jitter));
                        attempt += 1;
                    }
                    Err(err) => return Err(err),
                }
            }
        })();
        self.limiter.release();
        result
    }
}

/// Parse a chat-completions response. Tolerates both `tool_calls` arrays
/// and inline JSON in the text content.
pub fn parse_reply(payload: &Value) -> Result<ChatReply, BackendError> {
    let message = payload
        .pointer("/choices/0/message")
        .ok_or_else(|| BackendError::malformed("response has no choices[0].message"))?;
    let text = message
        .get("content")
        .and_then(|c| c.as_str())
        .unwrap_or_default()
        .to_string();
    if let Some(call) = message.pointer("/tool_calls/0") {
        let name = call
            .pointer("/function/name")
            .and_then(|v| v.as_str())
            .ok_or_else(|| BackendError::malformed("tool call without function name"))?;
        let raw_args = call
            .pointer("/function/arguments")
            .cloned()
            .unwrap_or(json!("{}"));
        let arguments = match raw_args {
            Value::String(s) => serde_json::from_str::<Value>(&s)
                .map_err(|e| BackendError::malformed(format!("tool arguments: {e}")))?,
            other => other,
        };
        let call_id = call
            .get("id")
            .and_then(|v| v.as_str())
            .unwrap_or("call_0")
            .to_string();
        return Ok(ChatReply {
            text,
            tool_call: Some(ToolCall {
                tool: name.to_string(),
                arguments: arguments.as_object().cloned().unwrap_or_default(),
                call_id,
            }),
        });
    }
    // Fallback: first JSON object embedded in the text.
    if let Some(call) = extract_inline_call(&text) {
        return Ok(ChatReply {
            text,
            tool_call: Some(call),
        });
    }
    Ok(ChatReply {
        text,
        tool_call: None,
    })
}

/// Scan text for the first balanced JSON object that looks like a tool
/// call (`{"name": ..., "arguments": ...}` or `{"tool": ...}`).
pub fn extract_inline_call(text: &str) -> Option<ToolCall> {
    let mut start = None;
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (i, c) in text.char_indices() {
        if in_string {
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_string = false;
            }
            continue;
        }
        match c {
            '"' => in_string = true,
            '{' => {
                if start.is_none() {
                    start = Some(i);
                }
                depth += 1;
            }
            '}' => {
                if depth > 0 {
                    depth -= 1;
                    if depth == 0 {
                        let candidate = &text[start.unwrap()..=i];
                        if let Ok(value) = serde_json::from_str::<Value>(candidate) {
                            let name = value
                                .get("name")
                                .or_else(|| value.get("tool"))
                                .and_then(|v| v.as_str());
                            if let Some(name) = name {
                                let arguments = value
                                    .get("arguments")
                                    .and_then(|v| v.as_object())
                                    .cloned()
                                    .unwrap_or_default();
                                return Some(ToolCall {
                                    tool: name.to_string(),
                                    arguments,
                                    call_id: "inline_0".to_string(),
                                });
                            }
                        }
                        start = None;
                    }
                }
            }
            _ => {}
        }
    }
    None
}

/// Deterministic backend that returns a fixed sequence of replies and logs
/// every request it sees.
pub struct ScriptedBackend {
    script: Mutex<VecDeque<ChatReply>>,
    requests: Mutex<Vec<ChatRequest>>,
}

impl ScriptedBackend {
    pub fn new(script: Vec<ChatReply>) -> Self {
        ScriptedBackend {
            script: Mutex::new(script.into()),
            requests: Mutex::new(Vec::new()),
        }
    }

    /// Requests received so far, for assertions.
    pub fn requests(&self) -> Vec<ChatRequest> {
        self.requests.lock().unwrap().clone()
    }
}

impl ChatBackend for ScriptedBackend {
    fn chat(&self, request: &ChatRequest) -> Result<ChatReply, BackendError> {
        self.requests.lock().unwrap().push(request.clone());
        self.script
            .lock()
            .unwrap()
            .pop_front()
            .ok_or_else(|| BackendError::transport("script exhausted"))
    }
}

fn request_digest(request: &ChatRequest) -> String {
    let bytes = serde_json::to_vec(request).unwrap();
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    format!("{:x}", hasher.finalize())
}

#[derive(Serialize, Deserialize)]
struct CassetteLine {
    request_digest: String,
    reply: ChatReply,
}

/// Wraps another backend and appends `{request_digest, reply}` JSON lines
/// to a cassette file for later replay.
pub struct RecordingBackend<B> {
    inner: B,
    path: PathBuf,
    sink: Mutex<()>,
}

impl<B: ChatBackend> RecordingBackend<B> {
    pub fn new(inner: B, path: impl Into<PathBuf>) -> Self {
        RecordingBackend {
            inner,
            path: path.into(),
            sink: Mutex::new(()),
        }
    }
}

impl<B: ChatBackend> ChatBackend for RecordingBackend<B> {
    fn chat(&self, request: &ChatRequest) -> Result<ChatReply, BackendError> {
        let reply = self.inner.chat(request)?;
        let line = CassetteLine {
            request_digest: request_digest(request),
            reply: reply.clone(),
        };
        let _guard = self.sink.lock().unwrap();
        let mut file = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .map_err(|e| BackendError::transport(format!("cassette: {e}")))?;
        writeln!(file, "{}", serde_json::to_string(&line).unwrap())
            .map_err(|e| BackendError::transport(format!("cassette: {e}")))?;
        Ok(reply)
    }
}

/// Replays a recorded cassette: each request is answered by the next
/// recorded reply for its digest.
pub struct ReplayBackend {
    replies: Mutex<HashMap<String, VecDeque<ChatReply>>>,
}

impl ReplayBackend {
    pub fn from_file(path: &Path) -> Result<Self, BackendError> {
        let text = fs::read_to_string(path)
            .map_err(|e| BackendError::transport(format!("cassette {path:?}: {e}")))?;
        let mut replies: HashMap<String, VecDeque<ChatReply>> = HashMap::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let parsed: CassetteLine = serde_json::from_str(line)
                .map_err(|e| BackendError::malformed(format!("cassette line: {e}")))?;
            replies
                .entry(parsed.request_digest)
                .or_default()
                .push_back(parsed.reply);
        }
        Ok(ReplayBackend {
            replies: Mutex::new(replies),
        })
    }
}

impl ChatBackend for ReplayBackend {
    fn chat(&self, request: &ChatRequest) -> Result<ChatReply, BackendError> {
        let digest = request_digest(request);
        self.replies
            .lock()
            .unwrap()
            .get_mut(&digest)
            .and_then(|queue| queue.pop_front())
            .ok_or_else(|| BackendError::transport(format!("no recorded reply for {digest}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn secret_never_renders() {
        let secret = Secret::new("sk-super-sensitive");
        assert_eq!(format!("{secret}"), "***");
        assert_eq!(format!("{secret:?}"), "Secret(***)");
    }

    #[test]
    fn parse_tool_call_reply() {
        let payload = json!({
            "choices": [{"message": {
                "content": null,
                "tool_calls": [{
                    "id": "call_1",
                    "function": {"name": "in_degree", "arguments": "{\"node_id\": \"A\"}"}
                }]
            }}]
        });
        let reply = parse_reply(&payload).unwrap();
        let call = reply.tool_call.unwrap();
        assert_eq!(call.tool, "in_degree");
        assert_eq!(call.arguments["node_id"], "A");
        assert_eq!(call.call_id, "call_1");
    }

    #[test]
    fn parse_inline_json_fallback() {
        let payload = json!({
            "choices": [{"message": {
                "content": "I will call {\"name\": \"bfs\", \"arguments\": {\"start_id\": \"A\"}} now"
            }}]
        });
        let reply = parse_reply(&payload).unwrap();
        let call = reply.tool_call.unwrap();
        assert_eq!(call.tool, "bfs");
        assert_eq!(call.arguments["start_id"], "A");
    }

    #[test]
    fn parse_plain_text_reply() {
        let payload = json!({"choices": [{"message": {"content": "Let me think."}}]});
        let reply = parse_reply(&payload).unwrap();
        assert!(reply.tool_call.is_none());
        assert_eq!(reply.text, "Let me think.");
    }

    #[test]
    fn parse_malformed_reply() {
        let err = parse_reply(&json!({"error": "nope"})).unwrap_err();
        assert_eq!(err.kind, BackendErrorKind::MalformedResponse);
    }

    #[test]
    fn scripted_backend_in_order_then_exhausts() {
        let backend = ScriptedBackend::new(vec![
            ChatReply::text_only("one"),
            ChatReply::text_only("two"),
        ]);
        let request = ChatRequest {
            messages: vec![Message::user("hi")],
            tools: json!([]),
            decoding: Map::new(),
        };
        assert_eq!(backend.chat(&request).unwrap().text, "one");
        assert_eq!(backend.chat(&request).unwrap().text, "two");
        assert!(backend.chat(&request).is_err());
        assert_eq!(backend.requests().len(), 3);
    }

    #[test]
    fn cassette_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cassette.jsonl");
        let backend = RecordingBackend::new(
            ScriptedBackend::new(vec![ChatReply::call("in_degree", json!({"node_id": "A"}))]),
            &path,
        );
        let request = ChatRequest {
            messages: vec![Message::user("q")],
            tools: json!([]),
            decoding: Map::new(),
        };
        let recorded = backend.chat(&request).unwrap();
        let replay = ReplayBackend::from_file(&path).unwrap();
        let replayed = replay.chat(&request).unwrap();
        assert_eq!(recorded, replayed);
        // A different request has no recorded reply.
        let other = ChatRequest {
            messages: vec![Message::user("different")],
            tools: json!([]),
            decoding: Map::new(),
        };
        assert!(replay.chat(&other).is_err());
    }
}

//! Language-model backends.
//!
//! Every agent talks to the model through [`LlmBackend::complete`] with a
//! system prompt, a user prompt and a description of the expected response.
//! Two implementations ship: [`ScriptedBackend`] replays canned responses
//! (golden tests, offline runs) and [`RemoteChatBackend`] calls a
//! chat-completion endpoint at temperature 0.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentRole {
    IntentAnalyzer,
    TriggerSelector,
    ActionSelector,
    BindingGenerator,
    Verifier,
}

impl AgentRole {
    pub fn as_str(self) -> &'static str {
        match self {
            AgentRole::IntentAnalyzer => "intent_analyzer",
            AgentRole::TriggerSelector => "trigger_selector",
            AgentRole::ActionSelector => "action_selector",
            AgentRole::BindingGenerator => "binding_generator",
            AgentRole::Verifier => "verifier",
        }
    }
}

impl fmt::Display for AgentRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct LlmRequest {
    pub role: AgentRole,
    /// The user query the pipeline is serving; scripted backends key on it.
    pub query: String,
    pub system: String,
    pub user: String,
    /// Human-readable description of the decision block the agent expects.
    pub response_schema: &'static str,
}

impl LlmRequest {
    /// SHA-256 over role, system prompt and user prompt.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.role.as_str().as_bytes());
        hasher.update([0]);
        hasher.update(self.system.as_bytes());
        hasher.update([0]);
        hasher.update(self.user.as_bytes());
        hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum BackendError {
    #[error("language model backend unreachable: {0}")]
    Unreachable(String),
    #[error("no scripted response for agent {0}")]
    NoScript(AgentRole),
    #[error("language model backend returned an unusable response: {0}")]
    BadResponse(String),
    #[error("invalid scripted backend file: {0}")]
    Script(String),
}

impl BackendError {
    /// Transport-level failures are surfaced; the rest fall back to the
    /// agent's deterministic behaviour.
    pub fn is_transport(&self) -> bool {
        matches!(self, BackendError::Unreachable(_))
    }
}

pub trait LlmBackend: Send + Sync {
    fn complete(&self, request: &LlmRequest) -> Result<String, BackendError>;
}

/// A canned response: either raw text, or a reasoning trace plus a decision
/// object that is rendered as a fenced JSON block.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
pub enum ScriptedResponse {
    Text(String),
    Structured {
        #[serde(default)]
        thinking: String,
        decision: serde_json::Value,
    },
}

impl ScriptedResponse {
    pub fn render(&self) -> String {
        match self {
            ScriptedResponse::Text(t) => t.clone(),
            ScriptedResponse::Structured { thinking, decision } => format!(
                "THINKING: {thinking}\n```json\n{}\n```",
                serde_json::to_string_pretty(decision).expect("JSON value serializes")
            ),
        }
    }
}

type Turns = BTreeMap<AgentRole, Vec<ScriptedResponse>>;

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Script {
    /// Per-agent responses used for any query without its own entry.
    #[serde(default)]
    pub default: Turns,
    /// Per-query, per-agent responses.
    #[serde(default)]
    pub queries: BTreeMap<String, Turns>,
    /// Exact responses keyed by request fingerprint; checked first.
    #[serde(default)]
    pub fingerprints: BTreeMap<String, ScriptedResponse>,
}

/// Replays responses from a [`Script`].
///
/// Each (query, agent) pair has its own cursor, so concurrent queries do not
/// interfere. Once an agent's list is used up its last response repeats.
pub struct ScriptedBackend {
    script: Script,
    cursors: Mutex<HashMap<(String, AgentRole), usize>>,
}

impl ScriptedBackend {
    pub fn new(script: Script) -> Self {
        ScriptedBackend {
            script,
            cursors: Mutex::new(HashMap::new()),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, BackendError> {
        let script = serde_json::from_str(text).map_err(|e| BackendError::Script(e.to_string()))?;
        Ok(Self::new(script))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, BackendError> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| BackendError::Script(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_json(&text)
    }
}

impl LlmBackend for ScriptedBackend {
    fn complete(&self, request: &LlmRequest) -> Result<String, BackendError> {
        if let Some(resp) = self.script.fingerprints.get(&request.fingerprint()) {
            return Ok(resp.render());
        }
        let turns = self
            .script
            .queries
            .get(&request.query)
            .and_then(|t| t.get(&request.role))
            .or_else(|| self.script.default.get(&request.role))
            .filter(|t| !t.is_empty())
            .ok_or(BackendError::NoScript(request.role))?;
        let mut cursors = self.cursors.lock().expect("cursor lock poisoned");
        let cursor = cursors
            .entry((request.query.clone(), request.role))
            .or_insert(0);
        let resp = &turns[(*cursor).min(turns.len() - 1)];
        *cursor += 1;
        Ok(resp.render())
    }
}

#[derive(Debug, Clone)]
pub struct RemoteChatConfig {
    pub url: String,
    pub model: String,
    pub token: Option<String>,
    pub max_in_flight: usize,
    pub retries: usize,
    pub timeout: Duration,
}

impl RemoteChatConfig {
    pub fn new(url: impl Into<String>, model: impl Into<String>) -> Self {
        RemoteChatConfig {
            url: url.into(),
            model: model.into(),
            token: None,
            max_in_flight: 4,
            retries: 2,
            timeout: Duration::from_secs(120),
        }
    }
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: [ChatMessage<'a>; 2],
    temperature: f64,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatReply,
}

#[derive(Deserialize)]
struct ChatReply {
    content: String,
}

/// Chat-completion client (`{model, messages, temperature: 0}` →
/// `choices[0].message.content`) with a cap on concurrent requests.
pub struct RemoteChatBackend {
    config: RemoteChatConfig,
    agent: ureq::Agent,
    in_flight: Mutex<usize>,
    slot_freed: Condvar,
}

impl RemoteChatBackend {
    pub fn new(config: RemoteChatConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .build()
            .into();
        RemoteChatBackend {
            config,
            agent,
            in_flight: Mutex::new(0),
            slot_freed: Condvar::new(),
        }
    }

    fn acquire(&self) {
        let cap = self.config.max_in_flight.max(1);
        let mut n = self.in_flight.lock().unwrap();
        while *n >= cap {
            n = self.slot_freed.wait(n).unwrap();
        }
        *n += 1;
    }

    fn release(&self) {
        *self.in_flight.lock().unwrap() -= 1;
        self.slot_freed.notify_one();
    }

    fn send(&self, request: &LlmRequest) -> Result<String, BackendError> {
        let body = ChatRequest {
            model: &self.config.model,
            messages: [
                ChatMessage {
                    role: "system",
                    content: &request.system,
                },
                ChatMessage {
                    role: "user",
                    content: &request.user,
                },
            ],
            temperature: 0.0,
        };
        let mut last_err = String::new();
        for _ in 0..=self.config.retries {
            let mut req = self.agent.post(&self.config.url);
            if let Some(token) = &self.config.token {
                req = req.header("Authorization", &format!("Bearer {token}"));
            }
            match req.send_json(&body) {
                Ok(mut resp) => {
                    let parsed: ChatResponse = resp
                        .body_mut()
                        .read_json()
                        .map_err(|e| BackendError::BadResponse(e.to_string()))?;
                    return parsed
                        .choices
                        .into_iter()
                        .next()
                        .map(|c| c.message.content)
                        .ok_or_else(|| BackendError::BadResponse("no choices".into()));
                }
                Err(ureq::Error::StatusCode(code)) if code < 500 => {
                    return Err(BackendError::BadResponse(format!("HTTP status {code}")));
                }
                Err(e) => last_err = e.to_string(),
            }
        }
        Err(BackendError::Unreachable(last_err))
    }
}

impl LlmBackend for RemoteChatBackend {
    fn complete(&self, request: &LlmRequest) -> Result<String, BackendError> {
        self.acquire();
        let out = self.send(request);
        self.release();
        out
    }
}

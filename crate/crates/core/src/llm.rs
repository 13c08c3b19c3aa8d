//! Language-model backends behind one trait: a remote chat-completion
//! client, a content-addressed replay store, and scripted mocks.

use std::fs;
use std::path::{Path, PathBuf};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LlmError {
    #[error("transport failure after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("backend returned HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("malformed backend response: {0}")]
    Protocol(String),
    #[error("no replay entry for prompt {0}")]
    ReplayMiss(String),
    #[error("replay store: {0}")]
    Store(String),
    #[error("backend configuration: {0}")]
    Config(String),
    #[error("scripted backend exhausted after {0} call(s)")]
    Exhausted(usize),
    #[error("invalid prompt: {0}")]
    InvalidPrompt(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knobs {
    pub temperature: f64,
    pub model_id: String,
    pub max_output_tokens: u32,
}

impl Default for Knobs {
    fn default() -> Self {
        Knobs {
            temperature: 0.0,
            model_id: "gpt-4o-mini-2024-07-18".into(),
            max_output_tokens: 1024,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub system: String,
    pub user: String,
    pub knobs: Knobs,
}

impl PromptBundle {
    pub fn new(system: impl Into<String>, user: impl Into<String>, knobs: Knobs) -> Self {
        PromptBundle {
            system: system.into(),
            user: user.into(),
            knobs,
        }
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        if self.system.trim().is_empty() || self.user.trim().is_empty() {
            return Err(LlmError::InvalidPrompt(
                "system and user text must be non-empty".into(),
            ));
        }
        if self.knobs.temperature.is_nan() || self.knobs.temperature < 0.0 {
            return Err(LlmError::InvalidPrompt(format!(
                "temperature {} is negative",
                self.knobs.temperature
            )));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON encoding of system, user, and knobs.
    pub fn key(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("prompt bundles always serialize");
        hex::encode(Sha256::digest(&canonical))
    }
}

pub trait LlmBackend {
    /// Returns the raw completion text for one prompt.
    fn complete(&mut self, prompt: &PromptBundle) -> Result<String, LlmError>;
}

impl<B: LlmBackend + ?Sized> LlmBackend for &mut B {
    fn complete(&mut self, prompt: &PromptBundle) -> Result<String, LlmError> {
        (**self).complete(prompt)
    }
}

impl<B: LlmBackend + ?Sized> LlmBackend for Box<B> {
    fn complete(&mut self, prompt: &PromptBundle) -> Result<String, LlmError> {
        (**self).complete(prompt)
    }
}

/// One stored exchange. The prompt is kept alongside the response so a
/// store can be audited and so key collisions are detected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayEntry {
    pub key: String,
    pub prompt: PromptBundle,
    pub response: String,
}

/// Directory of `<key>.json` files.
#[derive(Debug, Clone)]
pub struct ReplayStore {
    dir: PathBuf,
}

impl ReplayStore {
    pub fn open(dir: impl Into<PathBuf>) -> Self {
        ReplayStore { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn get(&self, prompt: &PromptBundle) -> Result<Option<String>, LlmError> {
        let key = prompt.key();
        let path = self.path(&key);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(LlmError::Store(format!("{}: {e}", path.display()))),
        };
        let entry: ReplayEntry = serde_json::from_str(&text)
            .map_err(|e| LlmError::Store(format!("{}: {e}", path.display())))?;
        if entry.prompt != *prompt {
            return Err(LlmError::Store(format!(
                "{}: stored prompt differs from request",
                path.display()
            )));
        }
        Ok(Some(entry.response))
    }

    pub fn put(&self, prompt: &PromptBundle, response: &str) -> Result<PathBuf, LlmError> {
        fs::create_dir_all(&self.dir)
            .map_err(|e| LlmError::Store(format!("{}: {e}", self.dir.display())))?;
        let entry = ReplayEntry {
            key: prompt.key(),
            prompt: prompt.clone(),
            response: response.to_string(),
        };
        let path = self.path(&entry.key);
        let json =
            serde_json::to_string_pretty(&entry).map_err(|e| LlmError::Store(e.to_string()))?;
        fs::write(&path, json + "\n")
            .map_err(|e| LlmError::Store(format!("{}: {e}", path.display())))?;
        Ok(path)
    }

    pub fn len(&self) -> usize {
        fs::read_dir(&self.dir)
            .map(|rd| {
                rd.filter_map(Result::ok)
                    .filter(|e| e.path().extension().is_some_and(|x| x == "json"))
                    .count()
            })
            .unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Answers only from the store; a miss is an error, never a guess.
#[derive(Debug, Clone)]
pub struct ReplayBackend {
    store: ReplayStore,
    calls: usize,
}

impl ReplayBackend {
    pub fn new(store: ReplayStore) -> Self {
        ReplayBackend { store, calls: 0 }
    }

    pub fn calls(&self) -> usize {
        self.calls
    }
}

impl LlmBackend for ReplayBackend {
    fn complete(&mut self, prompt: &PromptBundle) -> Result<String, LlmError> {
        prompt.validate()?;
        self.calls += 1;
        self.store
            .get(prompt)?
            .ok_or_else(|| LlmError::ReplayMiss(prompt.key()))
    }
}

/// Forwards to `inner` and writes every exchange to the store.
pub struct RecordingBackend<B> {
    inner: B,
    store: ReplayStore,
}

impl<B: LlmBackend> RecordingBackend<B> {
    pub fn new(inner: B, store: ReplayStore) -> Self {
        RecordingBackend { inner, store }
    }

    pub fn into_inner(self) -> B {
        self.inner
    }
}

impl<B: LlmBackend> LlmBackend for RecordingBackend<B> {
    fn complete(&mut self, prompt: &PromptBundle) -> Result<String, LlmError> {
        let response = self.inner.complete(prompt)?;
        self.store.put(prompt, &response)?;
        Ok(response)
    }
}

type Script = Box<dyn FnMut(&PromptBundle) -> Result<String, LlmError> + Send>;

/// Test double driven by a closure or a fixed response sequence.
pub struct ScriptedBackend {
    script: Script,
    calls: usize,
    prompts: Vec<PromptBundle>,
}

impl ScriptedBackend {
    pub fn from_fn<F>(f: F) -> Self
    where
        F: FnMut(&PromptBundle) -> Result<String, LlmError> + Send + 'static,
    {
        ScriptedBackend {
            script: Box::new(f),
            calls: 0,
            prompts: Vec::new(),
        }
    }

    /// Returns the responses in order, then fails with `Exhausted`.
    pub fn sequence<I, S>(responses: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut queue: std::collections::VecDeque<String> =
            responses.into_iter().map(Into::into).collect();
        let mut served = 0usize;
        Self::from_fn(move |_| {
            let r = queue.pop_front().ok_or(LlmError::Exhausted(served));
            served += 1;
            r
        })
    }

    pub fn calls(&self) -> usize {
        self.calls
    }

    pub fn prompts(&self) -> &[PromptBundle] {
        &self.prompts
    }
}

impl LlmBackend for ScriptedBackend {
    fn complete(&mut self, prompt: &PromptBundle) -> Result<String, LlmError> {
        prompt.validate()?;
        self.calls += 1;
        self.prompts.push(prompt.clone());
        (self.script)(prompt)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RemoteConfig {
    /// Base URL of an OpenAI-compatible API, e.g. `https://api.openai.com/v1`.
    pub base_url: String,
    /// Environment variable holding the bearer token.
    pub api_key_env: String,
    pub timeout_secs: u64,
    /// Total attempts for transport failures. HTTP errors are never retried.
    pub max_attempts: u32,
    pub retry_backoff_ms: u64,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        RemoteConfig {
            base_url: "https://api.openai.com/v1".into(),
            api_key_env: "OPENAI_API_KEY".into(),
            timeout_secs: 120,
            max_attempts: 3,
            retry_backoff_ms: 500,
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
    temperature: f64,
    max_tokens: u32,
    messages: [ChatMessage<'a>; 2],
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
    #[serde(default)]
    content: Option<String>,
}

/// Chat-completion client. One request per prompt; only connection-level
/// failures are retried, so a response is never re-sampled.
pub struct RemoteBackend {
    agent: ureq::Agent,
    config: RemoteConfig,
    api_key: String,
}

impl RemoteBackend {
    pub fn new(config: RemoteConfig) -> Result<Self, LlmError> {
        let api_key = std::env::var(&config.api_key_env).map_err(|_| {
            LlmError::Config(format!(
                "environment variable {} is not set",
                config.api_key_env
            ))
        })?;
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(RemoteBackend {
            agent,
            config,
            api_key,
        })
    }

    fn is_transport(e: &ureq::Error) -> bool {
        matches!(
            e,
            ureq::Error::Io(_)
                | ureq::Error::Timeout(_)
                | ureq::Error::HostNotFound
                | ureq::Error::ConnectionFailed
        )
    }
}

impl LlmBackend for RemoteBackend {
    fn complete(&mut self, prompt: &PromptBundle) -> Result<String, LlmError> {
        prompt.validate()?;
        let url = format!(
            "{}/chat/completions",
            self.config.base_url.trim_end_matches('/')
        );
        let body = ChatRequest {
            model: &prompt.knobs.model_id,
            temperature: prompt.knobs.temperature,
            max_tokens: prompt.knobs.max_output_tokens,
            messages: [
                ChatMessage {
                    role: "system",
                    content: &prompt.system,
                },
                ChatMessage {
                    role: "user",
                    content: &prompt.user,
                },
            ],
        };
        let attempts = self.config.max_attempts.max(1);
        let mut last = String::new();
        for attempt in 1..=attempts {
            let sent = self
                .agent
                .post(&url)
                .header("Authorization", &format!("Bearer {}", self.api_key))
                .send_json(&body);
            let mut resp = match sent {
                Ok(r) => r,
                Err(e) if Self::is_transport(&e) => {
                    log::warn!("chat request attempt {attempt}/{attempts} failed: {e}");
                    last = e.to_string();
                    if attempt < attempts {
                        thread::sleep(Duration::from_millis(
                            self.config.retry_backoff_ms * attempt as u64,
                        ));
                    }
                    continue;
                }
                Err(e) => return Err(LlmError::Protocol(e.to_string())),
            };
            let status = resp.status().as_u16();
            if status != 200 {
                let body = resp.body_mut().read_to_string().unwrap_or_default();
                return Err(LlmError::Http { status, body });
            }
            let parsed: ChatResponse = resp
                .body_mut()
                .read_json()
                .map_err(|e| LlmError::Protocol(e.to_string()))?;
            return parsed
                .choices
                .into_iter()
                .next()
                .and_then(|c| c.message.content)
                .ok_or_else(|| LlmError::Protocol("response has no message content".into()));
        }
        Err(LlmError::Transport {
            attempts,
            message: last,
        })
    }
}

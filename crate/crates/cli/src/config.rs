use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use peano_tutor::lean_bridge::ReplConfig;
use peano_tutor::llm::{Knobs, RemoteConfig};
use peano_tutor::next_step::SearchConfig;

/// Prefix of every environment variable read by `Config::apply_env`.
pub const ENV_PREFIX: &str = "PEANO_TUTOR_";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {reason}")]
    Read { path: PathBuf, reason: String },
    #[error("{name}: {reason}")]
    Env { name: String, reason: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    /// Chat-completion API; the only kind that needs credentials.
    Remote,
    /// Recorded responses keyed by prompt hash.
    Replay,
    /// Deterministic answers read off the annotated corpus.
    Mock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckerKind {
    /// Recorded checker results; no Lean toolchain needed.
    Fixtures,
    /// A Lean REPL started in `lean_project_root`.
    Repl,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub backend: BackendKind,
    pub model_id: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
    /// Directory holding `manifest.json` and `descriptions.toml`.
    pub dataset_root: PathBuf,
    pub replay_dir: PathBuf,
    pub checker: CheckerKind,
    pub checker_fixtures: PathBuf,
    pub lean_project_root: PathBuf,
    pub repl: ReplConfig,
    pub remote: RemoteConfig,
    /// Include the staff solution in autoformalization prompts.
    pub staff_solution: bool,
    /// Branching and depth; forbidden theorems and world premises are
    /// added per theorem from the corpus.
    pub search: SearchConfig,
    pub journal: PathBuf,
}

impl Default for Config {
    fn default() -> Self {
        let knobs = Knobs::default();
        Config {
            backend: BackendKind::Mock,
            model_id: knobs.model_id,
            temperature: knobs.temperature,
            max_output_tokens: knobs.max_output_tokens,
            dataset_root: PathBuf::from("fixtures/corpus"),
            replay_dir: PathBuf::from("fixtures/replay"),
            checker: CheckerKind::Fixtures,
            checker_fixtures: PathBuf::from("fixtures/checker.jsonl"),
            lean_project_root: PathBuf::from("."),
            repl: ReplConfig::default(),
            remote: RemoteConfig::default(),
            staff_solution: true,
            search: SearchConfig::default(),
            journal: PathBuf::from("sessions.jsonl"),
        }
    }
}

impl Config {
    /// Reads a TOML file. Relative paths in it are taken relative to the file.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let read_err = |reason: String| ConfigError::Read {
            path: path.to_path_buf(),
            reason,
        };
        let text = std::fs::read_to_string(path).map_err(|e| read_err(e.to_string()))?;
        let mut config: Config = toml::from_str(&text).map_err(|e| read_err(e.to_string()))?;
        if let Some(base) = path.parent() {
            config.rebase(base);
        }
        Ok(config)
    }

    fn rebase(&mut self, base: &Path) {
        for p in [
            &mut self.dataset_root,
            &mut self.replay_dir,
            &mut self.checker_fixtures,
            &mut self.lean_project_root,
            &mut self.journal,
        ] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    /// Overrides fields from `PEANO_TUTOR_*` variables as returned by `lookup`.
    pub fn apply_env<F>(&mut self, lookup: F) -> Result<(), ConfigError>
    where
        F: Fn(&str) -> Option<String>,
    {
        let get = |key: &str| lookup(&format!("{ENV_PREFIX}{key}"));
        let bad = |key: &str, reason: String| ConfigError::Env {
            name: format!("{ENV_PREFIX}{key}"),
            reason,
        };
        if let Some(v) = get("BACKEND") {
            self.backend = serde_json::from_value(serde_json::Value::String(v.to_lowercase()))
                .map_err(|_| {
                    bad(
                        "BACKEND",
                        format!("expected remote, replay or mock, got {v:?}"),
                    )
                })?;
        }
        if let Some(v) = get("CHECKER") {
            self.checker = serde_json::from_value(serde_json::Value::String(v.to_lowercase()))
                .map_err(|_| bad("CHECKER", format!("expected fixtures or repl, got {v:?}")))?;
        }
        if let Some(v) = get("MODEL") {
            self.model_id = v;
        }
        if let Some(v) = get("TEMPERATURE") {
            self.temperature = v.parse().map_err(|e| bad("TEMPERATURE", format!("{e}")))?;
        }
        if let Some(v) = get("API_KEY_ENV") {
            self.remote.api_key_env = v;
        }
        if let Some(v) = get("BASE_URL") {
            self.remote.base_url = v;
        }
        for (key, slot) in [
            ("DATASET_ROOT", &mut self.dataset_root),
            ("REPLAY_DIR", &mut self.replay_dir),
            ("CHECKER_FIXTURES", &mut self.checker_fixtures),
            ("LEAN_PROJECT_ROOT", &mut self.lean_project_root),
            ("JOURNAL", &mut self.journal),
        ] {
            if let Some(v) = get(key) {
                *slot = PathBuf::from(v);
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(ConfigError::Invalid(format!(
                "temperature {} outside [0, 2]",
                self.temperature
            )));
        }
        if self.model_id.trim().is_empty() {
            return Err(ConfigError::Invalid("model_id is empty".into()));
        }
        self.search
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn knobs(&self) -> Knobs {
        Knobs {
            temperature: self.temperature,
            model_id: self.model_id.clone(),
            max_output_tokens: self.max_output_tokens,
        }
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.dataset_root.join("manifest.json")
    }

    pub fn descriptions_path(&self) -> PathBuf {
        self.dataset_root.join("descriptions.toml")
    }
}

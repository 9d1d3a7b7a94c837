use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Deserialize;

use super::AgentError;

pub const ENV_API_URL: &str = "ASMPROP_API_URL";
pub const ENV_API_KEY: &str = "ASMPROP_API_KEY";
pub const ENV_MODEL: &str = "ASMPROP_MODEL";

pub const DEFAULT_ENDPOINT: &str = "https://api.openai.com/v1/chat/completions";
pub const DEFAULT_MODEL: &str = "gpt-4o-mini";

#[derive(Debug, Clone, PartialEq)]
pub enum BackendKind {
    Live,
    /// Directory holding `index.json` and the response files it lists.
    Replay(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentConfig {
    /// Full chat-completions URL.
    pub endpoint: String,
    pub model: String,
    pub api_key: Option<String>,
    pub temperature: f64,
    pub max_iterations: u32,
    pub timeout: Duration,
    pub backend: BackendKind,
    /// Model-check a well-typed candidate and feed one failing verdict back.
    pub semantic_repair: bool,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            endpoint: DEFAULT_ENDPOINT.into(),
            model: DEFAULT_MODEL.into(),
            api_key: None,
            temperature: 0.0,
            max_iterations: 3,
            timeout: Duration::from_secs(60),
            backend: BackendKind::Live,
            semantic_repair: false,
        }
    }
}

impl AgentConfig {
    pub fn replay(dir: impl Into<PathBuf>) -> Self {
        AgentConfig { backend: BackendKind::Replay(dir.into()), ..AgentConfig::default() }
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        if self.max_iterations < 1 {
            return Err(AgentError::InvalidConfig("max iterations must be at least 1".into()));
        }
        if self.temperature.is_nan() || self.temperature < 0.0 {
            return Err(AgentError::InvalidConfig("temperature must be non-negative".into()));
        }
        if self.backend == BackendKind::Live && self.endpoint.trim().is_empty() {
            return Err(AgentError::InvalidConfig("empty endpoint".into()));
        }
        Ok(())
    }

    /// Applies values from a config file, then from the environment.
    /// Command-line flags are applied by the caller afterwards.
    pub fn layered(file: Option<&ConfigFile>, env: impl Fn(&str) -> Option<String>) -> Self {
        let mut c = AgentConfig::default();
        if let Some(f) = file {
            f.apply(&mut c);
        }
        if let Some(v) = env(ENV_API_URL) {
            c.endpoint = v;
        }
        if let Some(v) = env(ENV_MODEL) {
            c.model = v;
        }
        if let Some(v) = env(ENV_API_KEY) {
            c.api_key = Some(v);
        }
        c
    }
}

/// `asmprop.toml` contents. Every key is optional.
#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub temperature: Option<f64>,
    pub max_iterations: Option<u32>,
    pub timeout_secs: Option<u64>,
    /// `"live"` or `"replay"`.
    pub backend: Option<String>,
    pub fixtures: Option<PathBuf>,
    pub semantic_repair: Option<bool>,
    pub max_states: Option<usize>,
    pub max_time_secs: Option<u64>,
    pub ltl_bound: Option<usize>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<ConfigFile, AgentError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AgentError::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| AgentError::InvalidConfig(format!("{}: {e}", path.display())))
    }

    fn apply(&self, c: &mut AgentConfig) {
        if let Some(v) = &self.endpoint {
            c.endpoint = v.clone();
        }
        if let Some(v) = &self.model {
            c.model = v.clone();
        }
        if let Some(v) = self.temperature {
            c.temperature = v;
        }
        if let Some(v) = self.max_iterations {
            c.max_iterations = v;
        }
        if let Some(v) = self.timeout_secs {
            c.timeout = Duration::from_secs(v);
        }
        if let Some(v) = self.semantic_repair {
            c.semantic_repair = v;
        }
        match (self.backend.as_deref(), &self.fixtures) {
            (Some("replay"), Some(dir)) => c.backend = BackendKind::Replay(dir.clone()),
            (Some("live"), _) => c.backend = BackendKind::Live,
            _ => {}
        }
    }
}

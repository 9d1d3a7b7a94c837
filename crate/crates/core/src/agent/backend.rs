//! Completion backends: a chat-completions HTTP client and a scripted
//! replay of fixture files.

use std::collections::VecDeque;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use super::{AgentConfig, AgentError, BackendKind};

const SYSTEM_PROMPT: &str =
    "You help engineers write, check and explain temporal properties of Asmeta (AsmetaL) specifications.";

pub trait CompletionBackend: Send {
    fn complete(&mut self, prompt: &str) -> Result<String, AgentError>;
}

pub fn prompt_digest(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

pub fn backend_for(config: &AgentConfig) -> Result<Box<dyn CompletionBackend>, AgentError> {
    config.validate()?;
    Ok(match &config.backend {
        BackendKind::Live => Box::new(LiveBackend::new(config)),
        BackendKind::Replay(dir) => Box::new(ReplayBackend::load(dir)?),
    })
}

/// One request per call; never retried.
pub struct LiveBackend {
    agent: ureq::Agent,
    endpoint: String,
    model: String,
    api_key: Option<String>,
    temperature: f64,
}

impl LiveBackend {
    pub fn new(config: &AgentConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        LiveBackend {
            agent,
            endpoint: config.endpoint.clone(),
            model: config.model.clone(),
            api_key: config.api_key.clone(),
            temperature: config.temperature,
        }
    }
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChatMessage,
}

#[derive(Deserialize)]
struct ChatMessage {
    content: Option<String>,
}

impl CompletionBackend for LiveBackend {
    fn complete(&mut self, prompt: &str) -> Result<String, AgentError> {
        let body = json!({
            "model": self.model,
            "temperature": self.temperature,
            "n": 1,
            "messages": [
                {"role": "system", "content": SYSTEM_PROMPT},
                {"role": "user", "content": prompt},
            ],
        });
        let mut req = self.agent.post(&self.endpoint).header("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req.send_json(&body).map_err(|e| match e {
            ureq::Error::Timeout(_) => AgentError::Timeout { endpoint: self.endpoint.clone() },
            other => AgentError::Network { endpoint: self.endpoint.clone(), message: other.to_string() },
        })?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| AgentError::Network { endpoint: self.endpoint.clone(), message: e.to_string() })?;
        if !(200..300).contains(&status) {
            return Err(AgentError::HttpStatus { status, body: text });
        }
        let parsed: ChatResponse = serde_json::from_str(&text)
            .map_err(|e| AgentError::Network { endpoint: self.endpoint.clone(), message: format!("malformed response: {e}") })?;
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| AgentError::Network { endpoint: self.endpoint.clone(), message: "response has no choices".into() })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReplayMode {
    /// Responses are served in order.
    #[default]
    Sequence,
    /// Each response is served for the prompt whose SHA-256 it names.
    Exact,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FixtureIndex {
    #[serde(default)]
    pub mode: ReplayMode,
    pub responses: Vec<FixtureEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixtureEntry {
    pub file: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_sha256: Option<String>,
}

pub struct ReplayBackend {
    mode: ReplayMode,
    pending: VecDeque<(Option<String>, String)>,
    served: usize,
}

impl ReplayBackend {
    pub fn new(responses: impl IntoIterator<Item = impl Into<String>>) -> Self {
        ReplayBackend {
            mode: ReplayMode::Sequence,
            pending: responses.into_iter().map(|r| (None, r.into())).collect(),
            served: 0,
        }
    }

    pub fn load(dir: &Path) -> Result<Self, AgentError> {
        let index_path = dir.join("index.json");
        let text = std::fs::read_to_string(&index_path)
            .map_err(|e| AgentError::Fixture(format!("cannot read {}: {e}", index_path.display())))?;
        let index: FixtureIndex = serde_json::from_str(&text)
            .map_err(|e| AgentError::Fixture(format!("{}: {e}", index_path.display())))?;
        let mut pending = VecDeque::new();
        for entry in index.responses {
            let path = dir.join(&entry.file);
            let body = std::fs::read_to_string(&path)
                .map_err(|e| AgentError::Fixture(format!("cannot read {}: {e}", path.display())))?;
            pending.push_back((entry.prompt_sha256, body));
        }
        Ok(ReplayBackend { mode: index.mode, pending, served: 0 })
    }

    /// Writes responses as a fixture directory that [`ReplayBackend::load`]
    /// reads back.
    pub fn save(dir: &Path, mode: ReplayMode, responses: &[(Option<String>, String)]) -> Result<(), AgentError> {
        let io = |e: std::io::Error| AgentError::Fixture(format!("cannot write fixtures: {e}"));
        std::fs::create_dir_all(dir).map_err(io)?;
        let mut index = FixtureIndex { mode, responses: Vec::new() };
        for (i, (digest, body)) in responses.iter().enumerate() {
            let file = format!("{:03}.txt", i + 1);
            std::fs::write(dir.join(&file), body).map_err(io)?;
            index.responses.push(FixtureEntry { file, prompt_sha256: digest.clone() });
        }
        let json = serde_json::to_string_pretty(&index).expect("index serializes");
        std::fs::write(dir.join("index.json"), json).map_err(io)
    }

    pub fn remaining(&self) -> usize {
        self.pending.len()
    }
}

impl CompletionBackend for ReplayBackend {
    fn complete(&mut self, prompt: &str) -> Result<String, AgentError> {
        let next = match self.mode {
            ReplayMode::Sequence => self.pending.pop_front(),
            ReplayMode::Exact => {
                let digest = prompt_digest(prompt);
                match self.pending.iter().position(|(d, _)| d.as_deref() == Some(digest.as_str())) {
                    Some(i) => self.pending.remove(i),
                    None if self.pending.is_empty() => None,
                    None => return Err(AgentError::FixtureMissing { digest }),
                }
            }
        };
        let (_, body) = next.ok_or(AgentError::FixtureExhausted { served: self.served })?;
        self.served += 1;
        Ok(body)
    }
}

use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use serde::Serialize;

use super::backend::{prompt_digest, ReplayBackend, ReplayMode};
use super::AgentError;
use crate::bridge::write_atomic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    User,
    Agent,
    Checker,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TranscriptEntry {
    pub role: Role,
    pub content: String,
    pub timestamp: String,
    pub iteration: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum Artifact {
    Formula { text: String, logic: String },
    Text(String),
    Properties(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentTranscript {
    pub task: String,
    pub started: String,
    pub entries: Vec<TranscriptEntry>,
    /// Warnings and classification results that are not part of the
    /// exchange itself.
    pub notes: Vec<String>,
    pub final_artifact: Option<Artifact>,
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

#[derive(Serialize)]
#[serde(tag = "record", rename_all = "kebab-case")]
enum Record<'a> {
    Session { task: &'a str, started: &'a str },
    Note { text: &'a str },
    Entry(&'a TranscriptEntry),
    Artifact { artifact: &'a Option<Artifact> },
}

impl AgentTranscript {
    pub fn new(task: &str) -> Self {
        AgentTranscript { task: task.into(), started: now(), entries: Vec::new(), notes: Vec::new(), final_artifact: None }
    }

    pub fn push(&mut self, role: Role, content: impl Into<String>, iteration: u32) {
        self.entries.push(TranscriptEntry { role, content: content.into(), timestamp: now(), iteration });
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn entries_by(&self, role: Role) -> impl Iterator<Item = &TranscriptEntry> {
        self.entries.iter().filter(move |e| e.role == role)
    }

    /// Backend calls recorded so far.
    pub fn calls(&self) -> usize {
        self.entries_by(Role::Agent).count()
    }

    pub fn to_jsonl(&self) -> String {
        let mut records = vec![Record::Session { task: &self.task, started: &self.started }];
        records.extend(self.notes.iter().map(|n| Record::Note { text: n }));
        records.extend(self.entries.iter().map(Record::Entry));
        records.push(Record::Artifact { artifact: &self.final_artifact });
        let mut out = String::new();
        for r in records {
            out.push_str(&serde_json::to_string(&r).expect("records serialize"));
            out.push('\n');
        }
        out
    }

    /// Writes `<dir>/<timestamp>-<task>.jsonl` and returns its path.
    pub fn persist(&self, dir: &Path) -> std::io::Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let stamp = Utc::now().format("%Y%m%dT%H%M%S%.3fZ");
        let mut path = dir.join(format!("{stamp}-{}.jsonl", self.task));
        let mut n = 1;
        while path.exists() {
            path = dir.join(format!("{stamp}-{}-{n}.jsonl", self.task));
            n += 1;
        }
        write_atomic(&path, &self.to_jsonl())?;
        Ok(path)
    }

    /// Saves every agent response, keyed by the prompt that produced it,
    /// as an exact-match fixture directory.
    pub fn save_fixtures(&self, dir: &Path) -> Result<(), AgentError> {
        let mut responses = Vec::new();
        let mut prompt = None;
        for e in &self.entries {
            match e.role {
                Role::User => prompt = Some(prompt_digest(&e.content)),
                Role::Agent => responses.push((prompt.take(), e.content.clone())),
                Role::Checker => {}
            }
        }
        ReplayBackend::save(dir, ReplayMode::Exact, &responses)
    }
}

//! Source positions and structured diagnostics.
//!
//! Diagnostics are the common currency between the parsers, the type
//! checker, the SMV grammar check and the agent's repair loop. They render
//! two ways: a compact numbered list meant to be pasted into a prompt, and a
//! source-annotated form for people.

use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

/// A 1-based line/column position plus a token length in characters.
///
/// Spans never take part in structural equality or hashing: two ASTs that
/// differ only in where they were parsed from compare equal.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct Span {
    pub line: u32,
    pub col: u32,
    pub len: u32,
}

impl Span {
    pub fn new(line: u32, col: u32, len: u32) -> Self {
        Span { line, col, len }
    }

    pub fn is_unknown(&self) -> bool {
        self.line == 0
    }
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl Eq for Span {}

impl Hash for Span {
    fn hash<H: Hasher>(&self, _: &mut H) {}
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    /// Stable kebab-case identifier, e.g. `unknown-symbol`.
    pub code: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub span: Option<Span>,
    /// Optional hint such as a near-miss suggestion.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub help: Option<String>,
}

impl Diagnostic {
    pub fn error(code: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code: code.into(),
            message: message.into(),
            span: None,
            help: None,
        }
    }

    pub fn at(mut self, span: Span) -> Self {
        if !span.is_unknown() {
            self.span = Some(span);
        }
        self
    }

    pub fn with_help(mut self, help: impl Into<String>) -> Self {
        self.help = Some(help.into());
        self
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(span) = self.span {
            write!(f, "{span}: ")?;
        }
        write!(f, "{}: {}", self.code, self.message)
    }
}

/// An ordered list of diagnostics. Empty means the subject was accepted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Diagnostics {
    pub entries: Vec<Diagnostic>,
}

impl Diagnostics {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(d: Diagnostic) -> Self {
        Diagnostics { entries: vec![d] }
    }

    pub fn push(&mut self, d: Diagnostic) {
        self.entries.push(d);
    }

    pub fn extend(&mut self, other: Diagnostics) {
        self.entries.extend(other.entries);
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn has_errors(&self) -> bool {
        self.entries.iter().any(|d| d.severity == Severity::Error)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Diagnostic> {
        self.entries.iter()
    }

    pub fn codes(&self) -> Vec<&str> {
        self.entries.iter().map(|d| d.code.as_str()).collect()
    }

    /// Returns `Ok(())` when empty, the diagnostics themselves otherwise.
    pub fn into_result(self) -> Result<(), Diagnostics> {
        if self.is_empty() {
            Ok(())
        } else {
            Err(self)
        }
    }
}

impl From<Diagnostic> for Diagnostics {
    fn from(d: Diagnostic) -> Self {
        Diagnostics::single(d)
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.entries.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for Diagnostics {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Audience {
    Human,
    Agent,
}

/// Renders diagnostics for a prompt (`Agent`) or a terminal (`Human`).
///
/// The agent form is one line per entry, `E<n>`/`W<n>` numbered in list
/// order, with no positions or hints; it is deterministic so that prompt
/// golden tests stay stable. The human form shows `line:col`, the offending
/// source line with a caret marker when `source` is given, and any help.
pub fn render_diagnostics(diags: &Diagnostics, audience: Audience, source: Option<&str>) -> String {
    match audience {
        Audience::Agent => diags
            .entries
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let tag = match d.severity {
                    Severity::Error => 'E',
                    Severity::Warning => 'W',
                };
                format!("{tag}{} {}", i + 1, d.message)
            })
            .collect::<Vec<_>>()
            .join("\n"),
        Audience::Human => {
            let lines: Vec<&str> = source.map(|s| s.lines().collect()).unwrap_or_default();
            let mut out = String::new();
            for d in &diags.entries {
                let sev = match d.severity {
                    Severity::Error => "error",
                    Severity::Warning => "warning",
                };
                out.push_str(&format!("{sev}[{}]: {}\n", d.code, d.message));
                if let Some(span) = d.span {
                    out.push_str(&format!("  --> {}:{}\n", span.line, span.col));
                    if let Some(text) = lines.get(span.line.saturating_sub(1) as usize) {
                        let text = text.trim_end_matches('\r');
                        out.push_str(&format!("   | {text}\n"));
                        let pad = " ".repeat(span.col.saturating_sub(1) as usize);
                        let marks = "^".repeat(span.len.max(1) as usize);
                        out.push_str(&format!("   | {pad}{marks}\n"));
                    }
                }
                if let Some(help) = &d.help {
                    out.push_str(&format!("  = help: {help}\n"));
                }
            }
            out
        }
    }
}

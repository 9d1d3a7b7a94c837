use std::path::Path;

use super::AgentError;

pub const PLACEHOLDERS: &[&str] = &[
    "spec_text",
    "signature_summary",
    "requirement",
    "formula_text",
    "scenario_text",
    "diagnostics",
    "logic",
    "count",
    "outcome",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Task {
    Elicit,
    Formalize,
    ExplainFormula,
    ExplainScenario,
    Repair,
}

impl Task {
    pub const ALL: [Task; 5] = [Task::Elicit, Task::Formalize, Task::ExplainFormula, Task::ExplainScenario, Task::Repair];

    pub fn name(self) -> &'static str {
        match self {
            Task::Elicit => "elicit",
            Task::Formalize => "formalize",
            Task::ExplainFormula => "explain-formula",
            Task::ExplainScenario => "explain-scenario",
            Task::Repair => "repair",
        }
    }

    fn builtin(self) -> &'static str {
        match self {
            Task::Elicit => include_str!("../../prompts/elicit.txt"),
            Task::Formalize => include_str!("../../prompts/formalize.txt"),
            Task::ExplainFormula => include_str!("../../prompts/explain-formula.txt"),
            Task::ExplainScenario => include_str!("../../prompts/explain-scenario.txt"),
            Task::Repair => include_str!("../../prompts/repair.txt"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub task: Task,
    pub body: String,
}

/// `{name}` tokens with an identifier-like name.
fn tokens(body: &str) -> impl Iterator<Item = (usize, usize, &str)> {
    body.match_indices('{').filter_map(move |(start, _)| {
        let rest = &body[start + 1..];
        let end = rest.find('}')?;
        let name = &rest[..end];
        let ident = !name.is_empty() && name.chars().all(|c| c.is_ascii_lowercase() || c == '_');
        ident.then_some((start, start + end + 2, name))
    })
}

impl PromptTemplate {
    pub fn new(task: Task, body: impl Into<String>) -> Result<Self, AgentError> {
        let body = body.into();
        if let Some((_, _, name)) = tokens(&body).find(|(_, _, n)| !PLACEHOLDERS.contains(n)) {
            return Err(AgentError::InvalidTemplate(format!("{} template uses unknown placeholder {{{name}}}", task.name())));
        }
        Ok(PromptTemplate { task, body })
    }

    pub fn placeholders(&self) -> Vec<&str> {
        tokens(&self.body).map(|(_, _, n)| n).collect()
    }

    /// Substitutes in one pass, so bound values are never rescanned.
    pub fn render(&self, bindings: &[(&str, &str)]) -> Result<String, AgentError> {
        let mut out = String::with_capacity(self.body.len());
        let mut at = 0;
        for (start, end, name) in tokens(&self.body) {
            let value = bindings
                .iter()
                .find(|(k, _)| *k == name)
                .map(|(_, v)| *v)
                .ok_or_else(|| AgentError::InvalidTemplate(format!("{} template needs a value for {{{name}}}", self.task.name())))?;
            out.push_str(&self.body[at..start]);
            out.push_str(value);
            at = end;
        }
        out.push_str(&self.body[at..]);
        Ok(out)
    }
}

#[derive(Debug, Clone)]
pub struct Templates {
    templates: Vec<PromptTemplate>,
}

impl Templates {
    pub fn builtin() -> Self {
        let templates = Task::ALL
            .iter()
            .map(|t| PromptTemplate::new(*t, t.builtin()).expect("builtin templates are valid"))
            .collect();
        Templates { templates }
    }

    /// Reads `<task>.txt` files from a directory; missing files fall back
    /// to the builtin text.
    pub fn from_dir(dir: &Path) -> Result<Self, AgentError> {
        let mut templates = Vec::new();
        for t in Task::ALL {
            let path = dir.join(format!("{}.txt", t.name()));
            let body = match std::fs::read_to_string(&path) {
                Ok(b) => b,
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => t.builtin().to_string(),
                Err(e) => return Err(AgentError::InvalidTemplate(format!("cannot read {}: {e}", path.display()))),
            };
            templates.push(PromptTemplate::new(t, body)?);
        }
        Ok(Templates { templates })
    }

    pub fn get(&self, task: Task) -> &PromptTemplate {
        self.templates.iter().find(|t| t.task == task).expect("every task has a template")
    }
}

//! The LLM-backed assistant: prompt construction, completion backends,
//! answer extraction and the checker-feedback repair loop.
//!
//! Every operation returns a [`Session`] holding the outcome together with
//! the transcript of the exchange, which is kept even when the operation
//! fails.

mod backend;
mod config;
mod ears;
mod extract;
mod prompt;
mod transcript;

use thiserror::Error;

use crate::bridge::enrich_spec;
use crate::checker::{build_kripke, check_formula, Limits, DEFAULT_LTL_BOUND};
use crate::diag::{render_diagnostics, Audience, Diagnostic, Diagnostics};
use crate::interp::{run_scenario, Machine};
use crate::lang::*;
use crate::signature::{extract_signature, typecheck_formula, typecheck_spec, Signature, TypedFormula};

pub use backend::{
    backend_for, prompt_digest, CompletionBackend, FixtureEntry, FixtureIndex, LiveBackend, ReplayBackend, ReplayMode,
};
pub use config::{AgentConfig, BackendKind, ConfigFile, DEFAULT_ENDPOINT, DEFAULT_MODEL, ENV_API_KEY, ENV_API_URL, ENV_MODEL};
pub use ears::{classify_ears, EarsPattern, EarsRequirement};
pub use extract::{extract_formula, parse_list};
pub use prompt::{PromptTemplate, Task, Templates, PLACEHOLDERS};
pub use transcript::{AgentTranscript, Artifact, Role, TranscriptEntry};

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("invalid agent configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid prompt template: {0}")]
    InvalidTemplate(String),
    #[error("{0}")]
    Precondition(Diagnostics),
    #[error("cannot reach {endpoint}: {message}")]
    Network { endpoint: String, message: String },
    #[error("request to {endpoint} timed out")]
    Timeout { endpoint: String },
    #[error("backend answered with HTTP {status}: {body}")]
    HttpStatus { status: u16, body: String },
    #[error("replay fixtures exhausted after {served} responses")]
    FixtureExhausted { served: usize },
    #[error("no replay fixture for prompt digest {digest}")]
    FixtureMissing { digest: String },
    #[error("{0}")]
    Fixture(String),
    #[error("unparseable response: {0}")]
    UnparseableResponse(String),
    #[error("no valid formula after {attempts} attempts")]
    RepairBudgetExhausted { attempts: u32 },
}

impl AgentError {
    pub fn code(&self) -> &'static str {
        match self {
            AgentError::InvalidConfig(_) => "invalid-config",
            AgentError::InvalidTemplate(_) => "invalid-template",
            AgentError::Precondition(_) => "precondition",
            AgentError::Network { .. } => "network-error",
            AgentError::Timeout { .. } => "timeout",
            AgentError::HttpStatus { .. } => "http-status",
            AgentError::FixtureExhausted { .. } => "fixture-exhausted",
            AgentError::FixtureMissing { .. } => "fixture-missing",
            AgentError::Fixture(_) => "fixture-error",
            AgentError::UnparseableResponse(_) => "unparseable-response",
            AgentError::RepairBudgetExhausted { .. } => "repair-budget-exhausted",
        }
    }

    /// Failures of the completion service or its replay stand-in.
    pub fn is_backend(&self) -> bool {
        matches!(
            self,
            AgentError::Network { .. }
                | AgentError::Timeout { .. }
                | AgentError::HttpStatus { .. }
                | AgentError::FixtureExhausted { .. }
                | AgentError::FixtureMissing { .. }
                | AgentError::Fixture(_)
        )
    }

    fn precondition(code: &str, msg: impl Into<String>) -> Self {
        AgentError::Precondition(Diagnostic::error(code, msg).into())
    }
}

#[derive(Debug)]
pub struct Session<T> {
    pub result: Result<T, AgentError>,
    pub transcript: AgentTranscript,
}

impl<T> Session<T> {
    fn done(transcript: AgentTranscript, result: Result<T, AgentError>) -> Self {
        Session { result, transcript }
    }
}

#[derive(Debug, Clone)]
pub struct Formalized {
    pub formula: TypedFormula,
    pub property: PropertyDecl,
    pub enriched: AsmSpecification,
    pub ears: EarsRequirement,
    /// 1-based attempt that produced the formula.
    pub iteration: u32,
}

/// One completion request with a backend built from `config`.
pub fn complete(prompt: &str, config: &AgentConfig) -> Result<String, AgentError> {
    backend_for(config)?.complete(prompt)
}

pub struct Agent {
    config: AgentConfig,
    backend: Box<dyn CompletionBackend>,
    templates: Templates,
}

fn logic_name(l: Logic) -> &'static str {
    match l {
        Logic::Ctl => "CTL",
        Logic::Ltl => "LTL",
    }
}

impl Agent {
    pub fn new(config: AgentConfig) -> Result<Agent, AgentError> {
        let backend = backend_for(&config)?;
        Ok(Agent { config, backend, templates: Templates::builtin() })
    }

    pub fn with_backend(config: AgentConfig, backend: Box<dyn CompletionBackend>) -> Agent {
        Agent { config, backend, templates: Templates::builtin() }
    }

    pub fn with_templates(mut self, templates: Templates) -> Agent {
        self.templates = templates;
        self
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    fn call(&mut self, prompt: String, t: &mut AgentTranscript, iteration: u32) -> Result<String, AgentError> {
        t.push(Role::User, prompt.clone(), iteration);
        let answer = self.backend.complete(&prompt)?;
        t.push(Role::Agent, answer.clone(), iteration);
        Ok(answer)
    }

    fn checked_signature(spec: &AsmSpecification) -> Result<Signature, AgentError> {
        typecheck_spec(spec).into_result().map_err(AgentError::Precondition)?;
        extract_signature(spec).map_err(AgentError::Precondition)
    }

    /// Asks for the `count` most important properties of a specification.
    pub fn elicit_properties(&mut self, spec: &AsmSpecification, count: usize) -> Session<Vec<String>> {
        let mut t = AgentTranscript::new("elicit");
        let r = self.elicit_inner(spec, count, &mut t);
        if let Ok(items) = &r {
            t.final_artifact = Some(Artifact::Properties(items.clone()));
        }
        Session::done(t, r)
    }

    fn elicit_inner(&mut self, spec: &AsmSpecification, count: usize, t: &mut AgentTranscript) -> Result<Vec<String>, AgentError> {
        if count == 0 {
            return Err(AgentError::precondition("invalid-count", "count must be at least 1"));
        }
        let sig = Self::checked_signature(spec)?;
        let count_text = count.to_string();
        let prompt = self.templates.get(Task::Elicit).render(&[
            ("spec_text", &print_asm(spec)),
            ("signature_summary", &sig.summary()),
            ("count", &count_text),
        ])?;
        let items = parse_list(&self.call(prompt.clone(), t, 1)?);
        if items.len() == count {
            return Ok(items);
        }
        t.note(format!("expected {count} items, got {}; asking again", items.len()));
        let retry = format!("{prompt}\nYour previous answer listed {} items. List exactly {count} items.\n", items.len());
        let items = parse_list(&self.call(retry, t, 2)?);
        if items.len() == count {
            Ok(items)
        } else {
            Err(AgentError::UnparseableResponse(format!("expected a list of {count} items, got {}", items.len())))
        }
    }

    /// Turns a requirement into a validated formula, feeding checker
    /// diagnostics back until it type-checks or the budget runs out.
    pub fn formalize(&mut self, spec: &AsmSpecification, requirement: &str, logic: Logic) -> Session<Formalized> {
        let mut t = AgentTranscript::new("formalize");
        let r = self.formalize_inner(spec, requirement, logic, &mut t);
        if let Ok(f) = &r {
            t.final_artifact = Some(Artifact::Formula {
                text: print_formula(&f.formula.formula, FormulaStyle::Uppercase),
                logic: logic_name(logic).into(),
            });
        }
        Session::done(t, r)
    }

    fn formalize_inner(
        &mut self,
        spec: &AsmSpecification,
        requirement: &str,
        logic: Logic,
        t: &mut AgentTranscript,
    ) -> Result<Formalized, AgentError> {
        let sig = Self::checked_signature(spec)?;
        if requirement.trim().is_empty() {
            return Err(AgentError::precondition("empty-requirement", "the requirement is empty"));
        }
        let ears = classify_ears(requirement);
        t.note(format!("EARS pattern: {}", ears.pattern.name()));
        if let Some(w) = &ears.warning {
            t.note(format!("warning: {w}"));
        }

        let spec_text = print_asm(spec);
        let summary = sig.summary();
        let logic_text = logic_name(logic);
        let mut previous: Option<(String, String)> = None;
        let mut semantic_round_used = false;
        let mut ks = None;

        for iteration in 1..=self.config.max_iterations {
            let prompt = match &previous {
                None => self.templates.get(Task::Formalize).render(&[
                    ("spec_text", &spec_text),
                    ("signature_summary", &summary),
                    ("requirement", requirement),
                    ("logic", logic_text),
                ])?,
                Some((candidate, feedback)) => self.templates.get(Task::Repair).render(&[
                    ("spec_text", &spec_text),
                    ("signature_summary", &summary),
                    ("requirement", requirement),
                    ("logic", logic_text),
                    ("formula_text", candidate),
                    ("diagnostics", feedback),
                ])?,
            };
            let answer = self.call(prompt, t, iteration)?;
            let Some(candidate) = extract_formula(&answer, logic) else {
                let feedback = "E1 no formula found in the answer".to_string();
                t.push(Role::Checker, feedback.clone(), iteration);
                previous = Some((answer.trim().to_string(), feedback));
                continue;
            };
            let checked = parse_property(&candidate, logic, true).and_then(|f| typecheck_formula(&f, logic, &sig));
            let tf = match checked {
                Ok(tf) => tf,
                Err(d) => {
                    let feedback = render_diagnostics(&d, Audience::Agent, Some(&candidate));
                    t.push(Role::Checker, feedback.clone(), iteration);
                    previous = Some((candidate, feedback));
                    continue;
                }
            };

            if self.config.semantic_repair && !semantic_round_used && iteration < self.config.max_iterations {
                if ks.is_none() {
                    let mut bare = spec.clone();
                    bare.properties.clear();
                    ks = Some(build_kripke(&bare, &Limits::default()));
                }
                match ks.as_ref().expect("built above") {
                    Ok(ks) => match check_formula(ks, &tf, DEFAULT_LTL_BOUND) {
                        Ok(v) if v.fails() => {
                            semantic_round_used = true;
                            let mut feedback = String::from("E1 the property does not hold in the specification");
                            if let Some(trace) = v.counterexample() {
                                feedback.push_str("; counterexample:");
                                let n = trace.states.len();
                                for (i, idx) in trace.indices.iter().enumerate() {
                                    if n > 6 && (3..n - 3).contains(&i) {
                                        if i == 3 {
                                            feedback.push_str(&format!("\n  ... {} states omitted", n - 6));
                                        }
                                        continue;
                                    }
                                    feedback.push_str(&format!("\n  state {i}: {}", ks.format_state(*idx)));
                                }
                            }
                            t.push(Role::Checker, feedback.clone(), iteration);
                            previous = Some((candidate, feedback));
                            continue;
                        }
                        Ok(_) => {}
                        Err(e) => t.note(format!("semantic check skipped: {e}")),
                    },
                    Err(e) => t.note(format!("semantic check skipped: {e}")),
                }
            }

            let text = print_formula(&tf.formula, FormulaStyle::Uppercase);
            let property = PropertyDecl::new(logic, tf.formula.clone(), text, Origin::AgentGenerated);
            let enriched = enrich_spec(spec, std::slice::from_ref(&property)).map_err(AgentError::Precondition)?;
            return Ok(Formalized { formula: tf, property, enriched, ears, iteration });
        }
        Err(AgentError::RepairBudgetExhausted { attempts: self.config.max_iterations })
    }

    /// Explains a formula in natural language. A missing mention of one of
    /// the formula's functions is recorded as a note, not an error.
    pub fn explain_formula(&mut self, spec: &AsmSpecification, formula: &Formula, logic: Logic) -> Session<String> {
        let mut t = AgentTranscript::new("explain-formula");
        let r = self.explain_formula_inner(spec, formula, logic, &mut t);
        if let Ok(text) = &r {
            t.final_artifact = Some(Artifact::Text(text.clone()));
        }
        Session::done(t, r)
    }

    fn explain_formula_inner(
        &mut self,
        spec: &AsmSpecification,
        formula: &Formula,
        logic: Logic,
        t: &mut AgentTranscript,
    ) -> Result<String, AgentError> {
        let sig = Self::checked_signature(spec)?;
        typecheck_formula(formula, logic, &sig).map_err(AgentError::Precondition)?;
        let formula_text = print_formula(formula, FormulaStyle::Uppercase);
        let prompt = self.templates.get(Task::ExplainFormula).render(&[
            ("signature_summary", &sig.summary()),
            ("logic", logic_name(logic)),
            ("formula_text", &formula_text),
        ])?;
        let answer = self.call(prompt, t, 1)?;
        let words: Vec<&str> = answer.split(|c: char| !(c.is_alphanumeric() || c == '_')).collect();
        let mut missing: Vec<String> =
            formula.applied_names().into_iter().filter(|n| sig.function(n).is_some() && !words.contains(&n.as_str())).collect();
        missing.dedup();
        if !missing.is_empty() {
            t.note(format!("warning: explanation does not mention {}", missing.join(", ")));
        }
        Ok(answer)
    }

    /// Explains a scenario, telling the model whether it passes and, if not,
    /// which check fails.
    pub fn explain_scenario(&mut self, spec: &AsmSpecification, scenario: &AvallaScenario) -> Session<String> {
        let mut t = AgentTranscript::new("explain-scenario");
        let r = self.explain_scenario_inner(spec, scenario, &mut t);
        if let Ok(text) = &r {
            t.final_artifact = Some(Artifact::Text(text.clone()));
        }
        Session::done(t, r)
    }

    fn explain_scenario_inner(
        &mut self,
        spec: &AsmSpecification,
        scenario: &AvallaScenario,
        t: &mut AgentTranscript,
    ) -> Result<String, AgentError> {
        let sig = Self::checked_signature(spec)?;
        let machine = Machine::new(spec).map_err(|e| AgentError::Precondition(e.to_diagnostics()))?;
        let outcome = scenario_outcome(&machine, scenario);
        let prompt = self.templates.get(Task::ExplainScenario).render(&[
            ("signature_summary", &sig.summary()),
            ("scenario_text", &print_avalla(scenario)),
            ("outcome", &outcome),
        ])?;
        self.call(prompt, t, 1)
    }
}

/// A short plain-text account of a scenario run.
pub fn scenario_outcome(machine: &Machine, scenario: &AvallaScenario) -> String {
    let checks = scenario.commands.iter().filter(|c| matches!(c, Command::Check(_))).count();
    match run_scenario(machine, scenario) {
        Err(e) => format!("the scenario could not be run: {e}"),
        Ok(r) => {
            let steps = if r.steps_executed == 0 {
                "no steps executed".to_string()
            } else {
                format!("{} steps executed", r.steps_executed)
            };
            match &r.failed_check {
                None => format!("passed; {steps}; all {checks} checks hold"),
                Some(f) => {
                    let actual =
                        f.actual.iter().map(|(l, v)| format!("{l}={}", print_term(&v.to_term()))).collect::<Vec<_>>().join(", ");
                    format!(
                        "failed; {steps}; the check at command index {} expected `{}` but the state was {actual}",
                        f.command_index,
                        print_term(&f.expected)
                    )
                }
            }
        }
    }
}

#[cfg(test)]
mod tests;

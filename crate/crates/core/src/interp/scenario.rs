//! Avalla scenario execution.

use serde::{Serialize, Serializer};

use crate::lang::*;
use crate::signature::typecheck_condition;

use super::compile::{Compiler, SlotRef};
use super::{InterpError, Location, Machine, State};

fn print_term_ser<S: Serializer>(t: &Term, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&print_term(t))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailedCheck {
    /// Zero-based index into the scenario's commands.
    pub command_index: usize,
    #[serde(serialize_with = "print_term_ser")]
    pub expected: Term,
    /// Full valuation of the state the check was evaluated in.
    pub actual: Vec<(Location, Value)>,
}

impl FailedCheck {
    pub fn actual_value(&self, function: &str) -> Option<&Value> {
        self.actual.iter().find(|(l, _)| l.function == function && l.arg.is_none()).map(|(_, v)| v)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioResult {
    pub passed: bool,
    pub steps_executed: usize,
    pub failed_check: Option<FailedCheck>,
    /// The state each step was taken from, followed by the final state.
    #[serde(skip)]
    pub trace: Vec<State>,
}

/// Runs a scenario against a compiled machine.
///
/// The run starts from the initial state whose monitored functions take the
/// first value of their domain. A `set` changes the current state's
/// monitored value; a `step` fires the main rule and keeps every monitored
/// value; a `check` is evaluated in the current state. Execution stops at
/// the first failing check.
pub fn run_scenario(m: &Machine, scenario: &AvallaScenario) -> Result<ScenarioResult, InterpError> {
    let mut current = m.initial_states().into_iter().next().expect("at least one initial state");
    let mut trace = Vec::new();
    let mut steps = 0;
    for (i, cmd) in scenario.commands.iter().enumerate() {
        match cmd {
            Command::Set { function, arg, value } => {
                let Some(decl) = m.signature().function(function) else {
                    let loc = Term::app(function.clone(), arg.clone());
                    return Err(InterpError::InvalidScenario(typecheck_condition(&Term::eq(loc, value.clone()), m.signature())));
                };
                if decl.kind != FunctionKind::Monitored {
                    return Err(InterpError::SetToNonMonitored { function: function.clone(), kind: decl.kind.keyword() });
                }
                let loc = Term::app(function.clone(), arg.clone());
                let diags = typecheck_condition(&Term::eq(loc, value.clone()), m.signature());
                if !diags.is_empty() {
                    return Err(InterpError::InvalidScenario(diags));
                }
                let mut c = Compiler::new(m);
                let slot = match c.location(function, arg.as_ref())? {
                    SlotRef::Fixed(s) => s,
                    SlotRef::Indexed(ix) => ix.slot(m, &current.0)?,
                };
                let raw = c.expr(value)?.eval(m, &current.0)?;
                let codec = &m.slots[slot].codec;
                if !codec.contains(raw) {
                    return Err(InterpError::SetOutOfDomain {
                        function: m.slots[slot].location.to_string(),
                        value: codec.show(raw),
                        domain: codec.decl.name.clone(),
                    });
                }
                current.0[slot] = raw;
            }
            Command::Step => {
                let next = m.step_with(&current, m.monitored(&current))?;
                trace.push(std::mem::replace(&mut current, next));
                steps += 1;
            }
            Command::Check(term) => {
                let cond = m.condition(term).map_err(InterpError::InvalidScenario)?;
                if !m.eval(&cond, &current)? {
                    trace.push(current.clone());
                    return Ok(ScenarioResult {
                        passed: false,
                        steps_executed: steps,
                        failed_check: Some(FailedCheck { command_index: i, expected: term.clone(), actual: m.valuation(&current) }),
                        trace,
                    });
                }
            }
        }
    }
    trace.push(current);
    Ok(ScenarioResult { passed: true, steps_executed: steps, failed_check: None, trace })
}

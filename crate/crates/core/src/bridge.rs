//! Conversions between checker traces, Avalla scenarios and enriched
//! specifications.

use std::io::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::checker::Trace;
use crate::diag::Diagnostics;
use crate::interp::{InterpError, Location, Machine, State};
use crate::lang::*;
use crate::signature::{extract_signature, typecheck_formula};

#[derive(Debug, Error)]
pub enum BridgeError {
    #[error("trace does not match the specification: {0}")]
    TraceMismatch(String),
    #[error(transparent)]
    Spec(#[from] InterpError),
}

impl BridgeError {
    pub fn code(&self) -> &'static str {
        match self {
            BridgeError::TraceMismatch(_) => "trace-mismatch",
            BridgeError::Spec(e) => e.code(),
        }
    }
}

/// Exports a counterexample (or any replayable trace) as a scenario.
///
/// Each step sets the monitored functions whose value changed (all of
/// them before the first step), steps, and checks the full controlled
/// valuation of the resulting state.
pub fn trace_to_avalla(trace: &Trace, spec: &AsmSpecification, scenario_name: &str) -> Result<AvallaScenario, BridgeError> {
    export(trace, spec, scenario_name, false)
}

/// Like [`trace_to_avalla`], but the final check asserts the complete
/// final state, monitored functions included.
pub fn witness_to_avalla(trace: &Trace, spec: &AsmSpecification, scenario_name: &str) -> Result<AvallaScenario, BridgeError> {
    export(trace, spec, scenario_name, true)
}

fn set_commands(m: &Machine, s: &State, held: Option<&State>) -> Vec<Command> {
    let held = held.map(|h| m.monitored_valuation(h));
    m.monitored_valuation(s)
        .into_iter()
        .enumerate()
        .filter(|(i, (_, v))| held.as_ref().is_none_or(|h| &h[*i].1 != v))
        .map(|(_, (loc, v))| Command::Set { function: loc.function, arg: loc.arg.map(|a| a.to_term()), value: v.to_term() })
        .collect()
}

fn full_term(m: &Machine, s: &State) -> Term {
    let eqs = m.valuation(s).into_iter().map(|(l, v): (Location, Value)| Term::eq(l.to_term(), v.to_term()));
    Term::conjunction(eqs).unwrap_or(Term::Bool(true))
}

fn export(trace: &Trace, spec: &AsmSpecification, name: &str, witness: bool) -> Result<AvallaScenario, BridgeError> {
    let m = Machine::new(spec)?;
    let mut sc = AvallaScenario {
        name: name.to_string(),
        load: format!("{}.asm", spec.name),
        commands: Vec::new(),
        loop_start: trace.loop_start(),
    };
    let states = &trace.states;
    if states.is_empty() {
        return Ok(sc);
    }
    for (i, s) in states.iter().enumerate() {
        if s.0.len() != m.slot_count() {
            return Err(BridgeError::TraceMismatch(format!(
                "state {i} has {} locations, the specification has {}",
                s.0.len(),
                m.slot_count()
            )));
        }
    }
    let init = m.initial_states();
    if m.controlled(&states[0]) != m.controlled(&init[0]) {
        return Err(BridgeError::TraceMismatch("the first state is not an initial state".into()));
    }
    for (k, pair) in states.windows(2).enumerate() {
        let next = m.step_with(&pair[0], m.monitored(&pair[1]))?;
        if m.controlled(&next) != m.controlled(&pair[1]) {
            return Err(BridgeError::TraceMismatch(format!("step {k} does not follow from the rules")));
        }
    }

    let mut held: Option<&State> = None;
    for pair in states.windows(2) {
        sc.commands.extend(set_commands(&m, &pair[0], held));
        held = Some(&pair[0]);
        sc.commands.push(Command::Step);
        sc.commands.push(Command::Check(m.controlled_term(&pair[1])));
    }
    // Bring the monitored part in line with the last state so the scenario
    // ends exactly where the trace does.
    let last = states.last().expect("non-empty");
    let trailing = set_commands(&m, last, Some(held.unwrap_or(&init[0])));
    if witness || !trailing.is_empty() || states.len() == 1 {
        if states.len() > 1 {
            sc.commands.pop();
        }
        sc.commands.extend(trailing);
        let check = if witness { full_term(&m, last) } else { m.controlled_term(last) };
        sc.commands.push(Command::Check(check));
    }
    Ok(sc)
}

/// Appends properties that type-check, skipping structural duplicates.
/// Either every new property is accepted or the spec is left unchanged.
pub fn enrich_spec(spec: &AsmSpecification, new_properties: &[PropertyDecl]) -> Result<AsmSpecification, Diagnostics> {
    let sig = extract_signature(spec)?;
    let mut diags = Diagnostics::new();
    for p in new_properties {
        if let Err(d) = typecheck_formula(&p.formula, p.logic, &sig) {
            diags.extend(d);
        }
    }
    diags.into_result()?;
    let mut out = spec.clone();
    for p in new_properties {
        if !out.properties.contains(p) {
            out.properties.push(p.clone());
        }
    }
    Ok(out)
}

/// Writes a file through a temporary sibling and a rename, so readers never
/// see a partial file and a failed write leaves the old content intact.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

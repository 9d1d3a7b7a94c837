use std::path::Path;
use std::sync::atomic::Ordering;

use serde_json::{json, Value as Json};

use super::{read_file, CliError, CliResult, Context, Exit, LoadedSpec};
use crate::agent::{Agent, AgentError, AgentTranscript};
use crate::bridge::{trace_to_avalla, witness_to_avalla, write_atomic};
use crate::checker::{build_kripke, check_formula, verify_spec, CheckError, Outcome, Trace, TraceKind, Verdict};
use crate::diag::{render_diagnostics, Audience};
use crate::interp::{self, Machine};
use crate::lang::*;
use crate::signature::{extract_signature, typecheck_formula, typecheck_spec};
use crate::smv;

pub enum PropertyRef {
    Text(String, Option<Logic>),
    /// 1-based.
    Index(usize),
}

fn keyword(l: Logic) -> &'static str {
    match l {
        Logic::Ctl => "CTLSPEC",
        Logic::Ltl => "LTLSPEC",
    }
}

fn bare(spec: &AsmSpecification) -> AsmSpecification {
    let mut s = spec.clone();
    s.properties.clear();
    s
}

fn checked(l: &LoadedSpec) -> Result<(), CliError> {
    let d = typecheck_spec(&l.spec);
    if d.is_empty() {
        Ok(())
    } else {
        Err(CliError::usage(format!(
            "{}:\n{}",
            l.path.display(),
            render_diagnostics(&d, Audience::Human, Some(&l.source)).trim_end()
        )))
    }
}

fn check_error(e: &CheckError) -> CliError {
    let exit = if e.is_limit() { Exit::Limit } else { Exit::Usage };
    CliError::new(exit, e.to_string())
}

pub(crate) fn agent_error(e: &AgentError) -> CliError {
    let exit = match e {
        _ if e.is_backend() => Exit::Backend,
        AgentError::RepairBudgetExhausted { .. } | AgentError::UnparseableResponse(_) => Exit::Failure,
        _ => Exit::Usage,
    };
    CliError::new(exit, e.to_string())
}

fn trace_json(m: &Machine, t: &Trace) -> Json {
    let states: Vec<Json> = t
        .states
        .iter()
        .map(|s| {
            let map: serde_json::Map<String, Json> =
                m.valuation(s).into_iter().map(|(l, v)| (l.to_string(), json!(v.to_string()))).collect();
            Json::Object(map)
        })
        .collect();
    json!({
        "kind": match t.kind { TraceKind::FinitePath => "finite-path", TraceKind::Lasso { .. } => "lasso" },
        "loop_start": t.loop_start(),
        "steps": t.steps(),
        "states": states,
    })
}

/// First and last three states, with the loop-back point of a lasso.
fn trace_summary(m: &Machine, t: &Trace) -> Vec<String> {
    let n = t.states.len();
    let mut lines = Vec::new();
    for (i, s) in t.states.iter().enumerate() {
        if n > 6 && (3..n - 3).contains(&i) {
            if i == 3 {
                lines.push(format!("      ... {} states omitted", n - 6));
            }
            continue;
        }
        lines.push(format!("      {i}: {}", m.format_state(s)));
    }
    if let Some(k) = t.loop_start() {
        lines.push(format!("      loops back to state {k}"));
    }
    lines
}

fn transcript_saved(ctx: &mut Context<'_>, t: &AgentTranscript) -> Option<String> {
    match t.persist(&ctx.transcripts) {
        Ok(p) => Some(p.display().to_string()),
        Err(e) => {
            ctx.warn(format!("warning: cannot write transcript: {e}"));
            None
        }
    }
}

fn report_notes(ctx: &mut Context<'_>, t: &AgentTranscript) {
    for n in t.notes.iter().filter(|n| n.starts_with("warning")) {
        let n = n.clone();
        ctx.warn(n);
    }
}

fn outcome_text(v: &Verdict) -> String {
    match v.outcome {
        Outcome::Holds => "holds".into(),
        Outcome::Fails => "FAILS".into(),
        Outcome::NoViolationUpTo(k) => format!("no violation up to bound {k}"),
    }
}

pub fn check(ctx: &mut Context<'_>, l: &LoadedSpec) -> CliResult {
    checked(l)?;
    if let Some(c) = &ctx.limits.cancel {
        c.store(false, Ordering::SeqCst);
    }
    let reports = verify_spec(&l.spec, &ctx.limits);
    let machine = Machine::new(&bare(&l.spec)).map_err(|e| CliError::usage(e.to_string()))?;
    let (mut failed, mut limited, mut broken) = (false, false, false);
    let mut records = Vec::new();
    if reports.is_empty() && !ctx.json {
        ctx.say("no properties to check");
    }
    for (i, r) in reports.iter().enumerate() {
        let text = format!("{} {}", keyword(r.property.logic), print_formula(&r.property.formula, FormulaStyle::Uppercase));
        match &r.result {
            Ok(v) => {
                failed |= v.fails();
                let evidence = v.evidence.as_ref();
                records.push(json!({
                    "index": i + 1,
                    "property": text,
                    "outcome": v.outcome,
                    "evidence_role": evidence.map(|t| format!("{:?}", t.role).to_lowercase()),
                    "evidence": evidence.map(|t| trace_json(&machine, t)),
                    "stats": v.stats,
                }));
                if !ctx.json {
                    ctx.say(format!("[{}] {text}: {}", i + 1, outcome_text(v)));
                    if let Some(t) = v.counterexample() {
                        ctx.say(format!("    counterexample ({} steps):", t.steps()));
                        for line in trace_summary(&machine, t) {
                            ctx.say(line);
                        }
                    }
                }
            }
            Err(e) => {
                if e.is_limit() {
                    limited = true;
                } else {
                    broken = true;
                }
                let msg = match e {
                    CheckError::Formula(d) => render_diagnostics(d, Audience::Agent, None),
                    other => other.to_string(),
                };
                records.push(json!({"index": i + 1, "property": text, "error": msg, "code": e.code()}));
                if !ctx.json {
                    ctx.say(format!("[{}] {text}: error: {msg}", i + 1));
                }
            }
        }
    }
    let exit = if broken {
        Exit::Usage
    } else if limited {
        Exit::Limit
    } else if failed {
        Exit::Failure
    } else {
        Exit::Success
    };
    if let Some(Ok(v)) = reports.first().map(|r| &r.result) {
        if !ctx.json {
            ctx.say(format!("states: {}, transitions: {}", v.stats.states, v.stats.transitions));
        }
    }
    if ctx.json {
        ctx.record(json!({"command": "check", "spec": l.path, "properties": records, "exit": exit as i32}));
    }
    Ok(exit)
}

pub fn formalize(
    ctx: &mut Context<'_>,
    l: &LoadedSpec,
    requirement: &str,
    logic: Logic,
    out: Option<&Path>,
) -> Result<(Exit, Option<AsmSpecification>), CliError> {
    let mut agent = Agent::new(ctx.agent.clone()).map_err(|e| agent_error(&e))?;
    let s = agent.formalize(&l.spec, requirement, logic);
    let transcript = transcript_saved(ctx, &s.transcript);
    report_notes(ctx, &s.transcript);
    let f = match s.result {
        Ok(f) => f,
        Err(e) => {
            if let Some(p) = &transcript {
                ctx.warn(format!("transcript: {p}"));
            }
            return Err(agent_error(&e));
        }
    };
    let formula = print_formula(&f.formula.formula, FormulaStyle::Uppercase);
    let line = format!("{} {}", keyword(logic), print_formula(&f.formula.formula, FormulaStyle::CallStyle));
    if let Some(path) = out {
        write_atomic(path, &print_asm(&f.enriched))
            .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))?;
    }
    if ctx.json {
        ctx.record(json!({
            "command": "formalize",
            "formula": formula,
            "property_line": line,
            "iterations": f.iteration,
            "ears_pattern": f.ears.pattern,
            "out": out,
            "transcript": transcript,
        }));
    } else {
        ctx.say(format!("formula: {formula}"));
        ctx.say(format!("accepted after {} attempt(s)", f.iteration));
        match out {
            Some(p) => ctx.say(format!("enriched specification written to {}", p.display())),
            None => ctx.say(format!("property line: {line}")),
        }
        if let Some(p) = transcript {
            ctx.say(format!("transcript: {p}"));
        }
    }
    Ok((Exit::Success, Some(f.enriched)))
}

pub fn elicit(ctx: &mut Context<'_>, l: &LoadedSpec, count: usize) -> CliResult {
    let mut agent = Agent::new(ctx.agent.clone()).map_err(|e| agent_error(&e))?;
    let s = agent.elicit_properties(&l.spec, count);
    let transcript = transcript_saved(ctx, &s.transcript);
    report_notes(ctx, &s.transcript);
    let items = s.result.map_err(|e| agent_error(&e))?;
    if ctx.json {
        ctx.record(json!({"command": "elicit", "properties": items, "transcript": transcript}));
    } else {
        for (i, item) in items.iter().enumerate() {
            ctx.say(format!("{}. {item}", i + 1));
        }
    }
    Ok(Exit::Success)
}

fn resolve_property(l: &LoadedSpec, target: PropertyRef) -> Result<(Formula, Logic), CliError> {
    match target {
        PropertyRef::Index(i) => {
            let p = i
                .checked_sub(1)
                .and_then(|k| l.spec.properties.get(k))
                .ok_or_else(|| CliError::usage(format!("no property {i}; the specification has {}", l.spec.properties.len())))?;
            Ok((p.formula.clone(), p.logic))
        }
        PropertyRef::Text(text, Some(logic)) => parse_property(&text, logic, true)
            .map(|f| (f, logic))
            .map_err(|d| CliError::diagnostics(&d, Some(&text))),
        PropertyRef::Text(text, None) => match parse_property(&text, Logic::Ctl, true) {
            Ok(f) => Ok((f, Logic::Ctl)),
            Err(d) => parse_property(&text, Logic::Ltl, true)
                .map(|f| (f, Logic::Ltl))
                .map_err(|_| CliError::diagnostics(&d, Some(&text))),
        },
    }
}

pub fn explain_prop(ctx: &mut Context<'_>, l: &LoadedSpec, target: PropertyRef) -> CliResult {
    let (formula, logic) = resolve_property(l, target)?;
    let mut agent = Agent::new(ctx.agent.clone()).map_err(|e| agent_error(&e))?;
    let s = agent.explain_formula(&l.spec, &formula, logic);
    let transcript = transcript_saved(ctx, &s.transcript);
    report_notes(ctx, &s.transcript);
    let text = s.result.map_err(|e| agent_error(&e))?;
    if ctx.json {
        ctx.record(json!({"command": "explain-prop", "explanation": text, "transcript": transcript}));
    } else {
        ctx.say(text);
    }
    Ok(Exit::Success)
}

fn load_scenario(path: &Path) -> Result<AvallaScenario, CliError> {
    let text = read_file(path)?;
    parse_avalla(&text).map_err(|d| {
        let mut e = CliError::diagnostics(&d, Some(&text));
        e.message = format!("{}:\n{}", path.display(), e.message);
        e
    })
}

pub fn explain_scenario(ctx: &mut Context<'_>, l: &LoadedSpec, scenario: &Path) -> CliResult {
    let sc = load_scenario(scenario)?;
    let mut agent = Agent::new(ctx.agent.clone()).map_err(|e| agent_error(&e))?;
    let s = agent.explain_scenario(&l.spec, &sc);
    let transcript = transcript_saved(ctx, &s.transcript);
    let text = s.result.map_err(|e| agent_error(&e))?;
    if ctx.json {
        ctx.record(json!({"command": "explain-scenario", "explanation": text, "transcript": transcript}));
    } else {
        ctx.say(text);
    }
    Ok(Exit::Success)
}

/// The `load` path of an exported scenario, relative to where it is written
/// when both files share a directory.
fn load_path(spec: &Path, out: &Path) -> String {
    let dir = |p: &Path| p.parent().and_then(|d| std::fs::canonicalize(if d.as_os_str().is_empty() { Path::new(".") } else { d }).ok());
    match (dir(spec), dir(out), spec.file_name()) {
        (Some(a), Some(b), Some(name)) if a == b => name.to_string_lossy().into_owned(),
        _ => std::fs::canonicalize(spec).unwrap_or_else(|_| spec.to_path_buf()).display().to_string(),
    }
}

pub fn export_cex(ctx: &mut Context<'_>, l: &LoadedSpec, index: usize, out: &Path, witness: bool) -> CliResult {
    checked(l)?;
    let p = index
        .checked_sub(1)
        .and_then(|k| l.spec.properties.get(k))
        .ok_or_else(|| CliError::usage(format!("no property {index}; the specification has {}", l.spec.properties.len())))?
        .clone();
    if let Some(c) = &ctx.limits.cancel {
        c.store(false, Ordering::SeqCst);
    }
    let ks = build_kripke(&bare(&l.spec), &ctx.limits).map_err(|e| check_error(&e))?;
    let sig = extract_signature(&l.spec).map_err(|d| CliError::diagnostics(&d, None))?;
    let tf = typecheck_formula(&p.formula, p.logic, &sig).map_err(|d| CliError::diagnostics(&d, None))?;
    let v = check_formula(&ks, &tf, ctx.limits.ltl_bound).map_err(|e| check_error(&e))?;
    let (trace, kind) = if witness {
        let t = v.witness().ok_or_else(|| {
            CliError::usage(format!("property {index} has no witness to export ({})", outcome_text(&v)))
        })?;
        (t, "witness")
    } else {
        let t = v.counterexample().ok_or_else(|| {
            CliError::usage(format!("property {index} has no counterexample to export ({})", outcome_text(&v)))
        })?;
        (t, "counterexample")
    };
    let name = format!("{}_{}_{index}", l.spec.name, if witness { "witness" } else { "cex" });
    let mut sc = if witness { witness_to_avalla(trace, &l.spec, &name) } else { trace_to_avalla(trace, &l.spec, &name) }
        .map_err(|e| CliError::usage(e.to_string()))?;
    sc.load = load_path(&l.path, out);
    write_atomic(out, &print_avalla(&sc)).map_err(|e| CliError::usage(format!("cannot write {}: {e}", out.display())))?;
    if ctx.json {
        ctx.record(json!({"command": "export-cex", "kind": kind, "steps": trace.steps(), "loop_start": sc.loop_start, "out": out}));
    } else {
        ctx.say(format!("{kind} with {} steps written to {}", trace.steps(), out.display()));
    }
    Ok(Exit::Success)
}

pub fn emit_smv(ctx: &mut Context<'_>, l: &LoadedSpec, out: &Path) -> CliResult {
    let model = smv::emit_smv(&l.spec).map_err(|d| CliError::diagnostics(&d, Some(&l.source)))?;
    let d = smv::emitted_roundtrip_check(&model);
    if !d.is_empty() {
        return Err(CliError::usage(format!("emitted model failed its grammar check:\n{}", render_diagnostics(&d, Audience::Human, Some(&model.text)))));
    }
    write_atomic(out, &model.text).map_err(|e| CliError::usage(format!("cannot write {}: {e}", out.display())))?;
    let nusmv = std::env::var_os(smv::NUSMV_ENV).map(|exe| smv::nusmv_verdicts(&model, Path::new(&exe)));
    if let Some(Err(e)) = &nusmv {
        ctx.warn(format!("warning: NuSMV run failed: {e}"));
    }
    let verdicts = nusmv.and_then(Result::ok);
    if ctx.json {
        let lines: Vec<&str> = model.property_lines.iter().map(|(_, s)| s.as_str()).collect();
        ctx.record(json!({"command": "emit-smv", "out": out, "variables": model.var_map, "specs": lines, "nusmv": verdicts}));
    } else {
        ctx.say(format!("wrote {} ({} variables, {} specifications)", out.display(), model.program.vars.len(), model.property_lines.len()));
        for (i, (_, line)) in model.property_lines.iter().enumerate() {
            let v = verdicts.as_ref().map(|v| if v[i] { "  -- NuSMV: true" } else { "  -- NuSMV: false" }).unwrap_or("");
            ctx.say(format!("  {line}{v}"));
        }
    }
    Ok(Exit::Success)
}

pub fn run_scenario(ctx: &mut Context<'_>, l: &LoadedSpec, scenario: &Path) -> CliResult {
    let sc = load_scenario(scenario)?;
    let m = Machine::new(&bare(&l.spec)).map_err(|e| match e {
        interp::InterpError::Invalid(d) => CliError::diagnostics(&d, Some(&l.source)),
        other => CliError::usage(other.to_string()),
    })?;
    let r = interp::run_scenario(&m, &sc).map_err(|e| CliError::usage(e.to_string()))?;
    if ctx.json {
        ctx.record(json!({"command": "run-scenario", "result": r}));
    } else if r.passed {
        ctx.say(format!("scenario {} passed ({} steps)", sc.name, r.steps_executed));
    } else if let Some(f) = &r.failed_check {
        let actual = f.actual.iter().map(|(l, v)| format!("{l}={v}")).collect::<Vec<_>>().join(", ");
        ctx.say(format!(
            "scenario {} failed at command {}: check {} does not hold; actual {actual}",
            sc.name,
            f.command_index + 1,
            print_term(&f.expected)
        ));
    }
    Ok(if r.passed { Exit::Success } else { Exit::Failure })
}

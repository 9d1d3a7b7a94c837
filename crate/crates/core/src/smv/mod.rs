//! Translation to the NuSMV input language.
//!
//! The main rule is flattened into guarded updates per location and each
//! controlled variable gets one `next(...) := case ... esac` block ending
//! in a frame arm `TRUE : x`. Monitored variables have no `next` and act as
//! free inputs. Static and derived functions are inlined.

mod ast;
mod parse;
mod sim;

use std::collections::HashSet;
use std::path::Path;
use std::process::Command;

use indexmap::IndexMap;
use sha2::{Digest, Sha256};

use crate::checker::{build_from_machine, CheckError, Limits};
use crate::diag::{Diagnostic, Diagnostics};
use crate::interp::{Location, Machine};
use crate::lang::*;
use crate::signature::{const_value, typecheck_spec, Signature};

pub use ast::{print_expr, print_program, BinOp, Expr, SmvProgram, SmvType, SpecKind, Temporal, UnOp};
pub use parse::{parse_smv, parse_smv_expr};
pub use sim::{Env, Simulator, SmvValue};

/// Environment variable naming a NuSMV executable for optional cross-checks.
pub const NUSMV_ENV: &str = "ASMPROP_NUSMV";

/// States explored before emission to catch inconsistent or out-of-range
/// updates, which SMV cannot express.
const PRESCAN_STATES: usize = 50_000;

#[derive(Debug, Clone)]
pub struct SmvModel {
    pub text: String,
    pub program: SmvProgram,
    /// Location (`f` or `f(a)`) to SMV variable.
    pub var_map: IndexMap<String, String>,
    pub property_lines: Vec<(PropertyDecl, String)>,
}

const RESERVED: &[&str] = &[
    "MODULE", "VAR", "IVAR", "FROZENVAR", "DEFINE", "ASSIGN", "INIT", "TRANS", "INVAR", "SPEC", "CTLSPEC", "LTLSPEC",
    "INVARSPEC", "PSLSPEC", "COMPUTE", "FAIRNESS", "JUSTICE", "COMPASSION", "CONSTANTS", "ISA", "init", "next",
    "case", "esac", "mod", "boolean", "integer", "real", "word", "array", "of", "self", "process", "union", "in",
    "xor", "xnor", "signed", "unsigned", "extend", "resize", "bool", "toint", "count", "abs", "TRUE", "FALSE", "A",
    "E", "F", "G", "X", "U", "V", "Y", "Z", "H", "O", "S", "T", "B", "AG", "AF", "AX", "EG", "EF", "EX", "ABF",
    "ABG", "EBF", "EBG", "MIN", "MAX",
];

fn is_identifier(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn mangle(name: &str) -> String {
    let digest = Sha256::digest(name.as_bytes());
    let base: String =
        name.chars().map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' }).collect();
    let base = if base.starts_with(|c: char| c.is_ascii_alphabetic()) { base } else { format!("v{base}") };
    format!("{base}_{}", hex::encode(&digest[..2]))
}

/// Variable names pass through when lowercase alphanumeric/underscore and
/// not reserved; others get a digest suffix.
pub fn sanitize_var(name: &str) -> String {
    let plain = is_identifier(name) && name.chars().all(|c| !c.is_ascii_uppercase()) && !RESERVED.contains(&name);
    if plain {
        name.to_string()
    } else {
        mangle(name)
    }
}

/// Enumeration constants keep their case when they are valid identifiers.
pub fn sanitize_const(name: &str) -> String {
    if is_identifier(name) && !RESERVED.contains(&name) {
        name.to_string()
    } else {
        mangle(name)
    }
}

struct Emitter<'a> {
    spec: &'a AsmSpecification,
    sig: &'a Signature,
    vars: IndexMap<Location, String>,
    consts: IndexMap<String, String>,
    depth: usize,
}

fn fail(code: &str, msg: impl Into<String>) -> Diagnostics {
    Diagnostic::error(code, msg).into()
}

impl Emitter<'_> {
    fn var(&self, loc: &Location) -> Result<Expr, Diagnostics> {
        self.vars
            .get(loc)
            .map(|n| Expr::Ident(n.clone()))
            .ok_or_else(|| fail("unsupported-construct", format!("no variable for location {loc}")))
    }

    fn literal(&self, v: &Value) -> Expr {
        match v {
            Value::Bool(b) => Expr::Bool(*b),
            Value::Int(i) => Expr::Int(*i),
            Value::Enum(s) => Expr::Ident(self.consts.get(s).cloned().unwrap_or_else(|| s.clone())),
        }
    }

    fn arg_values(&self, function: &str) -> Vec<Value> {
        let f = &self.sig.functions[function];
        f.arg_domain.as_ref().map(|d| self.sig.domains[d].values()).unwrap_or_default()
    }

    fn term(&mut self, t: &Term) -> Result<Expr, Diagnostics> {
        Ok(match t {
            Term::Int(i) => Expr::Int(*i),
            Term::Bool(b) => Expr::Bool(*b),
            Term::Var(v) => return Err(fail("unsupported-construct", format!("unbound variable ${v}"))),
            Term::App { name, arg } => match self.sig.function(name) {
                Some(f) if matches!(f.kind, FunctionKind::Static | FunctionKind::Derived) => {
                    let def = self
                        .spec
                        .definitions
                        .iter()
                        .find(|d| d.name == *name)
                        .ok_or_else(|| fail("missing-definition", format!("'{name}' has no definition")))?;
                    let body = match (&def.param, arg) {
                        (Some(p), Some(a)) => def.body.substitute(&p.var, a),
                        _ => def.body.clone(),
                    };
                    self.depth += 1;
                    if self.depth > 256 {
                        return Err(fail("unsupported-construct", format!("definition of '{name}' nests too deeply")));
                    }
                    let e = self.term(&body);
                    self.depth -= 1;
                    e?
                }
                Some(_) => match arg {
                    None => self.var(&Location { function: name.clone(), arg: None })?,
                    Some(a) => {
                        if let Some(v) = const_value(a, self.sig) {
                            self.var(&Location { function: name.clone(), arg: Some(v) })?
                        } else {
                            let sel = self.term(a)?;
                            let values = self.arg_values(name);
                            let mut arms = Vec::new();
                            for (i, v) in values.iter().enumerate() {
                                let cond = if i + 1 == values.len() {
                                    Expr::Bool(true)
                                } else {
                                    Expr::bin(BinOp::Eq, sel.clone(), self.literal(v))
                                };
                                arms.push((cond, self.var(&Location { function: name.clone(), arg: Some(v.clone()) })?));
                            }
                            Expr::Case(arms)
                        }
                    }
                },
                None if self.sig.enum_domain_of(name).is_some() => self.literal(&Value::Enum(name.clone())),
                None => return Err(fail("unknown-symbol", format!("unknown symbol '{name}'"))),
            },
            Term::Arith { op, lhs, rhs } => {
                let op = match op {
                    ArithOp::Add => BinOp::Add,
                    ArithOp::Sub => BinOp::Sub,
                    ArithOp::Mod => BinOp::Mod,
                };
                Expr::bin(op, self.term(lhs)?, self.term(rhs)?)
            }
            Term::Cmp { op, lhs, rhs } => {
                let op = match op {
                    CmpOp::Eq => BinOp::Eq,
                    CmpOp::Ne => BinOp::Ne,
                    CmpOp::Lt => BinOp::Lt,
                    CmpOp::Le => BinOp::Le,
                    CmpOp::Gt => BinOp::Gt,
                    CmpOp::Ge => BinOp::Ge,
                };
                Expr::bin(op, self.term(lhs)?, self.term(rhs)?)
            }
            Term::Not(inner) => Expr::negate(self.term(inner)?),
            Term::Logic { op, lhs, rhs } => Expr::bin(bool_op(*op), self.term(lhs)?, self.term(rhs)?),
        })
    }

    fn formula(&mut self, f: &Formula) -> Result<Expr, Diagnostics> {
        Ok(match f {
            Formula::Atom(t) => self.term(t)?,
            Formula::Not(g) => Expr::negate(self.formula(g)?),
            Formula::Logic { op, lhs, rhs } => Expr::bin(bool_op(*op), self.formula(lhs)?, self.formula(rhs)?),
            Formula::Ctl(op, g) => Expr::Temporal(Temporal::Ctl(*op), Box::new(self.formula(g)?)),
            Formula::Ltl(op, g) => Expr::Temporal(Temporal::Ltl(*op), Box::new(self.formula(g)?)),
            Formula::CtlUntil { quant, lhs, rhs } => Expr::Until {
                quant: Some(*quant),
                lhs: Box::new(self.formula(lhs)?),
                rhs: Box::new(self.formula(rhs)?),
            },
            Formula::LtlUntil { lhs, rhs } => {
                Expr::Until { quant: None, lhs: Box::new(self.formula(lhs)?), rhs: Box::new(self.formula(rhs)?) }
            }
        })
    }

    fn rule(&mut self, r: &Rule, guard: Expr, out: &mut IndexMap<String, Vec<(Expr, Expr)>>) -> Result<(), Diagnostics> {
        match r {
            Rule::Update { function, arg, value } => {
                let v = self.term(value)?;
                let mut push = |loc: Location, g: Expr, this: &Self| -> Result<(), Diagnostics> {
                    let Expr::Ident(name) = this.var(&loc)? else { unreachable!("variables are identifiers") };
                    out.entry(name).or_default().push((g, v.clone()));
                    Ok(())
                };
                match arg {
                    None => push(Location { function: function.clone(), arg: None }, guard, self)?,
                    Some(a) => match const_value(a, self.sig) {
                        Some(c) => push(Location { function: function.clone(), arg: Some(c) }, guard, self)?,
                        None => {
                            let sel = self.term(a)?;
                            for val in self.arg_values(function) {
                                let g = Expr::and(guard.clone(), Expr::bin(BinOp::Eq, sel.clone(), self.literal(&val)));
                                push(Location { function: function.clone(), arg: Some(val) }, g, self)?;
                            }
                        }
                    },
                }
            }
            Rule::Par(rules) => {
                for r in rules {
                    self.rule(r, guard.clone(), out)?;
                }
            }
            Rule::If { guard: c, then, otherwise } => {
                let c = self.term(c)?;
                self.rule(then, Expr::and(guard.clone(), c.clone()), out)?;
                if let Some(e) = otherwise {
                    self.rule(e, Expr::and(guard, Expr::negate(c)), out)?;
                }
            }
            Rule::Call(name) => {
                let body = &self
                    .spec
                    .macro_rule(name)
                    .ok_or_else(|| fail("unknown-macro", format!("unknown macro rule '{name}'")))?
                    .body;
                self.depth += 1;
                if self.depth > 256 {
                    return Err(fail("unsupported-construct", format!("macro '{name}' nests too deeply")));
                }
                let r = self.rule(body, guard, out);
                self.depth -= 1;
                r?;
            }
        }
        Ok(())
    }
}

fn bool_op(op: BoolOp) -> BinOp {
    match op {
        BoolOp::And => BinOp::And,
        BoolOp::Or => BinOp::Or,
        BoolOp::Implies => BinOp::Implies,
        BoolOp::Iff => BinOp::Iff,
    }
}

/// Emits a NuSMV model with one `SPEC`/`LTLSPEC` line per property.
pub fn emit_smv(spec: &AsmSpecification) -> Result<SmvModel, Diagnostics> {
    typecheck_spec(spec).into_result()?;
    let machine = Machine::new(spec).map_err(|e| e.to_diagnostics())?;
    let limits = Limits { max_states: PRESCAN_STATES, ..Limits::default() };
    match build_from_machine(machine.clone(), &limits) {
        Ok(_) | Err(CheckError::StateLimitExceeded(_)) | Err(CheckError::TimeLimitExceeded(_)) => {}
        Err(e) => {
            return Err(fail(e.code(), format!("cannot be expressed in SMV: {e}")));
        }
    }
    let sig = machine.signature();

    // Names.
    let mut vars: IndexMap<Location, String> = IndexMap::new();
    let mut program = SmvProgram::default();
    for f in sig.functions.values().filter(|f| matches!(f.kind, FunctionKind::Controlled | FunctionKind::Monitored)) {
        let base = sanitize_var(&f.name);
        let ty = match &sig.domains[&f.result_domain].kind {
            DomainKind::Boolean => SmvType::Boolean,
            DomainKind::IntRange { lo, hi } => SmvType::Range(*lo, *hi),
            DomainKind::Enumeration(vs) => SmvType::Enum(vs.iter().map(|v| sanitize_const(v)).collect()),
        };
        match &f.arg_domain {
            None => {
                vars.insert(Location { function: f.name.clone(), arg: None }, base.clone());
                program.vars.push((base, ty));
            }
            Some(d) => {
                for (i, a) in sig.domains[d].values().into_iter().enumerate() {
                    let name = format!("{base}_a{i}");
                    vars.insert(Location { function: f.name.clone(), arg: Some(a) }, name.clone());
                    program.vars.push((name, ty.clone()));
                }
            }
        }
    }
    let mut consts = IndexMap::new();
    for d in sig.domains.values() {
        if let DomainKind::Enumeration(vs) = &d.kind {
            for v in vs {
                consts.insert(v.clone(), sanitize_const(v));
            }
        }
    }
    let mut seen = HashSet::new();
    for n in vars.values().chain(consts.values()) {
        if !seen.insert(n.as_str()) {
            return Err(fail("name-collision", format!("SMV name '{n}' is used twice after sanitization")));
        }
    }

    let mut em = Emitter { spec, sig, vars, consts, depth: 0 };

    // Initial values of controlled variables.
    let init = &machine.initial_states()[0];
    for (loc, v) in machine.controlled_valuation(init) {
        let name = em.vars[&loc].clone();
        program.inits.push((name, em.literal(&v)));
    }

    // Guarded updates, then one case block per controlled variable.
    let mut updates: IndexMap<String, Vec<(Expr, Expr)>> = IndexMap::new();
    em.rule(&spec.main_rule.body, Expr::Bool(true), &mut updates)?;
    for loc in machine.locations().take(machine.controlled_count()) {
        let name = em.vars[loc].clone();
        let mut arms = updates.shift_remove(&name).unwrap_or_default();
        let next = if arms.is_empty() {
            Expr::Ident(name.clone())
        } else if arms.len() == 1 && arms[0].0 == Expr::Bool(true) {
            arms.remove(0).1
        } else {
            arms.push((Expr::Bool(true), Expr::Ident(name.clone())));
            Expr::Case(arms)
        };
        program.nexts.push((name, next));
    }

    let mut property_lines = Vec::new();
    for p in &spec.properties {
        let e = em.formula(&p.formula)?;
        let kind = match p.logic {
            Logic::Ctl => SpecKind::Ctl,
            Logic::Ltl => SpecKind::Ltl,
        };
        let kw = if kind == SpecKind::Ctl { "SPEC" } else { "LTLSPEC" };
        property_lines.push((p.clone(), format!("{kw} {}", print_expr(&e))));
        program.specs.push((kind, e));
    }

    let var_map = em.vars.iter().map(|(l, n)| (l.to_string(), n.clone())).collect();
    Ok(SmvModel { text: print_program(&program), program, var_map, property_lines })
}

/// Parses the emitted text with the internal grammar and checks that every
/// identifier and every `var_map` target is declared.
pub fn emitted_roundtrip_check(model: &SmvModel) -> Diagnostics {
    let mut diags = Diagnostics::new();
    let prog = match parse_smv(&model.text) {
        Ok(p) => p,
        Err(d) => return d.into(),
    };
    let declared: HashSet<&str> = prog.vars.iter().map(|(n, _)| n.as_str()).collect();
    let consts: HashSet<&str> = prog
        .vars
        .iter()
        .filter_map(|(_, t)| match t {
            SmvType::Enum(vs) => Some(vs.iter().map(String::as_str)),
            _ => None,
        })
        .flatten()
        .collect();
    let mut reported = HashSet::new();
    let mut undeclared = |name: &str, diags: &mut Diagnostics| {
        if !declared.contains(name) && !consts.contains(name) && reported.insert(name.to_string()) {
            diags.push(Diagnostic::error("undeclared-variable", format!("undeclared variable '{name}'")));
        }
    };
    for (n, e) in prog.inits.iter().chain(&prog.nexts) {
        undeclared(n, &mut diags);
        let mut ids = Vec::new();
        e.idents(&mut ids);
        for id in ids {
            undeclared(id, &mut diags);
        }
    }
    for (_, e) in &prog.specs {
        let mut ids = Vec::new();
        e.idents(&mut ids);
        for id in ids {
            undeclared(id, &mut diags);
        }
    }
    for target in model.var_map.values() {
        undeclared(target, &mut diags);
    }
    if diags.is_empty() && prog != model.program {
        diags.push(Diagnostic::error("smv-roundtrip", "emitted text does not re-parse to the emitted program"));
    }
    diags
}

/// Runs NuSMV on a model and returns one verdict per specification, in
/// order.
pub fn nusmv_verdicts(model: &SmvModel, executable: &Path) -> Result<Vec<bool>, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let file = dir.path().join("model.smv");
    std::fs::write(&file, &model.text).map_err(|e| e.to_string())?;
    let out = Command::new(executable).arg(&file).output().map_err(|e| format!("cannot run {}: {e}", executable.display()))?;
    let stdout = String::from_utf8_lossy(&out.stdout);
    let verdicts: Vec<bool> = stdout
        .lines()
        .filter(|l| l.starts_with("-- specification"))
        .map(|l| l.trim_end().ends_with("is true"))
        .collect();
    if verdicts.len() != model.property_lines.len() {
        return Err(format!(
            "NuSMV reported {} verdicts for {} specifications:\n{}{}",
            verdicts.len(),
            model.property_lines.len(),
            stdout,
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(verdicts)
}

#[cfg(test)]
mod tests;

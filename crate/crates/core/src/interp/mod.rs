//! Operational semantics: states, update sets, steps and scenario runs.
//!
//! A [`Machine`] is compiled once from a type-checked specification. Every
//! location (a function name plus an optional argument) becomes a slot in a
//! flat `i64` vector: Booleans are 0/1, integers are themselves and
//! enumeration constants are their index in the domain. Controlled slots come
//! first in declaration order, monitored slots follow ordered by function
//! name. Monitored values are part of the state and are re-chosen at every
//! step.

mod compile;
mod scenario;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::diag::{Diagnostic, Diagnostics};
use crate::lang::*;
use crate::signature::{extract_signature, typecheck_condition, typecheck_spec, Signature};

pub use compile::Condition;
use compile::{CRule, Compiler};
pub use scenario::{run_scenario, FailedCheck, ScenarioResult};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InterpError {
    #[error("specification does not type-check:\n{0}")]
    Invalid(Diagnostics),
    #[error("controlled function '{0}' has no initial value")]
    MissingInit(String),
    #[error("inconsistent update of {location}: {first} and {second}")]
    InconsistentUpdate { location: String, first: Value, second: Value },
    #[error("mod by zero")]
    DivisionByZero,
    #[error("integer overflow")]
    Overflow,
    #[error("value {value} written to {location} is outside domain {domain}")]
    DomainViolation { location: String, value: String, domain: String },
    #[error("argument {value} of '{function}' is outside domain {domain}")]
    ArgumentOutOfDomain { function: String, value: String, domain: String },
    #[error("cannot set {kind} function '{function}'; only monitored functions can be set")]
    SetToNonMonitored { function: String, kind: &'static str },
    #[error("set value {value} for '{function}' is outside domain {domain}")]
    SetOutOfDomain { function: String, value: String, domain: String },
    #[error("scenario term is invalid:\n{0}")]
    InvalidScenario(Diagnostics),
    #[error("monitored input space of {0} valuations is too large")]
    InputSpaceTooLarge(u128),
}

impl InterpError {
    pub fn code(&self) -> &'static str {
        match self {
            InterpError::Invalid(_) => "invalid-spec",
            InterpError::MissingInit(_) => "missing-init",
            InterpError::InconsistentUpdate { .. } => "inconsistent-update",
            InterpError::DivisionByZero => "division-by-zero",
            InterpError::Overflow => "overflow",
            InterpError::DomainViolation { .. } => "domain-violation",
            InterpError::ArgumentOutOfDomain { .. } => "argument-out-of-domain",
            InterpError::SetToNonMonitored { kind: "controlled", .. } => "set-to-controlled",
            InterpError::SetToNonMonitored { .. } => "set-to-non-monitored",
            InterpError::SetOutOfDomain { .. } => "set-out-of-domain",
            InterpError::InvalidScenario(_) => "invalid-scenario",
            InterpError::InputSpaceTooLarge(_) => "input-space-too-large",
        }
    }

    pub fn to_diagnostics(&self) -> Diagnostics {
        match self {
            InterpError::Invalid(d) | InterpError::InvalidScenario(d) => d.clone(),
            other => Diagnostics::single(Diagnostic::error(other.code(), other.to_string())),
        }
    }
}

/// Upper bound on the number of monitored valuations per step.
const MAX_INPUTS: u128 = 1 << 20;

/// A function location: `f` or `f(a)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Location {
    pub function: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arg: Option<Value>,
}

impl Location {
    /// The term denoting this location.
    pub fn to_term(&self) -> Term {
        Term::app(self.function.clone(), self.arg.as_ref().map(Value::to_term))
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.arg {
            Some(a) => write!(f, "{}({a})", self.function),
            None => f.write_str(&self.function),
        }
    }
}

/// Value encoding of one finite domain.
#[derive(Debug, Clone)]
pub(crate) struct Codec {
    pub decl: DomainDecl,
    pub lo: i64,
    pub size: i64,
}

impl Codec {
    fn new(decl: &DomainDecl) -> Codec {
        let (lo, size) = match &decl.kind {
            DomainKind::IntRange { lo, hi } => (*lo, hi - lo + 1),
            DomainKind::Enumeration(vs) => (0, vs.len() as i64),
            DomainKind::Boolean => (0, 2),
        };
        Codec { decl: decl.clone(), lo, size }
    }

    pub fn contains(&self, raw: i64) -> bool {
        raw >= self.lo && raw - self.lo < self.size
    }

    pub fn decode(&self, raw: i64) -> Value {
        match &self.decl.kind {
            DomainKind::Boolean => Value::Bool(raw != 0),
            DomainKind::IntRange { .. } => Value::Int(raw),
            DomainKind::Enumeration(vs) => Value::Enum(vs.get(raw as usize).cloned().unwrap_or_default()),
        }
    }

    pub fn encode(&self, v: &Value) -> Option<i64> {
        match (&self.decl.kind, v) {
            (DomainKind::Boolean, Value::Bool(b)) => Some(i64::from(*b)),
            (DomainKind::IntRange { lo, hi }, Value::Int(i)) if lo <= i && i <= hi => Some(*i),
            (DomainKind::Enumeration(vs), Value::Enum(s)) => vs.iter().position(|x| x == s).map(|p| p as i64),
            _ => None,
        }
    }

    /// Renders a raw value that may lie outside the domain.
    pub fn show(&self, raw: i64) -> String {
        if self.contains(raw) || matches!(self.decl.kind, DomainKind::IntRange { .. }) {
            self.decode(raw).to_string()
        } else {
            raw.to_string()
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct SlotInfo {
    pub location: Location,
    pub codec: Codec,
}

/// A full valuation of every location, encoded per slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State(pub Box<[i64]>);

/// Updates produced by one rule evaluation, keyed by location.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct UpdateSet {
    pub updates: BTreeMap<Location, Value>,
}

impl UpdateSet {
    pub fn is_empty(&self) -> bool {
        self.updates.is_empty()
    }

    pub fn len(&self) -> usize {
        self.updates.len()
    }
}

/// A compiled, executable specification.
#[derive(Debug, Clone)]
pub struct Machine {
    spec: AsmSpecification,
    sig: Signature,
    pub(crate) slots: Vec<SlotInfo>,
    n_controlled: usize,
    pub(crate) index: HashMap<Location, usize>,
    main: CRule,
    init: Vec<i64>,
    inputs: Vec<Vec<i64>>,
}

impl Machine {
    /// Type-checks and compiles a specification.
    pub fn new(spec: &AsmSpecification) -> Result<Machine, InterpError> {
        let diags = typecheck_spec(spec);
        if !diags.is_empty() {
            return Err(InterpError::Invalid(diags));
        }
        let sig = extract_signature(spec).map_err(InterpError::Invalid)?;
        let codec_of = |dom: &str| Codec::new(&sig.domains[dom]);

        let mut slots = Vec::new();
        let push_fn = |f: &FunctionDecl, slots: &mut Vec<SlotInfo>| {
            let codec = codec_of(&f.result_domain);
            match &f.arg_domain {
                None => slots.push(SlotInfo {
                    location: Location { function: f.name.clone(), arg: None },
                    codec,
                }),
                Some(d) => {
                    for a in sig.domains[d].values() {
                        slots.push(SlotInfo {
                            location: Location { function: f.name.clone(), arg: Some(a) },
                            codec: codec.clone(),
                        });
                    }
                }
            }
        };
        for f in sig.functions.values().filter(|f| f.kind == FunctionKind::Controlled) {
            push_fn(f, &mut slots);
        }
        let n_controlled = slots.len();
        let mut monitored: Vec<&FunctionDecl> =
            sig.functions.values().filter(|f| f.kind == FunctionKind::Monitored).collect();
        monitored.sort_by(|a, b| a.name.cmp(&b.name));
        for f in monitored {
            push_fn(f, &mut slots);
        }
        let index: HashMap<Location, usize> = slots.iter().enumerate().map(|(i, s)| (s.location.clone(), i)).collect();

        // Initial controlled values.
        let mut init: Vec<Option<i64>> = vec![None; n_controlled];
        for decl in &spec.init {
            let f = &sig.functions[&decl.name];
            let codec = codec_of(&f.result_domain);
            let raw = |v: &Term| -> Option<i64> {
                crate::signature::const_value(v, &sig).and_then(|v| codec.encode(&v))
            };
            match (&f.arg_domain, &decl.param) {
                (None, _) => {
                    let slot = index[&Location { function: f.name.clone(), arg: None }];
                    init[slot] = raw(&decl.value);
                }
                (Some(d), Some(p)) => {
                    for a in sig.domains[d].values() {
                        let v = decl.value.substitute(&p.var, &a.to_term());
                        let slot = index[&Location { function: f.name.clone(), arg: Some(a) }];
                        init[slot] = raw(&v);
                    }
                }
                (Some(_), None) => {}
            }
        }
        let mut init_raw = Vec::with_capacity(n_controlled);
        for (i, v) in init.iter().enumerate() {
            match v {
                Some(v) => init_raw.push(*v),
                None => return Err(InterpError::MissingInit(slots[i].location.to_string())),
            }
        }

        // Cartesian product of monitored values, first slot most significant.
        let sizes: Vec<i64> = slots[n_controlled..].iter().map(|s| s.codec.size).collect();
        let total: u128 = sizes.iter().map(|s| *s as u128).product();
        if total > MAX_INPUTS {
            return Err(InterpError::InputSpaceTooLarge(total));
        }
        let mut inputs = Vec::with_capacity(total as usize);
        let mut cur = vec![0i64; sizes.len()];
        for _ in 0..total {
            inputs.push(cur.iter().zip(&slots[n_controlled..]).map(|(k, s)| s.codec.lo + k).collect());
            for j in (0..cur.len()).rev() {
                cur[j] += 1;
                if cur[j] < sizes[j] {
                    break;
                }
                cur[j] = 0;
            }
        }

        let mut machine = Machine {
            spec: spec.clone(),
            sig,
            slots,
            n_controlled,
            index,
            main: CRule::Par(Vec::new()),
            init: init_raw,
            inputs,
        };
        let main = Compiler::new(&machine).rule(&spec.main_rule.body)?;
        machine.main = main;
        Ok(machine)
    }

    pub fn spec(&self) -> &AsmSpecification {
        &self.spec
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn slot_count(&self) -> usize {
        self.slots.len()
    }

    pub fn controlled_count(&self) -> usize {
        self.n_controlled
    }

    /// All locations in slot order.
    pub fn locations(&self) -> impl Iterator<Item = &Location> {
        self.slots.iter().map(|s| &s.location)
    }

    pub fn slot_of(&self, location: &Location) -> Option<usize> {
        self.index.get(location).copied()
    }

    /// Every monitored valuation in enumeration order.
    pub fn inputs(&self) -> &[Vec<i64>] {
        &self.inputs
    }

    /// One state per monitored valuation, all with the initial controlled part.
    pub fn initial_states(&self) -> Vec<State> {
        self.inputs.iter().map(|m| self.compose(&self.init, m)).collect()
    }

    fn compose(&self, controlled: &[i64], monitored: &[i64]) -> State {
        let mut v = Vec::with_capacity(self.slots.len());
        v.extend_from_slice(controlled);
        v.extend_from_slice(monitored);
        State(v.into_boxed_slice())
    }

    /// Raw updates of the main rule, slot-indexed and sorted.
    pub(crate) fn raw_updates(&self, s: &State) -> Result<Vec<(usize, i64)>, InterpError> {
        let mut out = Vec::new();
        self.main.collect(self, &s.0, &mut out)?;
        out.sort_unstable();
        let mut dedup: Vec<(usize, i64)> = Vec::with_capacity(out.len());
        for (slot, v) in out {
            if let Some(&(ps, pv)) = dedup.last() {
                if ps == slot {
                    if pv != v {
                        let info = &self.slots[slot];
                        return Err(InterpError::InconsistentUpdate {
                            location: info.location.to_string(),
                            first: info.codec.decode(pv),
                            second: info.codec.decode(v),
                        });
                    }
                    continue;
                }
            }
            let info = &self.slots[slot];
            if !info.codec.contains(v) {
                return Err(InterpError::DomainViolation {
                    location: info.location.to_string(),
                    value: info.codec.show(v),
                    domain: info.codec.decl.name.clone(),
                });
            }
            dedup.push((slot, v));
        }
        Ok(dedup)
    }

    /// The update set of the main rule in `s`. Unchanged locations are absent.
    pub fn compute_update_set(&self, s: &State) -> Result<UpdateSet, InterpError> {
        let raw = self.raw_updates(s)?;
        Ok(UpdateSet {
            updates: raw
                .into_iter()
                .map(|(slot, v)| (self.slots[slot].location.clone(), self.slots[slot].codec.decode(v)))
                .collect(),
        })
    }

    /// Controlled part after one step from `s`.
    pub fn next_controlled(&self, s: &State) -> Result<Vec<i64>, InterpError> {
        let mut next = s.0[..self.n_controlled].to_vec();
        for (slot, v) in self.raw_updates(s)? {
            next[slot] = v;
        }
        Ok(next)
    }

    /// Successor with the given monitored valuation.
    pub fn step_with(&self, s: &State, monitored: &[i64]) -> Result<State, InterpError> {
        Ok(self.compose(&self.next_controlled(s)?, monitored))
    }

    /// One successor per monitored valuation, in enumeration order.
    pub fn successors(&self, s: &State) -> Result<Vec<State>, InterpError> {
        let next = self.next_controlled(s)?;
        Ok(self.inputs.iter().map(|m| self.compose(&next, m)).collect())
    }

    pub fn controlled<'s>(&self, s: &'s State) -> &'s [i64] {
        &s.0[..self.n_controlled]
    }

    pub fn monitored<'s>(&self, s: &'s State) -> &'s [i64] {
        &s.0[self.n_controlled..]
    }

    pub fn value(&self, s: &State, slot: usize) -> Value {
        self.slots[slot].codec.decode(s.0[slot])
    }

    /// Decoded `(location, value)` pairs in slot order.
    pub fn valuation(&self, s: &State) -> Vec<(Location, Value)> {
        (0..self.slots.len()).map(|i| (self.slots[i].location.clone(), self.value(s, i))).collect()
    }

    pub fn controlled_valuation(&self, s: &State) -> Vec<(Location, Value)> {
        (0..self.n_controlled).map(|i| (self.slots[i].location.clone(), self.value(s, i))).collect()
    }

    pub fn monitored_valuation(&self, s: &State) -> Vec<(Location, Value)> {
        (self.n_controlled..self.slots.len()).map(|i| (self.slots[i].location.clone(), self.value(s, i))).collect()
    }

    /// `sec=0, min=0, h=0, signal=false`
    pub fn format_state(&self, s: &State) -> String {
        self.valuation(s).iter().map(|(l, v)| format!("{l}={v}")).collect::<Vec<_>>().join(", ")
    }

    /// Builds a state from decoded values; every location must be present.
    pub fn state_from(&self, values: &[(Location, Value)]) -> Option<State> {
        let mut raw = vec![None; self.slots.len()];
        for (loc, v) in values {
            let slot = self.slot_of(loc)?;
            raw[slot] = Some(self.slots[slot].codec.encode(v)?);
        }
        raw.into_iter().collect::<Option<Vec<_>>>().map(|v| State(v.into_boxed_slice()))
    }

    /// Type-checks and compiles a Boolean term for repeated evaluation.
    pub fn condition(&self, term: &Term) -> Result<Condition, Diagnostics> {
        let diags = typecheck_condition(term, &self.sig);
        if !diags.is_empty() {
            return Err(diags);
        }
        Compiler::new(self)
            .expr(term)
            .map(|e| Condition { expr: e, term: term.clone() })
            .map_err(|e| e.to_diagnostics())
    }

    pub fn eval(&self, c: &Condition, s: &State) -> Result<bool, InterpError> {
        c.expr.eval(self, &s.0).map(|v| v != 0)
    }

    /// The term `f = v and ...` over the controlled part of `s`.
    pub fn controlled_term(&self, s: &State) -> Term {
        Term::conjunction(self.controlled_valuation(s).into_iter().map(|(l, v)| Term::eq(l.to_term(), v.to_term())))
            .unwrap_or(Term::Bool(true))
    }
}

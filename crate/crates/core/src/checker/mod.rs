//! Explicit-state verification.
//!
//! [`build_kripke`] explores the reachable state graph breadth-first;
//! [`check_ctl`] labels it bottom-up over the `{EX, EU, EG}` basis;
//! [`check_invariant`] is a reachability scan with shortest counterexamples;
//! [`check_ltl_bounded`] searches lasso-shaped paths up to a bound.

mod ctl;
mod ltl;

use std::collections::{HashMap, VecDeque};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, OnceLock};
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::diag::{Diagnostic, Diagnostics};
use crate::interp::{InterpError, Location, Machine, State};
use crate::lang::*;
use crate::signature::{extract_signature, typecheck_formula, TypedFormula};

pub use ctl::{check_ctl, label_ctl};
pub use ltl::check_ltl_bounded;

/// Default bound for LTL properties checked through [`verify_spec`].
pub const DEFAULT_LTL_BOUND: usize = 12;

#[derive(Debug, Clone)]
pub struct Limits {
    pub max_states: usize,
    pub max_time: Duration,
    pub ltl_bound: usize,
    /// Polled during exploration; setting it aborts the build.
    pub cancel: Option<Arc<AtomicBool>>,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_states: 2_000_000,
            max_time: Duration::from_secs(60),
            ltl_bound: DEFAULT_LTL_BOUND,
            cancel: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("state limit of {0} states exceeded")]
    StateLimitExceeded(usize),
    #[error("time limit of {0:?} exceeded")]
    TimeLimitExceeded(Duration),
    #[error("exploration cancelled")]
    Cancelled,
    #[error("{source} (in state {state})")]
    Interp { state: String, source: InterpError },
    #[error("{0}")]
    Spec(InterpError),
    #[error("property is invalid:\n{0}")]
    Formula(Diagnostics),
    #[error("LTL bound must be at least 1")]
    InvalidBound,
    #[error("{0}")]
    Structure(String),
}

impl CheckError {
    pub fn code(&self) -> &'static str {
        match self {
            CheckError::StateLimitExceeded(_) => "state-limit-exceeded",
            CheckError::TimeLimitExceeded(_) => "time-limit-exceeded",
            CheckError::Cancelled => "cancelled",
            CheckError::Interp { source, .. } => source.code(),
            CheckError::Spec(e) => e.code(),
            CheckError::Formula(_) => "invalid-property",
            CheckError::InvalidBound => "invalid-bound",
            CheckError::Structure(_) => "invalid-structure",
        }
    }

    /// Limit errors map to a dedicated exit code in the CLI.
    pub fn is_limit(&self) -> bool {
        matches!(self, CheckError::StateLimitExceeded(_) | CheckError::TimeLimitExceeded(_) | CheckError::Cancelled)
    }

    pub fn to_diagnostics(&self) -> Diagnostics {
        match self {
            CheckError::Formula(d) => d.clone(),
            CheckError::Spec(e) => e.to_diagnostics(),
            other => Diagnostic::error(other.code(), other.to_string()).into(),
        }
    }
}

/// How atoms are evaluated: through the compiled machine, or against a
/// table of named Boolean propositions (hand-built structures).
#[derive(Debug)]
enum Atoms {
    Machine(Box<Machine>),
    Table(Vec<String>),
}

/// A finite transition system with a total transition relation.
#[derive(Debug)]
pub struct KripkeStructure {
    atoms: Atoms,
    states: Vec<State>,
    initial: Vec<u32>,
    offsets: Vec<u32>,
    targets: Vec<u32>,
    preds: OnceLock<(Vec<u32>, Vec<u32>)>,
    atom_cache: Mutex<HashMap<Term, Arc<[bool]>>>,
    build_time: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Stats {
    pub states: usize,
    pub transitions: usize,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum TraceKind {
    FinitePath,
    Lasso { loop_start: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvidenceRole {
    Counterexample,
    Witness,
}

/// A path through the structure.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub kind: TraceKind,
    pub role: EvidenceRole,
    /// State indices into the structure.
    pub indices: Vec<u32>,
    pub states: Vec<State>,
    /// A term that holds in the final state and demonstrates the evidence,
    /// e.g. the negation of the offending atom of a counterexample.
    pub final_condition: Option<Term>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Number of transitions along the path (loop closure excluded).
    pub fn steps(&self) -> usize {
        self.states.len().saturating_sub(1)
    }

    pub fn loop_start(&self) -> Option<usize> {
        match self.kind {
            TraceKind::Lasso { loop_start } => Some(loop_start),
            TraceKind::FinitePath => None,
        }
    }

    /// Monitored valuation chosen at every position.
    pub fn monitored_choices(&self, m: &Machine) -> Vec<Vec<(Location, Value)>> {
        self.states.iter().map(|s| m.monitored_valuation(s)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "outcome", content = "bound")]
pub enum Outcome {
    Holds,
    Fails,
    NoViolationUpTo(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub outcome: Outcome,
    pub evidence: Option<Trace>,
    pub stats: Stats,
}

impl Verdict {
    pub fn holds(&self) -> bool {
        self.outcome == Outcome::Holds
    }

    pub fn fails(&self) -> bool {
        self.outcome == Outcome::Fails
    }

    pub fn counterexample(&self) -> Option<&Trace> {
        self.evidence.as_ref().filter(|t| t.role == EvidenceRole::Counterexample)
    }

    pub fn witness(&self) -> Option<&Trace> {
        self.evidence.as_ref().filter(|t| t.role == EvidenceRole::Witness)
    }
}

/// Explores the reachable states of a specification breadth-first.
///
/// State indices follow BFS order with successors in monitored enumeration
/// order, so they are identical across runs.
pub fn build_kripke(spec: &AsmSpecification, limits: &Limits) -> Result<KripkeStructure, CheckError> {
    let machine = Machine::new(spec).map_err(CheckError::Spec)?;
    build_from_machine(machine, limits)
}

pub fn build_from_machine(machine: Machine, limits: &Limits) -> Result<KripkeStructure, CheckError> {
    let start = Instant::now();
    let mut index: HashMap<State, u32> = HashMap::new();
    let mut states: Vec<State> = Vec::new();
    let mut initial = Vec::new();
    let intern = |s: State, states: &mut Vec<State>, index: &mut HashMap<State, u32>| -> Result<u32, CheckError> {
        if let Some(&i) = index.get(&s) {
            return Ok(i);
        }
        if states.len() >= limits.max_states {
            return Err(CheckError::StateLimitExceeded(limits.max_states));
        }
        let i = states.len() as u32;
        index.insert(s.clone(), i);
        states.push(s);
        Ok(i)
    };
    for s in machine.initial_states() {
        let i = intern(s, &mut states, &mut index)?;
        if !initial.contains(&i) {
            initial.push(i);
        }
    }
    let mut offsets = vec![0u32];
    let mut targets = Vec::new();
    let mut next = 0usize;
    while next < states.len() {
        if next & 1023 == 0 {
            if start.elapsed() > limits.max_time {
                return Err(CheckError::TimeLimitExceeded(limits.max_time));
            }
            if limits.cancel.as_ref().is_some_and(|c| c.load(Ordering::Relaxed)) {
                return Err(CheckError::Cancelled);
            }
        }
        let succ = machine
            .successors(&states[next])
            .map_err(|e| CheckError::Interp { state: machine.format_state(&states[next]), source: e })?;
        let mut row: Vec<u32> = Vec::with_capacity(succ.len());
        for s in succ {
            let t = intern(s, &mut states, &mut index)?;
            if !row.contains(&t) {
                row.push(t);
            }
        }
        targets.extend(row);
        offsets.push(targets.len() as u32);
        next += 1;
    }
    Ok(KripkeStructure {
        atoms: Atoms::Machine(Box::new(machine)),
        states,
        initial,
        offsets,
        targets,
        preds: OnceLock::new(),
        atom_cache: Mutex::new(HashMap::new()),
        build_time: start.elapsed(),
    })
}

impl KripkeStructure {
    /// A structure over named Boolean propositions. `labels[s][p]` is the
    /// value of `props[p]` in state `s`; atoms may combine propositions with
    /// Boolean connectives.
    pub fn from_parts(
        props: &[&str],
        labels: Vec<Vec<bool>>,
        initial: Vec<u32>,
        successors: Vec<Vec<u32>>,
    ) -> Result<KripkeStructure, CheckError> {
        let n = labels.len();
        if successors.len() != n || initial.is_empty() {
            return Err(CheckError::Structure("state, label and successor counts must agree".into()));
        }
        if initial.iter().any(|&i| i as usize >= n) {
            return Err(CheckError::Structure("initial state out of range".into()));
        }
        let mut offsets = vec![0u32];
        let mut targets = Vec::new();
        for (s, row) in successors.iter().enumerate() {
            if row.is_empty() {
                return Err(CheckError::Structure(format!("state {s} has no successor")));
            }
            let mut seen = Vec::new();
            for &t in row {
                if t as usize >= n {
                    return Err(CheckError::Structure(format!("edge {s} -> {t} leaves the structure")));
                }
                if !seen.contains(&t) {
                    seen.push(t);
                }
            }
            targets.extend(seen);
            offsets.push(targets.len() as u32);
        }
        let states = labels
            .into_iter()
            .map(|l| State(l.into_iter().map(i64::from).collect::<Vec<_>>().into_boxed_slice()))
            .collect();
        Ok(KripkeStructure {
            atoms: Atoms::Table(props.iter().map(|p| p.to_string()).collect()),
            states,
            initial,
            offsets,
            targets,
            preds: OnceLock::new(),
            atom_cache: Mutex::new(HashMap::new()),
            build_time: Duration::ZERO,
        })
    }

    pub fn machine(&self) -> Option<&Machine> {
        match &self.atoms {
            Atoms::Machine(m) => Some(m),
            Atoms::Table(_) => None,
        }
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn transition_count(&self) -> usize {
        self.targets.len()
    }

    pub fn state(&self, i: u32) -> &State {
        &self.states[i as usize]
    }

    pub fn initial(&self) -> &[u32] {
        &self.initial
    }

    pub fn successors(&self, i: u32) -> &[u32] {
        &self.targets[self.offsets[i as usize] as usize..self.offsets[i as usize + 1] as usize]
    }

    pub fn predecessors(&self, i: u32) -> &[u32] {
        let (offs, srcs) = self.preds.get_or_init(|| {
            let n = self.states.len();
            let mut count = vec![0u32; n + 1];
            for &t in &self.targets {
                count[t as usize + 1] += 1;
            }
            for k in 0..n {
                count[k + 1] += count[k];
            }
            let mut fill = count.clone();
            let mut srcs = vec![0u32; self.targets.len()];
            for s in 0..n {
                for &t in self.successors(s as u32) {
                    srcs[fill[t as usize] as usize] = s as u32;
                    fill[t as usize] += 1;
                }
            }
            (count, srcs)
        });
        &srcs[offs[i as usize] as usize..offs[i as usize + 1] as usize]
    }

    pub fn stats(&self, since: Instant) -> Stats {
        Stats {
            states: self.states.len(),
            transitions: self.targets.len(),
            elapsed_ms: (self.build_time + since.elapsed()).as_millis() as u64,
        }
    }

    /// States satisfying a temporal-free term, memoized per term.
    pub fn atom_labels(&self, term: &Term) -> Result<Arc<[bool]>, CheckError> {
        if let Some(hit) = self.atom_cache.lock().expect("atom cache poisoned").get(term) {
            return Ok(hit.clone());
        }
        let labels: Arc<[bool]> = match &self.atoms {
            Atoms::Machine(m) => {
                let cond = m.condition(term).map_err(CheckError::Formula)?;
                let mut out = Vec::with_capacity(self.states.len());
                for s in &self.states {
                    out.push(m.eval(&cond, s).map_err(|e| CheckError::Interp { state: m.format_state(s), source: e })?);
                }
                out.into()
            }
            Atoms::Table(props) => {
                let mut out = Vec::with_capacity(self.states.len());
                for s in &self.states {
                    out.push(eval_table(term, props, s)?);
                }
                out.into()
            }
        };
        self.atom_cache.lock().expect("atom cache poisoned").insert(term.clone(), labels.clone());
        Ok(labels)
    }

    pub fn format_state(&self, i: u32) -> String {
        match &self.atoms {
            Atoms::Machine(m) => m.format_state(&self.states[i as usize]),
            Atoms::Table(props) => props
                .iter()
                .zip(self.states[i as usize].0.iter())
                .map(|(p, v)| format!("{p}={}", *v != 0))
                .collect::<Vec<_>>()
                .join(", "),
        }
    }

    /// Shortest path from any source to a target, moving only through
    /// `allowed` states (the target itself need not be allowed).
    pub(crate) fn bfs_path(
        &self,
        sources: &[u32],
        allowed: impl Fn(u32) -> bool,
        target: impl Fn(u32) -> bool,
    ) -> Option<Vec<u32>> {
        let n = self.states.len();
        let mut parent = vec![u32::MAX; n];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        for &s in sources {
            if !seen[s as usize] {
                seen[s as usize] = true;
                queue.push_back(s);
            }
        }
        while let Some(s) = queue.pop_front() {
            if target(s) {
                let mut path = vec![s];
                let mut cur = s;
                while parent[cur as usize] != u32::MAX {
                    cur = parent[cur as usize];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            if !allowed(s) {
                continue;
            }
            for &t in self.successors(s) {
                if !seen[t as usize] {
                    seen[t as usize] = true;
                    parent[t as usize] = s;
                    queue.push_back(t);
                }
            }
        }
        None
    }

    pub(crate) fn trace(
        &self,
        indices: Vec<u32>,
        loop_start: Option<usize>,
        role: EvidenceRole,
        final_condition: Option<Term>,
    ) -> Trace {
        Trace {
            kind: match loop_start {
                Some(l) => TraceKind::Lasso { loop_start: l },
                None => TraceKind::FinitePath,
            },
            role,
            states: indices.iter().map(|&i| self.states[i as usize].clone()).collect(),
            indices,
            final_condition,
        }
    }
}

fn eval_table(t: &Term, props: &[String], s: &State) -> Result<bool, CheckError> {
    Ok(match t {
        Term::Bool(b) => *b,
        Term::App { name, arg: None } => match props.iter().position(|p| p == name) {
            Some(i) => s.0[i] != 0,
            None => return Err(CheckError::Structure(format!("unknown proposition '{name}'"))),
        },
        Term::Not(inner) => !eval_table(inner, props, s)?,
        Term::Cmp { op: op @ (CmpOp::Eq | CmpOp::Ne), lhs, rhs } => {
            (eval_table(lhs, props, s)? == eval_table(rhs, props, s)?) == (*op == CmpOp::Eq)
        }
        Term::Logic { op, lhs, rhs } => {
            let (l, r) = (eval_table(lhs, props, s)?, eval_table(rhs, props, s)?);
            match op {
                BoolOp::And => l && r,
                BoolOp::Or => l || r,
                BoolOp::Implies => !l || r,
                BoolOp::Iff => l == r,
            }
        }
        other => return Err(CheckError::Structure(format!("unsupported proposition '{}'", print_term(other)))),
    })
}

/// `AG term` as a reachability scan, with a shortest counterexample.
pub fn check_invariant(ks: &KripkeStructure, term: &Term) -> Result<Verdict, CheckError> {
    let t0 = Instant::now();
    let labels = ks.atom_labels(term)?;
    let path = ks.bfs_path(ks.initial(), |_| true, |s| !labels[s as usize]);
    Ok(match path {
        None => Verdict { outcome: Outcome::Holds, evidence: None, stats: ks.stats(t0) },
        Some(p) => Verdict {
            outcome: Outcome::Fails,
            evidence: Some(ks.trace(p, None, EvidenceRole::Counterexample, Some(Term::negate(term.clone())))),
            stats: ks.stats(t0),
        },
    })
}

/// Checks a typed formula with the procedure matching its logic.
pub fn check_formula(ks: &KripkeStructure, tf: &TypedFormula, ltl_bound: usize) -> Result<Verdict, CheckError> {
    match tf.logic {
        Logic::Ctl => check_ctl(ks, tf),
        Logic::Ltl => check_ltl_bounded(ks, tf, ltl_bound),
    }
}

#[derive(Debug, Clone)]
pub struct PropertyReport {
    pub property: PropertyDecl,
    pub result: Result<Verdict, CheckError>,
}

/// Builds one structure and checks every embedded property in order.
///
/// Faults are isolated per property: an ill-typed property carries its
/// diagnostics while the others are still checked.
pub fn verify_spec(spec: &AsmSpecification, limits: &Limits) -> Vec<PropertyReport> {
    if spec.properties.is_empty() {
        return Vec::new();
    }
    let mut model = spec.clone();
    model.properties.clear();
    let sig = extract_signature(&model);
    let ks = build_kripke(&model, limits);
    spec.properties
        .iter()
        .map(|p| {
            let result = match (&sig, &ks) {
                (Err(d), _) => Err(CheckError::Formula(d.clone())),
                (_, Err(e)) => Err(e.clone()),
                (Ok(sig), Ok(ks)) => typecheck_formula(&p.formula, p.logic, sig)
                    .map_err(CheckError::Formula)
                    .and_then(|tf| check_formula(ks, &tf, limits.ltl_bound)),
            };
            PropertyReport { property: p.clone(), result }
        })
        .collect()
}

//! Symbol tables, name resolution and type checking.
//!
//! Every check reports through [`Diagnostics`] so that the same output can be
//! shown to a user or fed back to the agent's repair loop. One diagnostic is
//! produced per independent fault: an unknown symbol poisons the enclosing
//! expression instead of cascading into type errors.

use std::collections::{HashMap, HashSet};
use std::fmt;

use indexmap::IndexMap;
use serde::Serialize;

use crate::diag::{Diagnostic, Diagnostics, Span};
use crate::lang::*;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum Type {
    Boolean,
    Integer,
    Enum(String),
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Boolean => f.write_str("Boolean"),
            Type::Integer => f.write_str("Integer"),
            Type::Enum(d) => f.write_str(d),
        }
    }
}

/// The typed symbol table of a specification, including the builtin
/// `Boolean` domain. Maps keep declaration order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Signature {
    pub domains: IndexMap<String, DomainDecl>,
    pub functions: IndexMap<String, FunctionDecl>,
    #[serde(skip)]
    enum_constants: HashMap<String, String>,
}

impl Signature {
    pub fn function(&self, name: &str) -> Option<&FunctionDecl> {
        self.functions.get(name)
    }

    pub fn domain(&self, name: &str) -> Option<&DomainDecl> {
        self.domains.get(name)
    }

    /// The enumeration domain a constant belongs to.
    pub fn enum_domain_of(&self, constant: &str) -> Option<&str> {
        self.enum_constants.get(constant).map(String::as_str)
    }

    pub fn domain_type(&self, name: &str) -> Option<Type> {
        self.domains.get(name).map(|d| match d.kind {
            DomainKind::Boolean => Type::Boolean,
            DomainKind::IntRange { .. } => Type::Integer,
            DomainKind::Enumeration(_) => Type::Enum(d.name.clone()),
        })
    }

    pub fn function_names(&self) -> impl Iterator<Item = &str> {
        self.functions.keys().map(String::as_str)
    }

    /// Compact listing used in prompts.
    pub fn summary(&self) -> String {
        let mut out = String::from("domains:\n");
        for d in self.domains.values() {
            let shape = match &d.kind {
                DomainKind::Boolean => "{false, true}".to_string(),
                DomainKind::IntRange { lo, hi } => format!("integers {{{lo} : {hi}}}"),
                DomainKind::Enumeration(vs) => format!("{{{}}}", vs.join(" | ")),
            };
            out.push_str(&format!("  {} = {shape}\n", d.name));
        }
        out.push_str("functions:\n");
        for f in self.functions.values() {
            out.push_str(&format!("  {} {}: ", f.kind.keyword(), f.name));
            if let Some(a) = &f.arg_domain {
                out.push_str(&format!("{a} -> "));
            }
            out.push_str(&f.result_domain);
            out.push('\n');
        }
        out
    }

    fn symbol_kind(&self, name: &str) -> Option<&'static str> {
        if self.functions.contains_key(name) {
            Some("function")
        } else if self.domains.contains_key(name) {
            Some("domain")
        } else if self.enum_constants.contains_key(name) {
            Some("enumeration constant")
        } else {
            None
        }
    }
}

/// Builds the symbol table, rejecting duplicate names and dangling domain
/// references.
pub fn extract_signature(spec: &AsmSpecification) -> Result<Signature, Diagnostics> {
    let mut diags = Diagnostics::new();
    let mut sig = Signature { domains: IndexMap::new(), functions: IndexMap::new(), enum_constants: HashMap::new() };
    sig.domains.insert("Boolean".into(), DomainDecl::boolean());
    for d in &spec.domains {
        if let Some(kind) = sig.symbol_kind(&d.name) {
            diags.push(dup(&d.name, kind, d.span));
            continue;
        }
        sig.domains.insert(d.name.clone(), d.clone());
        if let DomainKind::Enumeration(values) = &d.kind {
            for v in values {
                if let Some(kind) = sig.symbol_kind(v) {
                    diags.push(dup(v, kind, d.span));
                } else {
                    sig.enum_constants.insert(v.clone(), d.name.clone());
                }
            }
        }
    }
    for f in &spec.functions {
        if let Some(kind) = sig.symbol_kind(&f.name) {
            diags.push(dup(&f.name, kind, f.span));
            continue;
        }
        for dom in f.arg_domain.iter().chain(std::iter::once(&f.result_domain)) {
            if !sig.domains.contains_key(dom) {
                diags.push(
                    Diagnostic::error(
                        "undeclared-domain",
                        format!("function '{}' refers to undeclared domain '{dom}'", f.name),
                    )
                    .at(f.span),
                );
            }
        }
        sig.functions.insert(f.name.clone(), f.clone());
    }
    if diags.is_empty() {
        Ok(sig)
    } else {
        Err(diags)
    }
}

fn dup(name: &str, existing: &str, span: Span) -> Diagnostic {
    Diagnostic::error("duplicate-symbol", format!("duplicate symbol '{name}' (already declared as a {existing})")).at(span)
}

fn levenshtein(a: &str, b: &str) -> usize {
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.chars().enumerate() {
        let mut cur = vec![i + 1; b.len() + 1];
        for (j, cb) in b.iter().enumerate() {
            let cost = usize::from(ca != *cb);
            cur[j + 1] = (prev[j] + cost).min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        prev = cur;
    }
    prev[b.len()]
}

/// Nearest declared name: edit distance at most 2, or a prefix relation
/// between names of at least two characters.
pub fn suggest<'a>(unknown: &str, candidates: impl IntoIterator<Item = &'a str>) -> Option<&'a str> {
    let mut best: Option<(usize, &str)> = None;
    for c in candidates {
        let d = levenshtein(unknown, c);
        let prefix = c.len() >= 2 && unknown.len() >= 2 && (unknown.starts_with(c) || c.starts_with(unknown));
        if d <= 2 || prefix {
            let rank = if d <= 2 { d } else { 3 };
            if !matches!(best, Some((r, _)) if r <= rank) {
                best = Some((rank, c));
            }
        }
    }
    best.map(|(_, c)| c)
}

/// A formula whose symbols all resolve and whose atoms are all Boolean.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypedFormula {
    pub formula: Formula,
    pub logic: Logic,
    /// Every function the formula applies, in first-use order.
    pub functions: IndexMap<String, FunctionDecl>,
}

struct Checker<'a> {
    sig: &'a Signature,
    diags: Diagnostics,
    scope: Vec<(String, Type)>,
    reported: HashSet<String>,
    used: IndexMap<String, FunctionDecl>,
    /// Set while checking a static definition: only static functions may
    /// be referenced.
    constant_only: bool,
    span: Span,
}

impl<'a> Checker<'a> {
    fn new(sig: &'a Signature) -> Self {
        Checker {
            sig,
            diags: Diagnostics::new(),
            scope: Vec::new(),
            reported: HashSet::new(),
            used: IndexMap::new(),
            constant_only: false,
            span: Span::default(),
        }
    }

    fn error(&mut self, code: &str, message: String) {
        self.diags.push(Diagnostic::error(code, message).at(self.span));
    }

    fn unknown(&mut self, name: &str) {
        if !self.reported.insert(name.to_string()) {
            return;
        }
        let declared: Vec<&str> = self.sig.function_names().collect();
        let mut d = Diagnostic::error(
            "unknown-symbol",
            format!("unknown symbol '{name}'; declared functions: {}", declared.join(", ")),
        )
        .at(self.span);
        let candidates = self.sig.function_names().chain(self.sig.enum_constants.keys().map(String::as_str));
        if let Some(s) = suggest(name, candidates) {
            d = d.with_help(format!("did you mean '{s}'?"));
        }
        self.diags.push(d);
    }

    fn expect(&mut self, t: &Term, want: &Type, what: &str) {
        if let Some(got) = self.term(t) {
            if &got != want {
                self.error(
                    "type-mismatch",
                    format!("type mismatch: {what} '{}' has type {got}, expected {want}", print_term(t)),
                );
            }
        }
    }

    fn term(&mut self, t: &Term) -> Option<Type> {
        match t {
            Term::Int(_) => Some(Type::Integer),
            Term::Bool(_) => Some(Type::Boolean),
            Term::Var(v) => match self.scope.iter().rev().find(|(n, _)| n == v) {
                Some((_, ty)) => Some(ty.clone()),
                None => {
                    self.unknown(&format!("${v}"));
                    None
                }
            },
            Term::App { name, arg } => {
                let Some(decl) = self.sig.function(name).cloned() else {
                    if arg.is_none() {
                        if let Some(d) = self.sig.enum_domain_of(name) {
                            return Some(Type::Enum(d.to_string()));
                        }
                    } else if let Some(a) = arg {
                        // Still resolve the argument so that its own faults surface.
                        self.term(a);
                    }
                    self.unknown(name);
                    return None;
                };
                if self.constant_only && decl.kind != FunctionKind::Static {
                    self.error(
                        "non-constant-definition",
                        format!("static definitions may only use static functions, found {} '{name}'", decl.kind.keyword()),
                    );
                }
                self.used.entry(name.clone()).or_insert_with(|| decl.clone());
                match (&decl.arg_domain, arg) {
                    (None, Some(_)) => {
                        self.error("arity-mismatch", format!("function '{name}' takes no argument"));
                        return None;
                    }
                    (Some(_), None) => {
                        self.error("arity-mismatch", format!("function '{name}' expects 1 argument"));
                        return None;
                    }
                    (Some(dom), Some(a)) => {
                        if let Some(want) = self.sig.domain_type(dom) {
                            self.expect(a, &want, "argument");
                        }
                    }
                    (None, None) => {}
                }
                self.sig.domain_type(&decl.result_domain)
            }
            Term::Arith { op, lhs, rhs } => {
                let l = self.term(lhs);
                let r = self.term(rhs);
                for (side, ty) in [(lhs, l), (rhs, r)] {
                    if let Some(ty) = ty {
                        if ty != Type::Integer {
                            let sym = match op {
                                ArithOp::Add => "+",
                                ArithOp::Sub => "-",
                                ArithOp::Mod => "mod",
                            };
                            self.error(
                                "type-mismatch",
                                format!("type mismatch: operator '{sym}' expects Integer, found {ty} in '{}'", print_term(side)),
                            );
                        }
                    }
                }
                Some(Type::Integer)
            }
            Term::Cmp { op, lhs, rhs } => {
                let l = self.term(lhs);
                let r = self.term(rhs);
                if let (Some(l), Some(r)) = (l, r) {
                    if l != r {
                        self.error(
                            "type-mismatch",
                            format!("type mismatch: cannot compare {l} with {r} in '{}'", print_term(t)),
                        );
                    } else if !matches!(op, CmpOp::Eq | CmpOp::Ne) && l != Type::Integer {
                        self.error(
                            "type-mismatch",
                            format!("type mismatch: operator '{}' expects Integer, found {l}", op.symbol()),
                        );
                    }
                }
                Some(Type::Boolean)
            }
            Term::Not(inner) => {
                self.expect(inner, &Type::Boolean, "operand");
                Some(Type::Boolean)
            }
            Term::Logic { lhs, rhs, .. } => {
                self.expect(lhs, &Type::Boolean, "operand");
                self.expect(rhs, &Type::Boolean, "operand");
                Some(Type::Boolean)
            }
        }
    }

    fn formula(&mut self, f: &Formula) {
        match f {
            Formula::Atom(t) => {
                if let Some(ty) = self.term(t) {
                    if ty != Type::Boolean {
                        self.error(
                            "non-boolean-atom",
                            format!("atom '{}' has type {ty}, expected Boolean", print_term(t)),
                        );
                    }
                }
            }
            Formula::Not(g) | Formula::Ctl(_, g) | Formula::Ltl(_, g) => self.formula(g),
            Formula::Logic { lhs, rhs, .. } | Formula::CtlUntil { lhs, rhs, .. } | Formula::LtlUntil { lhs, rhs } => {
                self.formula(lhs);
                self.formula(rhs);
            }
        }
    }

    fn rule(&mut self, r: &Rule, macros: &HashSet<&str>) {
        match r {
            Rule::Update { function, arg, value } => {
                let Some(decl) = self.sig.function(function).cloned() else {
                    self.unknown(function);
                    return;
                };
                match decl.kind {
                    FunctionKind::Controlled => {}
                    FunctionKind::Monitored => {
                        self.error("update-to-monitored", format!("cannot update monitored function '{function}'"));
                        return;
                    }
                    k => {
                        self.error(
                            "update-to-non-controlled",
                            format!("cannot update {} function '{function}'", k.keyword()),
                        );
                        return;
                    }
                }
                let location = Term::App { name: function.clone(), arg: arg.clone().map(Box::new) };
                let Some(want) = self.term(&location) else { return };
                self.expect(value, &want, "update value");
            }
            Rule::Par(rules) => rules.iter().for_each(|r| self.rule(r, macros)),
            Rule::If { guard, then, otherwise } => {
                if let Some(ty) = self.term(guard) {
                    if ty != Type::Boolean {
                        self.error(
                            "non-boolean-guard",
                            format!("guard '{}' has type {ty}, expected Boolean", print_term(guard)),
                        );
                    }
                }
                self.rule(then, macros);
                if let Some(e) = otherwise {
                    self.rule(e, macros);
                }
            }
            Rule::Call(name) => {
                if !macros.contains(name.as_str()) {
                    self.error("unknown-macro", format!("call to undeclared macro rule '{name}'"));
                }
            }
        }
    }
}

/// Resolves and type-checks a property against a signature.
pub fn typecheck_formula(formula: &Formula, logic: Logic, sig: &Signature) -> Result<TypedFormula, Diagnostics> {
    let mut c = Checker::new(sig);
    let wrong = match logic {
        Logic::Ctl => formula.uses_ltl(),
        Logic::Ltl => formula.uses_ctl(),
    };
    if wrong {
        c.error("mixed-logic", format!("formula uses operators of the other logic; expected {logic}"));
    }
    c.formula(formula);
    if c.diags.is_empty() {
        Ok(TypedFormula { formula: formula.clone(), logic, functions: c.used })
    } else {
        Err(c.diags)
    }
}

/// Type-checks a standalone Boolean term (invariants, scenario checks).
pub fn typecheck_condition(term: &Term, sig: &Signature) -> Diagnostics {
    let mut c = Checker::new(sig);
    c.formula(&Formula::Atom(term.clone()));
    c.diags
}

/// Evaluates a closed constant term (literals, enumeration constants and
/// integer arithmetic).
pub fn const_value(term: &Term, sig: &Signature) -> Option<Value> {
    match term {
        Term::Int(i) => Some(Value::Int(*i)),
        Term::Bool(b) => Some(Value::Bool(*b)),
        Term::App { name, arg: None } if sig.function(name).is_none() && sig.enum_domain_of(name).is_some() => {
            Some(Value::Enum(name.clone()))
        }
        Term::Arith { op, lhs, rhs } => {
            let (Value::Int(l), Value::Int(r)) = (const_value(lhs, sig)?, const_value(rhs, sig)?) else {
                return None;
            };
            match op {
                ArithOp::Add => l.checked_add(r).map(Value::Int),
                ArithOp::Sub => l.checked_sub(r).map(Value::Int),
                ArithOp::Mod if r != 0 => Some(Value::Int(l.rem_euclid(r))),
                ArithOp::Mod => None,
            }
        }
        _ => None,
    }
}

fn find_cycle<'a>(graph: &IndexMap<&'a str, Vec<&'a str>>) -> Option<Vec<&'a str>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Fresh,
        Active,
        Done,
    }
    fn visit<'a>(
        n: &'a str,
        graph: &IndexMap<&'a str, Vec<&'a str>>,
        marks: &mut HashMap<&'a str, Mark>,
        stack: &mut Vec<&'a str>,
    ) -> Option<Vec<&'a str>> {
        match marks.get(n).copied().unwrap_or(Mark::Fresh) {
            Mark::Done => return None,
            Mark::Active => {
                let at = stack.iter().position(|s| *s == n).unwrap_or(0);
                let mut cycle = stack[at..].to_vec();
                cycle.push(n);
                return Some(cycle);
            }
            Mark::Fresh => {}
        }
        marks.insert(n, Mark::Active);
        stack.push(n);
        for m in graph.get(n).into_iter().flatten() {
            if graph.contains_key(m) {
                if let Some(c) = visit(m, graph, marks, stack) {
                    return Some(c);
                }
            }
        }
        stack.pop();
        marks.insert(n, Mark::Done);
        None
    }
    let mut marks = HashMap::new();
    for n in graph.keys() {
        if let Some(c) = visit(n, graph, &mut marks, &mut Vec::new()) {
            return Some(c);
        }
    }
    None
}

fn rule_calls<'a>(r: &'a Rule, out: &mut Vec<&'a str>) {
    match r {
        Rule::Call(n) => out.push(n),
        Rule::Par(rs) => rs.iter().for_each(|r| rule_calls(r, out)),
        Rule::If { then, otherwise, .. } => {
            rule_calls(then, out);
            if let Some(e) = otherwise {
                rule_calls(e, out);
            }
        }
        Rule::Update { .. } => {}
    }
}

/// Checks definitions, rules, the initial state and every embedded property.
pub fn typecheck_spec(spec: &AsmSpecification) -> Diagnostics {
    let sig = match extract_signature(spec) {
        Ok(s) => s,
        Err(d) => return d,
    };
    let mut c = Checker::new(&sig);

    // Static and derived definitions.
    let mut def_graph: IndexMap<&str, Vec<&str>> = IndexMap::new();
    for def in &spec.definitions {
        c.span = def.span;
        let Some(decl) = sig.function(&def.name).cloned() else {
            c.unknown(&def.name);
            continue;
        };
        if !matches!(decl.kind, FunctionKind::Static | FunctionKind::Derived) {
            c.error(
                "invalid-definition",
                format!("{} function '{}' cannot have a defining term", decl.kind.keyword(), def.name),
            );
            continue;
        }
        match (&decl.arg_domain, &def.param) {
            (None, Some(_)) | (Some(_), None) => {
                c.error("arity-mismatch", format!("definition of '{}' does not match its arity", def.name));
                continue;
            }
            (Some(dom), Some(p)) if *dom != p.domain => {
                c.error(
                    "type-mismatch",
                    format!("type mismatch: parameter ${} of '{}' ranges over {}, expected {dom}", p.var, def.name, p.domain),
                );
                continue;
            }
            _ => {}
        }
        c.scope = def.param.iter().filter_map(|p| sig.domain_type(&p.domain).map(|t| (p.var.clone(), t))).collect();
        c.constant_only = decl.kind == FunctionKind::Static;
        if let Some(want) = sig.domain_type(&decl.result_domain) {
            c.expect(&def.body, &want, "definition");
        }
        c.constant_only = false;
        c.scope.clear();
        def_graph.insert(&def.name, def.body.applied_names());
    }
    for f in sig.functions.values() {
        if matches!(f.kind, FunctionKind::Static | FunctionKind::Derived) && !def_graph.contains_key(f.name.as_str()) {
            c.span = f.span;
            if !spec.definitions.iter().any(|d| d.name == f.name) {
                c.error("missing-definition", format!("{} function '{}' has no definition", f.kind.keyword(), f.name));
            }
        }
    }
    if let Some(cycle) = find_cycle(&def_graph) {
        c.span = Span::default();
        c.error("recursive-definition", format!("recursive function definitions: {}", cycle.join(" -> ")));
    }

    // Rules.
    let macros: HashSet<&str> = spec.macro_rules.iter().map(|r| r.name.as_str()).collect();
    let mut call_graph: IndexMap<&str, Vec<&str>> = IndexMap::new();
    for r in spec.macro_rules.iter().chain(std::iter::once(&spec.main_rule)) {
        c.span = r.span;
        c.rule(&r.body, &macros);
        let mut calls = Vec::new();
        rule_calls(&r.body, &mut calls);
        call_graph.insert(&r.name, calls);
    }
    if let Some(cycle) = find_cycle(&call_graph) {
        c.span = Span::default();
        c.error("recursive-macro", format!("recursive macro calls: {}", cycle.join(" -> ")));
    }

    // Initial state.
    for init in &spec.init {
        c.span = init.span;
        let Some(decl) = sig.function(&init.name).cloned() else {
            c.unknown(&init.name);
            continue;
        };
        if decl.kind != FunctionKind::Controlled {
            c.error(
                "init-to-non-controlled",
                format!("only controlled functions can be initialized, '{}' is {}", init.name, decl.kind.keyword()),
            );
            continue;
        }
        match (&decl.arg_domain, &init.param) {
            (None, Some(_)) | (Some(_), None) => {
                c.error("arity-mismatch", format!("initializer of '{}' does not match its arity", init.name));
                continue;
            }
            (Some(dom), Some(p)) if *dom != p.domain => {
                c.error("type-mismatch", format!("type mismatch: parameter of '{}' ranges over {}, expected {dom}", init.name, p.domain));
                continue;
            }
            _ => {}
        }
        let Some(want) = sig.domain_type(&decl.result_domain) else { continue };
        let before = c.diags.len();
        c.expect(&init.value, &want, "initial value");
        if c.diags.len() > before {
            continue;
        }
        match const_value(&init.value, &sig) {
            None => c.error(
                "non-constant-init",
                format!("initial value of '{}' must be a constant, found '{}'", init.name, print_term(&init.value)),
            ),
            Some(v) => {
                let dom = &sig.domains[&decl.result_domain];
                if !dom.contains(&v) {
                    let range = match &dom.kind {
                        DomainKind::IntRange { lo, hi } => format!(" [{lo}, {hi}]"),
                        _ => String::new(),
                    };
                    c.error(
                        "value-out-of-domain",
                        format!("initial value {v} of '{}' is outside domain {}{range}", init.name, dom.name),
                    );
                }
            }
        }
    }

    // Embedded properties.
    let mut diags = c.diags;
    for p in &spec.properties {
        if let Err(d) = typecheck_formula(&p.formula, p.logic, &sig) {
            for mut e in d.entries {
                if e.span.is_none() && !p.span.is_unknown() {
                    e.span = Some(p.span);
                }
                diags.push(e);
            }
        }
    }
    diags
}

#[cfg(test)]
mod tests {
    use super::*;

    const CLOCK: &str = include_str!("../tests/corpus/Clock.asm");

    fn clock() -> AsmSpecification {
        parse_asm(CLOCK).unwrap()
    }

    fn check(text: &str) -> Result<TypedFormula, Diagnostics> {
        let spec = clock();
        let sig = extract_signature(&spec).unwrap();
        let f = parse_property(text, Logic::Ctl, true).unwrap();
        typecheck_formula(&f, Logic::Ctl, &sig)
    }

    #[test]
    fn clock_signature() {
        let sig = extract_signature(&clock()).unwrap();
        let doms: Vec<_> = sig.domains.keys().cloned().collect();
        assert_eq!(doms, ["Boolean", "Second", "Minute", "Hour"]);
        assert_eq!(sig.domains["Hour"].kind, DomainKind::IntRange { lo: 0, hi: 23 });
        let fns: Vec<_> = sig.functions.values().map(|f| (f.name.as_str(), f.kind, f.result_domain.as_str())).collect();
        assert_eq!(
            fns,
            [
                ("signal", FunctionKind::Monitored, "Boolean"),
                ("sec", FunctionKind::Controlled, "Second"),
                ("min", FunctionKind::Controlled, "Minute"),
                ("h", FunctionKind::Controlled, "Hour"),
            ]
        );
    }

    #[test]
    fn duplicate_function_names() {
        let src = CLOCK.replace("controlled h: Hour", "controlled h: Hour\n    controlled sec: Second");
        let err = extract_signature(&parse_asm(&src).unwrap()).unwrap_err();
        assert_eq!(err.codes(), ["duplicate-symbol"]);
    }

    #[test]
    fn dangling_domain() {
        let src = CLOCK.replace("controlled h: Hour", "controlled h: Hour\n    controlled x: Missing");
        let err = extract_signature(&parse_asm(&src).unwrap()).unwrap_err();
        assert_eq!(err.codes(), ["undeclared-domain"]);
    }

    #[test]
    fn reset_property_is_accepted() {
        let tf = check("AG (min = 59 implies AX (min = 0))").unwrap();
        assert_eq!(tf.functions.keys().collect::<Vec<_>>(), ["min"]);
    }

    #[test]
    fn unknown_symbol_lists_declared_functions_and_suggests() {
        let err = check("AG(minute = 59)").unwrap_err();
        assert_eq!(err.codes(), ["unknown-symbol"]);
        assert_eq!(err.entries[0].message, "unknown symbol 'minute'; declared functions: signal, sec, min, h");
        assert_eq!(err.entries[0].help.as_deref(), Some("did you mean 'min'?"));
    }

    #[test]
    fn one_diagnostic_per_unknown_symbol() {
        let err = check("AG(minute = 59 implies AX(minute = 0))").unwrap_err();
        assert_eq!(err.len(), 1);
    }

    #[test]
    fn boolean_against_integer() {
        let err = check("AG(signal = 59)").unwrap_err();
        assert_eq!(err.codes(), ["type-mismatch"]);
        assert!(err.entries[0].message.contains("Boolean with Integer"));
    }

    #[test]
    fn non_boolean_atom() {
        let err = check("AG(min)").unwrap_err();
        assert_eq!(err.codes(), ["non-boolean-atom"]);
    }

    #[test]
    fn arity_mismatch() {
        let err = check("AG(min(3) = 1)").unwrap_err();
        assert_eq!(err.codes(), ["arity-mismatch"]);
    }

    #[test]
    fn clock_spec_is_clean() {
        assert!(typecheck_spec(&clock()).is_empty());
    }

    #[test]
    fn init_out_of_domain() {
        let spec = parse_asm(&CLOCK.replace("function sec = 0", "function sec = 99")).unwrap();
        let d = typecheck_spec(&spec);
        assert_eq!(d.codes(), ["value-out-of-domain"]);
        assert!(d.entries[0].message.contains("[0, 59]"));
    }

    #[test]
    fn update_to_monitored() {
        let spec = parse_asm(&CLOCK.replace("sec := (sec + 1) mod 60", "signal := false")).unwrap();
        assert_eq!(typecheck_spec(&spec).codes(), ["update-to-monitored"]);
    }

    #[test]
    fn recursive_macros() {
        let spec = parse_asm(&CLOCK.replace("if min = 59 then h := (h + 1) mod 24 endif", "r_IncMinHours[]")).unwrap();
        assert_eq!(typecheck_spec(&spec).codes(), ["recursive-macro"]);
    }

    #[test]
    fn suggestion_distance() {
        assert_eq!(suggest("sex", ["signal", "sec"]), Some("sec"));
        assert_eq!(suggest("zzz", ["signal", "sec"]), None);
    }
}

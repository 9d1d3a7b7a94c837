use std::fmt;

use serde::{Deserialize, Serialize};

use crate::diag::Span;

/// A constant of one of the finite domains.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Enum(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Enum(s) => f.write_str(s),
        }
    }
}

impl Value {
    /// The term that denotes this constant.
    pub fn to_term(&self) -> Term {
        match self {
            Value::Bool(b) => Term::Bool(*b),
            Value::Int(i) => Term::Int(*i),
            Value::Enum(s) => Term::app(s.clone(), None),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ArithOp {
    Add,
    Sub,
    Mod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoolOp {
    And,
    Or,
    Implies,
    Iff,
}

impl BoolOp {
    pub fn keyword(self) -> &'static str {
        match self {
            BoolOp::And => "and",
            BoolOp::Or => "or",
            BoolOp::Implies => "implies",
            BoolOp::Iff => "iff",
        }
    }
}

/// First-order terms over the signature.
///
/// Enumeration constants are parsed as zero-argument applications and
/// resolved against the signature later.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Term {
    Int(i64),
    Bool(bool),
    /// A `$x` parameter inside a function definition.
    Var(String),
    App { name: String, arg: Option<Box<Term>> },
    Arith { op: ArithOp, lhs: Box<Term>, rhs: Box<Term> },
    Cmp { op: CmpOp, lhs: Box<Term>, rhs: Box<Term> },
    Not(Box<Term>),
    Logic { op: BoolOp, lhs: Box<Term>, rhs: Box<Term> },
}

impl Term {
    pub fn app(name: impl Into<String>, arg: Option<Term>) -> Term {
        Term::App { name: name.into(), arg: arg.map(Box::new) }
    }

    pub fn var(name: impl Into<String>) -> Term {
        Term::app(name, None)
    }

    pub fn cmp(op: CmpOp, lhs: Term, rhs: Term) -> Term {
        Term::Cmp { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }
    }

    pub fn eq(lhs: Term, rhs: Term) -> Term {
        Term::cmp(CmpOp::Eq, lhs, rhs)
    }

    pub fn arith(op: ArithOp, lhs: Term, rhs: Term) -> Term {
        Term::Arith { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }
    }

    pub fn logic(op: BoolOp, lhs: Term, rhs: Term) -> Term {
        Term::Logic { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }
    }

    pub fn and(lhs: Term, rhs: Term) -> Term {
        Term::logic(BoolOp::And, lhs, rhs)
    }

    pub fn negate(t: Term) -> Term {
        Term::Not(Box::new(t))
    }

    /// Left-nested conjunction; `None` for an empty iterator.
    pub fn conjunction(terms: impl IntoIterator<Item = Term>) -> Option<Term> {
        terms.into_iter().reduce(Term::and)
    }

    /// Names of every function application in the term, in visit order.
    pub fn applied_names(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.visit_apps(&mut |name| out.push(name));
        out
    }

    fn visit_apps<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            Term::Int(_) | Term::Bool(_) | Term::Var(_) => {}
            Term::App { name, arg } => {
                f(name);
                if let Some(a) = arg {
                    a.visit_apps(f);
                }
            }
            Term::Arith { lhs, rhs, .. } | Term::Cmp { lhs, rhs, .. } | Term::Logic { lhs, rhs, .. } => {
                lhs.visit_apps(f);
                rhs.visit_apps(f);
            }
            Term::Not(t) => t.visit_apps(f),
        }
    }

    /// Replaces every `$name` variable by `with`.
    pub fn substitute(&self, name: &str, with: &Term) -> Term {
        match self {
            Term::Var(v) if v == name => with.clone(),
            Term::Int(_) | Term::Bool(_) | Term::Var(_) => self.clone(),
            Term::App { name: f, arg } => Term::App {
                name: f.clone(),
                arg: arg.as_ref().map(|a| Box::new(a.substitute(name, with))),
            },
            Term::Arith { op, lhs, rhs } => Term::arith(*op, lhs.substitute(name, with), rhs.substitute(name, with)),
            Term::Cmp { op, lhs, rhs } => Term::cmp(*op, lhs.substitute(name, with), rhs.substitute(name, with)),
            Term::Logic { op, lhs, rhs } => Term::logic(*op, lhs.substitute(name, with), rhs.substitute(name, with)),
            Term::Not(t) => Term::negate(t.substitute(name, with)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Logic {
    Ctl,
    Ltl,
}

impl fmt::Display for Logic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Logic::Ctl => "CTL",
            Logic::Ltl => "LTL",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CtlOp {
    AG,
    AF,
    AX,
    EG,
    EF,
    EX,
}

impl CtlOp {
    pub const ALL: [CtlOp; 6] = [CtlOp::AG, CtlOp::AF, CtlOp::AX, CtlOp::EG, CtlOp::EF, CtlOp::EX];

    pub fn upper(self) -> &'static str {
        match self {
            CtlOp::AG => "AG",
            CtlOp::AF => "AF",
            CtlOp::AX => "AX",
            CtlOp::EG => "EG",
            CtlOp::EF => "EF",
            CtlOp::EX => "EX",
        }
    }

    pub fn lower(self) -> &'static str {
        match self {
            CtlOp::AG => "ag",
            CtlOp::AF => "af",
            CtlOp::AX => "ax",
            CtlOp::EG => "eg",
            CtlOp::EF => "ef",
            CtlOp::EX => "ex",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LtlOp {
    G,
    F,
    X,
}

impl LtlOp {
    pub const ALL: [LtlOp; 3] = [LtlOp::G, LtlOp::F, LtlOp::X];

    pub fn upper(self) -> &'static str {
        match self {
            LtlOp::G => "G",
            LtlOp::F => "F",
            LtlOp::X => "X",
        }
    }

    pub fn lower(self) -> &'static str {
        match self {
            LtlOp::G => "g",
            LtlOp::F => "f",
            LtlOp::X => "x",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PathQuantifier {
    All,
    Exists,
}

/// A CTL or LTL formula.
///
/// Atoms are maximal temporal-free subterms: the smart constructors
/// [`Formula::not`] and [`Formula::logic`] fold connectives between atoms
/// into the atom's term, so a formula has exactly one representation and
/// printing followed by parsing is the identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Formula {
    Atom(Term),
    Not(Box<Formula>),
    Logic { op: BoolOp, lhs: Box<Formula>, rhs: Box<Formula> },
    Ctl(CtlOp, Box<Formula>),
    CtlUntil { quant: PathQuantifier, lhs: Box<Formula>, rhs: Box<Formula> },
    Ltl(LtlOp, Box<Formula>),
    LtlUntil { lhs: Box<Formula>, rhs: Box<Formula> },
}

impl Formula {
    pub fn atom(t: Term) -> Formula {
        Formula::Atom(t)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        match f {
            Formula::Atom(t) => Formula::Atom(Term::negate(t)),
            f => Formula::Not(Box::new(f)),
        }
    }

    pub fn logic(op: BoolOp, lhs: Formula, rhs: Formula) -> Formula {
        match (lhs, rhs) {
            (Formula::Atom(a), Formula::Atom(b)) => Formula::Atom(Term::logic(op, a, b)),
            (a, b) => Formula::Logic { op, lhs: Box::new(a), rhs: Box::new(b) },
        }
    }

    pub fn and(lhs: Formula, rhs: Formula) -> Formula {
        Formula::logic(BoolOp::And, lhs, rhs)
    }

    pub fn or(lhs: Formula, rhs: Formula) -> Formula {
        Formula::logic(BoolOp::Or, lhs, rhs)
    }

    pub fn implies(lhs: Formula, rhs: Formula) -> Formula {
        Formula::logic(BoolOp::Implies, lhs, rhs)
    }

    pub fn ctl(op: CtlOp, f: Formula) -> Formula {
        Formula::Ctl(op, Box::new(f))
    }

    pub fn ctl_until(quant: PathQuantifier, lhs: Formula, rhs: Formula) -> Formula {
        Formula::CtlUntil { quant, lhs: Box::new(lhs), rhs: Box::new(rhs) }
    }

    pub fn ltl(op: LtlOp, f: Formula) -> Formula {
        Formula::Ltl(op, Box::new(f))
    }

    pub fn ltl_until(lhs: Formula, rhs: Formula) -> Formula {
        Formula::LtlUntil { lhs: Box::new(lhs), rhs: Box::new(rhs) }
    }

    pub fn uses_ctl(&self) -> bool {
        self.any(&|f| matches!(f, Formula::Ctl(..) | Formula::CtlUntil { .. }))
    }

    pub fn uses_ltl(&self) -> bool {
        self.any(&|f| matches!(f, Formula::Ltl(..) | Formula::LtlUntil { .. }))
    }

    fn any(&self, pred: &dyn Fn(&Formula) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        match self {
            Formula::Atom(_) => false,
            Formula::Not(f) | Formula::Ctl(_, f) | Formula::Ltl(_, f) => f.any(pred),
            Formula::Logic { lhs, rhs, .. } | Formula::CtlUntil { lhs, rhs, .. } | Formula::LtlUntil { lhs, rhs } => {
                lhs.any(pred) || rhs.any(pred)
            }
        }
    }

    /// Every atom term, in left-to-right order.
    pub fn atoms(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Term>) {
        match self {
            Formula::Atom(t) => out.push(t),
            Formula::Not(f) | Formula::Ctl(_, f) | Formula::Ltl(_, f) => f.collect_atoms(out),
            Formula::Logic { lhs, rhs, .. } | Formula::CtlUntil { lhs, rhs, .. } | Formula::LtlUntil { lhs, rhs } => {
                lhs.collect_atoms(out);
                rhs.collect_atoms(out);
            }
        }
    }

    /// Distinct names applied anywhere in the formula, first occurrence first.
    pub fn applied_names(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for atom in self.atoms() {
            for n in atom.applied_names() {
                if !out.iter().any(|o| o == n) {
                    out.push(n.to_string());
                }
            }
        }
        out
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::Atom(_) => 0,
            Formula::Not(f) | Formula::Ctl(_, f) | Formula::Ltl(_, f) => 1 + f.depth(),
            Formula::Logic { lhs, rhs, .. } | Formula::CtlUntil { lhs, rhs, .. } | Formula::LtlUntil { lhs, rhs } => {
                1 + lhs.depth().max(rhs.depth())
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Specifications

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum DomainKind {
    IntRange { lo: i64, hi: i64 },
    Enumeration(Vec<String>),
    Boolean,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainDecl {
    pub name: String,
    pub kind: DomainKind,
    #[serde(skip)]
    pub span: Span,
}

impl DomainDecl {
    pub fn boolean() -> DomainDecl {
        DomainDecl { name: "Boolean".into(), kind: DomainKind::Boolean, span: Span::default() }
    }

    /// Domain elements in declaration order.
    pub fn values(&self) -> Vec<Value> {
        match &self.kind {
            DomainKind::IntRange { lo, hi } => (*lo..=*hi).map(Value::Int).collect(),
            DomainKind::Enumeration(vs) => vs.iter().cloned().map(Value::Enum).collect(),
            DomainKind::Boolean => vec![Value::Bool(false), Value::Bool(true)],
        }
    }

    pub fn size(&self) -> u64 {
        match &self.kind {
            DomainKind::IntRange { lo, hi } => (hi - lo + 1) as u64,
            DomainKind::Enumeration(vs) => vs.len() as u64,
            DomainKind::Boolean => 2,
        }
    }

    pub fn contains(&self, v: &Value) -> bool {
        match (&self.kind, v) {
            (DomainKind::IntRange { lo, hi }, Value::Int(i)) => lo <= i && i <= hi,
            (DomainKind::Enumeration(vs), Value::Enum(s)) => vs.contains(s),
            (DomainKind::Boolean, Value::Bool(_)) => true,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionKind {
    Monitored,
    Controlled,
    Static,
    Derived,
}

impl FunctionKind {
    pub fn keyword(self) -> &'static str {
        match self {
            FunctionKind::Monitored => "monitored",
            FunctionKind::Controlled => "controlled",
            FunctionKind::Static => "static",
            FunctionKind::Derived => "derived",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionDecl {
    pub name: String,
    pub kind: FunctionKind,
    pub arg_domain: Option<String>,
    pub result_domain: String,
    #[serde(skip)]
    pub span: Span,
}

impl FunctionDecl {
    pub fn arity(&self) -> usize {
        usize::from(self.arg_domain.is_some())
    }
}

/// `($x in D)` parameter of a definition or initializer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Param {
    pub var: String,
    pub domain: String,
}

/// Defining term of a static or derived function.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionDef {
    pub name: String,
    pub param: Option<Param>,
    pub body: Term,
    #[serde(skip)]
    pub span: Span,
}

/// One `function f = c` line of the default initial state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InitDecl {
    pub name: String,
    pub param: Option<Param>,
    pub value: Term,
    #[serde(skip)]
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rule {
    Update { function: String, arg: Option<Term>, value: Term },
    /// `par ... endpar`; the empty block prints as `skip`.
    Par(Vec<Rule>),
    If { guard: Term, then: Box<Rule>, otherwise: Option<Box<Rule>> },
    Call(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleDecl {
    pub name: String,
    pub body: Rule,
    #[serde(skip)]
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    HandWritten,
    AgentGenerated,
    CounterexampleDerived,
}

/// An embedded `CTLSPEC`/`LTLSPEC` property.
///
/// Equality is structural on `logic` and `formula` only; `source_text` and
/// `origin` are provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PropertyDecl {
    pub logic: Logic,
    pub formula: Formula,
    pub source_text: String,
    pub origin: Origin,
    #[serde(skip)]
    pub span: Span,
}

impl PartialEq for PropertyDecl {
    fn eq(&self, other: &Self) -> bool {
        self.logic == other.logic && self.formula == other.formula
    }
}

impl Eq for PropertyDecl {}

impl PropertyDecl {
    pub fn new(logic: Logic, formula: Formula, source_text: impl Into<String>, origin: Origin) -> Self {
        PropertyDecl { logic, formula, source_text: source_text.into(), origin, span: Span::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AsmSpecification {
    pub name: String,
    pub imports: Vec<String>,
    pub domains: Vec<DomainDecl>,
    pub functions: Vec<FunctionDecl>,
    pub definitions: Vec<FunctionDef>,
    pub macro_rules: Vec<RuleDecl>,
    pub main_rule: RuleDecl,
    pub properties: Vec<PropertyDecl>,
    pub init_name: Option<String>,
    pub init: Vec<InitDecl>,
}

impl AsmSpecification {
    pub fn function(&self, name: &str) -> Option<&FunctionDecl> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn domain(&self, name: &str) -> Option<&DomainDecl> {
        self.domains.iter().find(|d| d.name == name)
    }

    pub fn macro_rule(&self, name: &str) -> Option<&RuleDecl> {
        self.macro_rules.iter().find(|r| r.name == name)
    }
}

// ---------------------------------------------------------------------------
// Scenarios

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Command {
    Set { function: String, arg: Option<Term>, value: Term },
    Step,
    Check(Term),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AvallaScenario {
    pub name: String,
    /// Path after `load`, verbatim.
    pub load: String,
    pub commands: Vec<Command>,
    /// Step index where an exported lasso loops back to, if any.
    pub loop_start: Option<usize>,
}

impl AvallaScenario {
    pub fn steps(&self) -> usize {
        self.commands.iter().filter(|c| matches!(c, Command::Step)).count()
    }
}

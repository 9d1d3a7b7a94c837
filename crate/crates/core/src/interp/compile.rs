//! Lowering of terms and rules to slot-indexed evaluation trees.

use std::cmp::Ordering;

use crate::lang::*;

use super::{InterpError, Location, Machine};

/// Nesting limit for inlined definitions and macro calls. Cycles are
/// rejected by the type checker, so this only guards pathological depth.
const MAX_INLINE: usize = 256;

#[derive(Debug, Clone)]
pub(crate) enum CExpr {
    Const(i64),
    Slot(usize),
    /// Location of a unary function selected by a computed argument.
    Indexed(Box<Indexed>),
    Arith(ArithOp, Box<CExpr>, Box<CExpr>),
    Cmp(CmpOp, Box<CExpr>, Box<CExpr>),
    Not(Box<CExpr>),
    Logic(BoolOp, Box<CExpr>, Box<CExpr>),
}

#[derive(Debug, Clone)]
pub(crate) struct Indexed {
    pub base: usize,
    pub lo: i64,
    pub size: i64,
    pub arg: CExpr,
    pub function: String,
    pub domain: String,
}

impl Indexed {
    pub fn slot(&self, m: &Machine, s: &[i64]) -> Result<usize, InterpError> {
        let a = self.arg.eval(m, s)?;
        if a < self.lo || a - self.lo >= self.size {
            return Err(InterpError::ArgumentOutOfDomain {
                function: self.function.clone(),
                value: a.to_string(),
                domain: self.domain.clone(),
            });
        }
        Ok(self.base + (a - self.lo) as usize)
    }
}

impl CExpr {
    pub fn eval(&self, m: &Machine, s: &[i64]) -> Result<i64, InterpError> {
        Ok(match self {
            CExpr::Const(c) => *c,
            CExpr::Slot(i) => s[*i],
            CExpr::Indexed(ix) => s[ix.slot(m, s)?],
            CExpr::Arith(op, l, r) => {
                let (l, r) = (l.eval(m, s)?, r.eval(m, s)?);
                match op {
                    ArithOp::Add => l.checked_add(r).ok_or(InterpError::Overflow)?,
                    ArithOp::Sub => l.checked_sub(r).ok_or(InterpError::Overflow)?,
                    ArithOp::Mod if r == 0 => return Err(InterpError::DivisionByZero),
                    ArithOp::Mod => l.checked_rem_euclid(r).ok_or(InterpError::Overflow)?,
                }
            }
            CExpr::Cmp(op, l, r) => {
                let ord = l.eval(m, s)?.cmp(&r.eval(m, s)?);
                i64::from(match op {
                    CmpOp::Eq => ord == Ordering::Equal,
                    CmpOp::Ne => ord != Ordering::Equal,
                    CmpOp::Lt => ord == Ordering::Less,
                    CmpOp::Le => ord != Ordering::Greater,
                    CmpOp::Gt => ord == Ordering::Greater,
                    CmpOp::Ge => ord != Ordering::Less,
                })
            }
            CExpr::Not(e) => 1 - e.eval(m, s)?,
            CExpr::Logic(op, l, r) => {
                let l = l.eval(m, s)? != 0;
                let b = match op {
                    BoolOp::And => l && r.eval(m, s)? != 0,
                    BoolOp::Or => l || r.eval(m, s)? != 0,
                    BoolOp::Implies => !l || r.eval(m, s)? != 0,
                    BoolOp::Iff => l == (r.eval(m, s)? != 0),
                };
                i64::from(b)
            }
        })
    }

    fn is_const(&self) -> bool {
        match self {
            CExpr::Const(_) => true,
            CExpr::Slot(_) | CExpr::Indexed(_) => false,
            CExpr::Arith(_, l, r) | CExpr::Cmp(_, l, r) | CExpr::Logic(_, l, r) => l.is_const() && r.is_const(),
            CExpr::Not(e) => e.is_const(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) enum SlotRef {
    Fixed(usize),
    Indexed(Box<Indexed>),
}

#[derive(Debug, Clone)]
pub(crate) enum CRule {
    Update(SlotRef, CExpr),
    Par(Vec<CRule>),
    If(CExpr, Box<CRule>, Option<Box<CRule>>),
}

impl CRule {
    pub fn collect(&self, m: &Machine, s: &[i64], out: &mut Vec<(usize, i64)>) -> Result<(), InterpError> {
        match self {
            CRule::Update(target, value) => {
                let slot = match target {
                    SlotRef::Fixed(i) => *i,
                    SlotRef::Indexed(ix) => ix.slot(m, s)?,
                };
                out.push((slot, value.eval(m, s)?));
            }
            CRule::Par(rules) => {
                for r in rules {
                    r.collect(m, s, out)?;
                }
            }
            CRule::If(g, then, otherwise) => {
                if g.eval(m, s)? != 0 {
                    then.collect(m, s, out)?;
                } else if let Some(e) = otherwise {
                    e.collect(m, s, out)?;
                }
            }
        }
        Ok(())
    }
}

/// A compiled Boolean condition over machine states.
#[derive(Debug, Clone)]
pub struct Condition {
    pub(crate) expr: CExpr,
    pub term: Term,
}

pub(crate) struct Compiler<'m> {
    m: &'m Machine,
    depth: usize,
}

fn invalid(msg: String) -> InterpError {
    InterpError::Invalid(crate::diag::Diagnostic::error("invalid-spec", msg).into())
}

impl<'m> Compiler<'m> {
    pub fn new(m: &'m Machine) -> Self {
        Compiler { m, depth: 0 }
    }

    fn fold(&self, e: CExpr) -> Result<CExpr, InterpError> {
        if e.is_const() && !matches!(e, CExpr::Const(_)) {
            e.eval(self.m, &[]).map(CExpr::Const)
        } else {
            Ok(e)
        }
    }

    pub fn location(&mut self, name: &str, arg: Option<&Term>) -> Result<SlotRef, InterpError> {
        let m = self.m;
        let decl = m.sig.function(name).ok_or_else(|| invalid(format!("unknown function '{name}'")))?;
        match (&decl.arg_domain, arg) {
            (None, _) => m
                .slot_of(&Location { function: name.to_string(), arg: None })
                .map(SlotRef::Fixed)
                .ok_or_else(|| invalid(format!("'{name}' has no location"))),
            (Some(dom), Some(a)) => {
                let codec = super::Codec::new(&m.sig.domains[dom]);
                let first = codec.decode(codec.lo);
                let base = m
                    .slot_of(&Location { function: name.to_string(), arg: Some(first) })
                    .ok_or_else(|| invalid(format!("'{name}' has no location")))?;
                let ix = Indexed {
                    base,
                    lo: codec.lo,
                    size: codec.size,
                    arg: self.expr(a)?,
                    function: name.to_string(),
                    domain: dom.clone(),
                };
                if let CExpr::Const(_) = ix.arg {
                    return Ok(SlotRef::Fixed(ix.slot(m, &[])?));
                }
                Ok(SlotRef::Indexed(Box::new(ix)))
            }
            (Some(_), None) => Err(invalid(format!("'{name}' expects an argument"))),
        }
    }

    pub fn expr(&mut self, t: &Term) -> Result<CExpr, InterpError> {
        let m = self.m;
        let e = match t {
            Term::Int(i) => CExpr::Const(*i),
            Term::Bool(b) => CExpr::Const(i64::from(*b)),
            Term::Var(v) => return Err(invalid(format!("unbound variable ${v}"))),
            Term::App { name, arg } => {
                if let Some(decl) = m.sig.function(name) {
                    match decl.kind {
                        FunctionKind::Controlled | FunctionKind::Monitored => {
                            match self.location(name, arg.as_deref())? {
                                SlotRef::Fixed(i) => CExpr::Slot(i),
                                SlotRef::Indexed(ix) => CExpr::Indexed(ix),
                            }
                        }
                        FunctionKind::Static | FunctionKind::Derived => {
                            let def = m
                                .spec
                                .definitions
                                .iter()
                                .find(|d| d.name == *name)
                                .ok_or_else(|| invalid(format!("'{name}' has no definition")))?;
                            let body = match (&def.param, arg) {
                                (Some(p), Some(a)) => def.body.substitute(&p.var, a),
                                _ => def.body.clone(),
                            };
                            self.depth += 1;
                            if self.depth > MAX_INLINE {
                                return Err(invalid(format!("definition of '{name}' nests too deeply")));
                            }
                            let e = self.expr(&body);
                            self.depth -= 1;
                            e?
                        }
                    }
                } else if let Some(dom) = m.sig.enum_domain_of(name) {
                    let codec = super::Codec::new(&m.sig.domains[dom]);
                    CExpr::Const(codec.encode(&Value::Enum(name.clone())).unwrap_or(0))
                } else {
                    return Err(invalid(format!("unknown symbol '{name}'")));
                }
            }
            Term::Arith { op, lhs, rhs } => CExpr::Arith(*op, Box::new(self.expr(lhs)?), Box::new(self.expr(rhs)?)),
            Term::Cmp { op, lhs, rhs } => CExpr::Cmp(*op, Box::new(self.expr(lhs)?), Box::new(self.expr(rhs)?)),
            Term::Not(inner) => CExpr::Not(Box::new(self.expr(inner)?)),
            Term::Logic { op, lhs, rhs } => CExpr::Logic(*op, Box::new(self.expr(lhs)?), Box::new(self.expr(rhs)?)),
        };
        self.fold(e)
    }

    pub fn rule(&mut self, r: &Rule) -> Result<CRule, InterpError> {
        Ok(match r {
            Rule::Update { function, arg, value } => {
                CRule::Update(self.location(function, arg.as_ref())?, self.expr(value)?)
            }
            Rule::Par(rules) => CRule::Par(rules.iter().map(|r| self.rule(r)).collect::<Result<_, _>>()?),
            Rule::If { guard, then, otherwise } => {
                let g = self.expr(guard)?;
                let then = Box::new(self.rule(then)?);
                let otherwise = match otherwise {
                    Some(e) => Some(Box::new(self.rule(e)?)),
                    None => None,
                };
                CRule::If(g, then, otherwise)
            }
            Rule::Call(name) => {
                let body = &self
                    .m
                    .spec
                    .macro_rule(name)
                    .ok_or_else(|| invalid(format!("unknown macro rule '{name}'")))?
                    .body;
                self.depth += 1;
                if self.depth > MAX_INLINE {
                    return Err(invalid(format!("macro '{name}' nests too deeply")));
                }
                let r = self.rule(body);
                self.depth -= 1;
                r?
            }
        })
    }
}

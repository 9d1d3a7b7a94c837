//! Direct evaluation of `ASSIGN` semantics, used to cross-check emission
//! against the interpreter without NuSMV.

use std::collections::HashMap;
use std::fmt;

use super::ast::*;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SmvValue {
    Bool(bool),
    Int(i64),
    Sym(String),
}

impl fmt::Display for SmvValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SmvValue::Bool(b) => f.write_str(if *b { "TRUE" } else { "FALSE" }),
            SmvValue::Int(i) => write!(f, "{i}"),
            SmvValue::Sym(s) => f.write_str(s),
        }
    }
}

pub type Env = HashMap<String, SmvValue>;

pub struct Simulator<'p> {
    prog: &'p SmvProgram,
}

impl<'p> Simulator<'p> {
    pub fn new(prog: &'p SmvProgram) -> Self {
        Simulator { prog }
    }

    fn is_const(&self, name: &str) -> bool {
        self.prog.vars.iter().any(|(_, t)| matches!(t, SmvType::Enum(vs) if vs.iter().any(|v| v == name)))
    }

    pub fn eval(&self, e: &Expr, env: &Env) -> Result<SmvValue, String> {
        let int = |v: SmvValue| match v {
            SmvValue::Int(i) => Ok(i),
            other => Err(format!("expected an integer, found {other}")),
        };
        let boolean = |v: SmvValue| match v {
            SmvValue::Bool(b) => Ok(b),
            other => Err(format!("expected a boolean, found {other}")),
        };
        Ok(match e {
            Expr::Int(i) => SmvValue::Int(*i),
            Expr::Bool(b) => SmvValue::Bool(*b),
            Expr::Ident(n) => match env.get(n) {
                Some(v) => v.clone(),
                None if self.is_const(n) => SmvValue::Sym(n.clone()),
                None => return Err(format!("undefined identifier '{n}'")),
            },
            Expr::Unary(UnOp::Not, x) => SmvValue::Bool(!boolean(self.eval(x, env)?)?),
            Expr::Unary(UnOp::Neg, x) => SmvValue::Int(-int(self.eval(x, env)?)?),
            Expr::Binary(op, l, r) => {
                let (l, r) = (self.eval(l, env)?, self.eval(r, env)?);
                match op {
                    BinOp::Implies => SmvValue::Bool(!boolean(l)? || boolean(r)?),
                    BinOp::Iff => SmvValue::Bool(boolean(l)? == boolean(r)?),
                    BinOp::Or => SmvValue::Bool(boolean(l)? || boolean(r)?),
                    BinOp::And => SmvValue::Bool(boolean(l)? && boolean(r)?),
                    BinOp::Eq => SmvValue::Bool(l == r),
                    BinOp::Ne => SmvValue::Bool(l != r),
                    BinOp::Lt => SmvValue::Bool(int(l)? < int(r)?),
                    BinOp::Le => SmvValue::Bool(int(l)? <= int(r)?),
                    BinOp::Gt => SmvValue::Bool(int(l)? > int(r)?),
                    BinOp::Ge => SmvValue::Bool(int(l)? >= int(r)?),
                    BinOp::Add => SmvValue::Int(int(l)?.checked_add(int(r)?).ok_or("overflow")?),
                    BinOp::Sub => SmvValue::Int(int(l)?.checked_sub(int(r)?).ok_or("overflow")?),
                    BinOp::Mod => {
                        let (a, b) = (int(l)?, int(r)?);
                        if b == 0 {
                            return Err("mod by zero".into());
                        }
                        SmvValue::Int(a.rem_euclid(b))
                    }
                }
            }
            Expr::Case(arms) => {
                for (c, v) in arms {
                    if boolean(self.eval(c, env)?)? {
                        return self.eval(v, env);
                    }
                }
                return Err("no case arm applies".into());
            }
            Expr::Temporal(..) | Expr::Until { .. } => return Err("temporal operator outside a specification".into()),
        })
    }

    /// Values of every variable with a `next` assignment.
    pub fn next(&self, env: &Env) -> Result<Env, String> {
        self.prog.nexts.iter().map(|(n, e)| Ok((n.clone(), self.eval(e, env)?))).collect()
    }

    /// Values of every variable with an `init` assignment.
    pub fn init(&self) -> Result<Env, String> {
        let empty = Env::new();
        self.prog.inits.iter().map(|(n, e)| Ok((n.clone(), self.eval(e, &empty)?))).collect()
    }
}

//! The NuSMV subset: expressions, a single `main` module, and its printer.

use std::fmt::Write as _;

use crate::lang::{CtlOp, LtlOp, PathQuantifier};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Implies,
    Iff,
    Or,
    And,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mod,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Implies => "->",
            BinOp::Iff => "<->",
            BinOp::Or => "|",
            BinOp::And => "&",
            BinOp::Eq => "=",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mod => "mod",
        }
    }

    pub(crate) fn level(self) -> u8 {
        match self {
            BinOp::Implies => 1,
            BinOp::Iff => 2,
            BinOp::Or => 3,
            BinOp::And => 4,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 5,
            BinOp::Add | BinOp::Sub => 6,
            BinOp::Mod => 7,
        }
    }
}

const UNARY: u8 = 8;
const ATOM: u8 = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Temporal {
    Ctl(CtlOp),
    Ltl(LtlOp),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Int(i64),
    Bool(bool),
    Ident(String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// `case c1 : v1; ... esac`
    Case(Vec<(Expr, Expr)>),
    Temporal(Temporal, Box<Expr>),
    /// `A[p U q]`, `E[p U q]`, or LTL `(p U q)` when `quant` is `None`.
    Until { quant: Option<PathQuantifier>, lhs: Box<Expr>, rhs: Box<Expr> },
}

impl Expr {
    pub fn bin(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Binary(op, Box::new(l), Box::new(r))
    }

    pub fn negate(e: Expr) -> Expr {
        Expr::Unary(UnOp::Not, Box::new(e))
    }

    /// Conjunction that drops `TRUE` operands.
    pub fn and(l: Expr, r: Expr) -> Expr {
        match (l, r) {
            (Expr::Bool(true), x) | (x, Expr::Bool(true)) => x,
            (l, r) => Expr::bin(BinOp::And, l, r),
        }
    }

    fn level(&self) -> u8 {
        match self {
            Expr::Int(i) if *i < 0 => UNARY,
            Expr::Unary(..) => UNARY,
            Expr::Binary(op, ..) => op.level(),
            _ => ATOM,
        }
    }

    /// Every identifier the expression reads.
    pub fn idents<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Int(_) | Expr::Bool(_) => {}
            Expr::Ident(s) => out.push(s),
            Expr::Unary(_, e) | Expr::Temporal(_, e) => e.idents(out),
            Expr::Binary(_, l, r) | Expr::Until { lhs: l, rhs: r, .. } => {
                l.idents(out);
                r.idents(out);
            }
            Expr::Case(arms) => {
                for (c, v) in arms {
                    c.idents(out);
                    v.idents(out);
                }
            }
        }
    }
}

fn write_expr(out: &mut String, e: &Expr, min: u8) {
    let paren = e.level() < min;
    if paren {
        out.push('(');
    }
    match e {
        Expr::Int(i) => {
            let _ = write!(out, "{i}");
        }
        Expr::Bool(b) => out.push_str(if *b { "TRUE" } else { "FALSE" }),
        Expr::Ident(s) => out.push_str(s),
        Expr::Unary(op, inner) => {
            out.push(match op {
                UnOp::Not => '!',
                UnOp::Neg => '-',
            });
            write_expr(out, inner, UNARY);
        }
        Expr::Binary(op, l, r) => {
            let lv = op.level();
            // `->` is right-associative; `<->` and comparisons are
            // parenthesized on both sides; the rest are left-associative.
            let (lmin, rmin) = match op {
                BinOp::Implies => (lv + 1, lv),
                BinOp::Iff => (lv + 1, lv + 1),
                _ if lv == 5 => (lv + 1, lv + 1),
                _ => (lv, lv + 1),
            };
            write_expr(out, l, lmin);
            let _ = write!(out, " {} ", op.symbol());
            write_expr(out, r, rmin);
        }
        Expr::Case(arms) => {
            out.push_str("case ");
            for (c, v) in arms {
                write_expr(out, c, 0);
                out.push_str(" : ");
                write_expr(out, v, 0);
                out.push_str("; ");
            }
            out.push_str("esac");
        }
        Expr::Temporal(op, inner) => {
            out.push_str(match op {
                Temporal::Ctl(c) => c.upper(),
                Temporal::Ltl(l) => l.upper(),
            });
            out.push('(');
            write_expr(out, inner, 0);
            out.push(')');
        }
        Expr::Until { quant, lhs, rhs } => {
            let (open, close) = match quant {
                Some(PathQuantifier::All) => ("A[", "]"),
                Some(PathQuantifier::Exists) => ("E[", "]"),
                None => ("(", ")"),
            };
            out.push_str(open);
            write_expr(out, lhs, ATOM);
            out.push_str(" U ");
            write_expr(out, rhs, ATOM);
            out.push_str(close);
        }
    }
    if paren {
        out.push(')');
    }
}

pub fn print_expr(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e, 0);
    s
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SmvType {
    Boolean,
    Range(i64, i64),
    Enum(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecKind {
    Ctl,
    Ltl,
}

/// A single-module NuSMV program.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SmvProgram {
    pub vars: Vec<(String, SmvType)>,
    pub inits: Vec<(String, Expr)>,
    pub nexts: Vec<(String, Expr)>,
    pub specs: Vec<(SpecKind, Expr)>,
}

impl SmvProgram {
    pub fn var_type(&self, name: &str) -> Option<&SmvType> {
        self.vars.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }
}

/// Renders a program; `case` blocks of `next` assignments span one line
/// per arm.
pub fn print_program(p: &SmvProgram) -> String {
    let mut out = String::from("MODULE main\n");
    if !p.vars.is_empty() {
        out.push_str("VAR\n");
        for (name, ty) in &p.vars {
            let ty = match ty {
                SmvType::Boolean => "boolean".to_string(),
                SmvType::Range(lo, hi) => format!("{lo}..{hi}"),
                SmvType::Enum(vs) => format!("{{{}}}", vs.join(", ")),
            };
            let _ = writeln!(out, "  {name} : {ty};");
        }
    }
    if !p.inits.is_empty() || !p.nexts.is_empty() {
        out.push_str("ASSIGN\n");
        for (name, e) in &p.inits {
            let _ = writeln!(out, "  init({name}) := {};", print_expr(e));
        }
        for (name, e) in &p.nexts {
            match e {
                Expr::Case(arms) => {
                    let _ = writeln!(out, "  next({name}) := case");
                    for (c, v) in arms {
                        let _ = writeln!(out, "    {} : {};", print_expr(c), print_expr(v));
                    }
                    out.push_str("  esac;\n");
                }
                other => {
                    let _ = writeln!(out, "  next({name}) := {};", print_expr(other));
                }
            }
        }
    }
    for (kind, e) in &p.specs {
        let kw = match kind {
            SpecKind::Ctl => "SPEC",
            SpecKind::Ltl => "LTLSPEC",
        };
        let _ = writeln!(out, "{kw} {}", print_expr(e));
    }
    out
}

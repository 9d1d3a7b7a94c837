//! Canonical text for specifications, formulas and scenarios.
//!
//! Output re-parses to a structurally equal AST; comments and the original
//! layout are not preserved.

use std::fmt::Write;

use super::ast::*;
use super::parser::lasso_comment;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormulaStyle {
    /// `AG(p implies AX(q))`, `E[p U q]`, `p U q`.
    Uppercase,
    /// AsmetaL library style: `ag(p implies ax(q))`, `e(p, q)`, `u(p, q)`.
    CallStyle,
}

// Binding strength, loosest first. A child whose level is below the level
// its position requires gets parentheses.
const IFF: u8 = 1;
const IMPLIES: u8 = 2;
const OR: u8 = 3;
const AND: u8 = 4;
const UNTIL: u8 = 5;
const NOT: u8 = 6;
const CMP: u8 = 7;
const ADD: u8 = 8;
const MUL: u8 = 9;
const ATOM: u8 = 10;

fn bool_level(op: BoolOp) -> u8 {
    match op {
        BoolOp::Iff => IFF,
        BoolOp::Implies => IMPLIES,
        BoolOp::Or => OR,
        BoolOp::And => AND,
    }
}

/// Required levels of (left, right) operands of a binary connective.
fn bool_operand_levels(op: BoolOp) -> (u8, u8) {
    let l = bool_level(op);
    match op {
        BoolOp::Implies => (l + 1, l),
        _ => (l, l + 1),
    }
}

fn term_level(t: &Term) -> u8 {
    match t {
        Term::Int(_) | Term::Bool(_) | Term::Var(_) | Term::App { .. } => ATOM,
        Term::Arith { op: ArithOp::Mod, .. } => MUL,
        Term::Arith { .. } => ADD,
        Term::Cmp { .. } => CMP,
        Term::Not(_) => NOT,
        Term::Logic { op, .. } => bool_level(*op),
    }
}

fn wrap(out: &mut String, paren: bool, body: impl FnOnce(&mut String)) {
    if paren {
        out.push('(');
    }
    body(out);
    if paren {
        out.push(')');
    }
}

fn write_term(out: &mut String, t: &Term, min: u8) {
    let level = term_level(t);
    wrap(out, level < min, |out| match t {
        Term::Int(i) => {
            let _ = write!(out, "{i}");
        }
        Term::Bool(b) => {
            let _ = write!(out, "{b}");
        }
        Term::Var(v) => {
            let _ = write!(out, "${v}");
        }
        Term::App { name, arg } => {
            out.push_str(name);
            if let Some(a) = arg {
                out.push('(');
                write_term(out, a, 0);
                out.push(')');
            }
        }
        Term::Arith { op, lhs, rhs } => {
            let sym = match op {
                ArithOp::Add => "+",
                ArithOp::Sub => "-",
                ArithOp::Mod => "mod",
            };
            write_term(out, lhs, level);
            let _ = write!(out, " {sym} ");
            write_term(out, rhs, level + 1);
        }
        Term::Cmp { op, lhs, rhs } => {
            write_term(out, lhs, CMP + 1);
            let _ = write!(out, " {} ", op.symbol());
            write_term(out, rhs, CMP + 1);
        }
        Term::Not(inner) => {
            out.push_str("not ");
            write_term(out, inner, NOT);
        }
        Term::Logic { op, lhs, rhs } => {
            let (l, r) = bool_operand_levels(*op);
            write_term(out, lhs, l);
            let _ = write!(out, " {} ", op.keyword());
            write_term(out, rhs, r);
        }
    });
}

pub fn print_term(t: &Term) -> String {
    let mut out = String::new();
    write_term(&mut out, t, 0);
    out
}

fn formula_level(f: &Formula) -> u8 {
    match f {
        Formula::Atom(t) => term_level(t),
        Formula::Not(_) => NOT,
        Formula::Logic { op, .. } => bool_level(*op),
        Formula::LtlUntil { .. } => UNTIL,
        Formula::Ctl(..) | Formula::Ltl(..) | Formula::CtlUntil { .. } => ATOM,
    }
}

fn write_formula(out: &mut String, f: &Formula, min: u8, style: FormulaStyle) {
    let level = formula_level(f);
    if let Formula::Atom(t) = f {
        write_term(out, t, min);
        return;
    }
    wrap(out, level < min, |out| match f {
        Formula::Atom(_) => unreachable!(),
        Formula::Not(inner) => {
            out.push_str("not ");
            write_formula(out, inner, NOT, style);
        }
        Formula::Logic { op, lhs, rhs } => {
            let (l, r) = bool_operand_levels(*op);
            write_formula(out, lhs, l, style);
            let _ = write!(out, " {} ", op.keyword());
            write_formula(out, rhs, r, style);
        }
        Formula::Ctl(op, inner) => {
            out.push_str(match style {
                FormulaStyle::Uppercase => op.upper(),
                FormulaStyle::CallStyle => op.lower(),
            });
            out.push('(');
            write_formula(out, inner, 0, style);
            out.push(')');
        }
        Formula::Ltl(op, inner) => {
            out.push_str(match style {
                FormulaStyle::Uppercase => op.upper(),
                FormulaStyle::CallStyle => op.lower(),
            });
            out.push('(');
            write_formula(out, inner, 0, style);
            out.push(')');
        }
        Formula::CtlUntil { quant, lhs, rhs } => match style {
            FormulaStyle::Uppercase => {
                out.push_str(if *quant == PathQuantifier::Exists { "E[" } else { "A[" });
                // `U` is not parsed at the top level inside the brackets.
                let min = |g: &Formula| if matches!(g, Formula::LtlUntil { .. }) { ATOM } else { 0 };
                write_formula(out, lhs, min(lhs), style);
                out.push_str(" U ");
                write_formula(out, rhs, min(rhs), style);
                out.push(']');
            }
            FormulaStyle::CallStyle => {
                out.push_str(if *quant == PathQuantifier::Exists { "e(" } else { "a(" });
                write_formula(out, lhs, 0, style);
                out.push_str(", ");
                write_formula(out, rhs, 0, style);
                out.push(')');
            }
        },
        Formula::LtlUntil { lhs, rhs } => match style {
            FormulaStyle::Uppercase => {
                write_formula(out, lhs, NOT, style);
                out.push_str(" U ");
                write_formula(out, rhs, UNTIL, style);
            }
            FormulaStyle::CallStyle => {
                out.push_str("u(");
                write_formula(out, lhs, 0, style);
                out.push_str(", ");
                write_formula(out, rhs, 0, style);
                out.push(')');
            }
        },
    });
}

pub fn print_formula(f: &Formula, style: FormulaStyle) -> String {
    let mut out = String::new();
    // Call-style `u(p, q)` is already self-delimiting.
    write_formula(&mut out, f, 0, style);
    out
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push('\t');
    }
}

fn write_rule(out: &mut String, r: &Rule, depth: usize) {
    indent(out, depth);
    match r {
        Rule::Update { function, arg, value } => {
            out.push_str(function);
            if let Some(a) = arg {
                let _ = write!(out, "({})", print_term(a));
            }
            let _ = writeln!(out, " := {}", print_term(value));
        }
        Rule::Par(rules) if rules.is_empty() => out.push_str("skip\n"),
        Rule::Par(rules) => {
            out.push_str("par\n");
            for r in rules {
                write_rule(out, r, depth + 1);
            }
            indent(out, depth);
            out.push_str("endpar\n");
        }
        Rule::If { guard, then, otherwise } => {
            let _ = writeln!(out, "if {} then", print_term(guard));
            write_rule(out, then, depth + 1);
            if let Some(e) = otherwise {
                indent(out, depth);
                out.push_str("else\n");
                write_rule(out, e, depth + 1);
            }
            indent(out, depth);
            out.push_str("endif\n");
        }
        Rule::Call(name) => {
            let _ = writeln!(out, "{name}[]");
        }
    }
}

fn write_param(out: &mut String, p: &Option<Param>) {
    if let Some(p) = p {
        let _ = write!(out, "(${} in {})", p.var, p.domain);
    }
}

/// Canonical AsmetaL text. Properties are printed in call style after the
/// macro rules and before the main rule.
pub fn print_asm(spec: &AsmSpecification) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "asm {}\n", spec.name);
    for i in &spec.imports {
        let _ = writeln!(out, "import {i}");
    }
    if !spec.imports.is_empty() {
        out.push('\n');
    }
    out.push_str("signature:\n");
    for d in &spec.domains {
        match &d.kind {
            DomainKind::IntRange { .. } => {
                let _ = writeln!(out, "\tdomain {} subsetof Integer", d.name);
            }
            DomainKind::Enumeration(vs) => {
                let _ = writeln!(out, "\tenum domain {} = {{{}}}", d.name, vs.join(" | "));
            }
            DomainKind::Boolean => {}
        }
    }
    for f in &spec.functions {
        let _ = write!(out, "\t{} {}: ", f.kind.keyword(), f.name);
        if let Some(a) = &f.arg_domain {
            let _ = write!(out, "{a} -> ");
        }
        let _ = writeln!(out, "{}", f.result_domain);
    }
    out.push_str("\ndefinitions:\n");
    let mut any = false;
    for d in &spec.domains {
        if let DomainKind::IntRange { lo, hi } = d.kind {
            let _ = writeln!(out, "\tdomain {} = {{{lo} : {hi}}}", d.name);
            any = true;
        }
    }
    if any {
        out.push('\n');
    }
    for def in &spec.definitions {
        let _ = write!(out, "\tfunction {}", def.name);
        write_param(&mut out, &def.param);
        let _ = writeln!(out, " = {}", print_term(&def.body));
    }
    if !spec.definitions.is_empty() {
        out.push('\n');
    }
    for r in &spec.macro_rules {
        let _ = writeln!(out, "\tmacro rule {} =", r.name);
        write_rule(&mut out, &r.body, 2);
        out.push('\n');
    }
    for p in &spec.properties {
        let kw = match p.logic {
            Logic::Ctl => "CTLSPEC",
            Logic::Ltl => "LTLSPEC",
        };
        let _ = writeln!(out, "\t{kw} {}", print_formula(&p.formula, FormulaStyle::CallStyle));
    }
    if !spec.properties.is_empty() {
        out.push('\n');
    }
    let _ = writeln!(out, "\tmain rule {} =", spec.main_rule.name);
    write_rule(&mut out, &spec.main_rule.body, 2);
    if let Some(name) = &spec.init_name {
        let _ = writeln!(out, "\ndefault init {name}:");
        for i in &spec.init {
            let _ = write!(out, "\tfunction {}", i.name);
            write_param(&mut out, &i.param);
            let _ = writeln!(out, " = {}", print_term(&i.value));
        }
    }
    out
}

pub fn print_avalla(sc: &AvallaScenario) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario {}", sc.name);
    let _ = writeln!(out, "load {}", sc.load);
    for c in &sc.commands {
        match c {
            Command::Set { function, arg, value } => {
                let _ = write!(out, "set {function}");
                if let Some(a) = arg {
                    let _ = write!(out, "({})", print_term(a));
                }
                let _ = writeln!(out, " := {};", print_term(value));
            }
            Command::Step => out.push_str("step;\n"),
            Command::Check(t) => {
                let _ = writeln!(out, "check {};", print_term(t));
            }
        }
    }
    if let Some(k) = sc.loop_start {
        let _ = writeln!(out, "{}", lasso_comment(k));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse_property, parse_term};

    #[test]
    fn reset_property_prints_canonically() {
        let f = parse_property("AG (min = 59 implies AX (min = 0))", Logic::Ctl, true).unwrap();
        assert_eq!(print_formula(&f, FormulaStyle::Uppercase), "AG(min = 59 implies AX(min = 0))");
        assert_eq!(print_formula(&f, FormulaStyle::CallStyle), "ag(min = 59 implies ax(min = 0))");
    }

    #[test]
    fn minimal_parentheses() {
        for src in ["(a or b) and c", "a or b and c", "(a implies b) implies c", "a - (b - c)", "(h + 1) mod 24", "not (a and b)"] {
            let t = parse_term(src).unwrap();
            assert_eq!(print_term(&t), src);
        }
    }

    #[test]
    fn until_printing() {
        let f = parse_property("(p U q) U r", Logic::Ltl, true).unwrap();
        assert_eq!(print_formula(&f, FormulaStyle::Uppercase), "(p U q) U r");
        assert_eq!(print_formula(&f, FormulaStyle::CallStyle), "u(u(p, q), r)");
        let f = parse_property("A[p or q U r]", Logic::Ctl, true).unwrap();
        assert_eq!(print_formula(&f, FormulaStyle::Uppercase), "A[p or q U r]");
    }
}

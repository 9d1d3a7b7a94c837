//! Recursive-descent parsers for the AsmetaL subset, Avalla scenarios and
//! temporal properties.
//!
//! Terms and formulas share one precedence ladder (loosest first):
//! `iff`, `implies` (right), `or`, `and`, `U` (right, formulas only),
//! `not`, comparisons (non-associative), `+ -`, `mod`, primaries.

use std::collections::HashSet;
use std::mem;

use super::ast::*;
use super::lexer::{Lexer, Tok, Token};
use crate::diag::{Diagnostic, Diagnostics, Span};

type PResult<T> = Result<T, Diagnostic>;

fn syntax(msg: impl Into<String>, span: Span) -> Diagnostic {
    Diagnostic::error("syntax-error", msg).at(span)
}

fn unsupported(construct: &str, span: Span) -> Diagnostic {
    Diagnostic::error("unsupported-construct", format!("unsupported construct: {construct}")).at(span)
}

fn duplicate(what: &str, name: &str, span: Span) -> Diagnostic {
    Diagnostic::error("duplicate-declaration", format!("duplicate {what} '{name}'")).at(span)
}

/// Rule-level AsmetaL keywords outside the supported subset.
const UNSUPPORTED_RULES: &[&str] = &[
    "seq", "choose", "forall", "let", "switch", "case", "extend", "while", "iterate", "local", "import", "skipif",
];

/// Term-level AsmetaL keywords outside the supported subset.
const UNSUPPORTED_TERMS: &[&str] = &["forall", "exist", "let", "if", "case", "switch", "xor", "seq", "choose"];

/// Words that can never start a term.
const RESERVED: &[&str] = &[
    "and", "or", "not", "implies", "iff", "mod", "then", "else", "endif", "par", "endpar", "endseq", "endlet",
    "endswitch", "do", "in", "with", "signature", "definitions", "main", "macro", "rule", "default", "init",
    "function", "domain", "CTLSPEC", "LTLSPEC", "skip", "asm", "scenario", "load", "set", "step", "check",
];

#[derive(Debug, Clone, Copy)]
struct Mode {
    /// `Some` when parsing a temporal formula: the expected logic and
    /// whether uppercase operators are accepted.
    temporal: Option<(Logic, bool)>,
}

impl Mode {
    const TERM: Mode = Mode { temporal: None };

    fn lenient(self) -> bool {
        matches!(self.temporal, Some((_, true)))
    }
}

fn ctl_op(name: &str, lenient: bool) -> Option<(CtlOp, bool)> {
    CtlOp::ALL.into_iter().find_map(|op| {
        if op.lower() == name {
            Some((op, true))
        } else if op.upper() == name {
            Some((op, lenient))
        } else {
            None
        }
    })
}

pub(crate) struct Parser<'a> {
    lx: Lexer<'a>,
    peeked: Option<Token>,
    prev_end: usize,
    block_until: bool,
    ctl_ops: Vec<Span>,
    ltl_ops: Vec<Span>,
}

impl<'a> Parser<'a> {
    pub(crate) fn new(src: &'a str) -> Self {
        Parser { lx: Lexer::new(src), peeked: None, prev_end: 0, block_until: false, ctl_ops: vec![], ltl_ops: vec![] }
    }

    fn peek(&mut self) -> PResult<&Token> {
        if self.peeked.is_none() {
            self.peeked = Some(self.lx.next_token()?);
        }
        Ok(self.peeked.as_ref().expect("peeked"))
    }

    fn bump(&mut self) -> PResult<Token> {
        let t = match self.peeked.take() {
            Some(t) => t,
            None => self.lx.next_token()?,
        };
        self.prev_end = t.end;
        Ok(t)
    }

    fn peek_span(&mut self) -> PResult<Span> {
        Ok(self.peek()?.span)
    }

    fn at_kw(&mut self, kw: &str) -> PResult<bool> {
        Ok(matches!(&self.peek()?.tok, Tok::Ident(s) if s == kw))
    }

    fn eat_kw(&mut self, kw: &str) -> PResult<bool> {
        if self.at_kw(kw)? {
            self.bump()?;
            Ok(true)
        } else {
            Ok(false)
        }
    }

    fn at_sym(&mut self, sym: &str) -> PResult<bool> {
        Ok(matches!(&self.peek()?.tok, Tok::Sym(s) if *s == sym))
    }

    fn eat_sym(&mut self, sym: &str) -> PResult<bool> {
        if self.at_sym(sym)? {
            self.bump()?;
            Ok(true)
        } else {
            Ok(false)
        }
    }

    fn at_eof(&mut self) -> PResult<bool> {
        Ok(self.peek()?.tok == Tok::Eof)
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<Span> {
        let t = self.peek()?.clone();
        match &t.tok {
            Tok::Ident(s) if s == kw => {
                self.bump()?;
                Ok(t.span)
            }
            other => Err(syntax(format!("expected '{kw}', found {}", other.describe()), t.span)),
        }
    }

    fn expect_sym(&mut self, sym: &str) -> PResult<Span> {
        let t = self.peek()?.clone();
        match &t.tok {
            Tok::Sym(s) if *s == sym => {
                self.bump()?;
                Ok(t.span)
            }
            other => Err(syntax(format!("expected '{sym}', found {}", other.describe()), t.span)),
        }
    }

    fn expect_ident(&mut self, what: &str) -> PResult<(String, Span)> {
        let t = self.peek()?.clone();
        match &t.tok {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                self.bump()?;
                Ok((s.clone(), t.span))
            }
            other => Err(syntax(format!("expected {what}, found {}", other.describe()), t.span)),
        }
    }

    fn expect_eof(&mut self) -> PResult<()> {
        let t = self.peek()?.clone();
        if t.tok == Tok::Eof {
            Ok(())
        } else {
            Err(syntax(format!("unexpected {} after end of input", t.tok.describe()), t.span))
        }
    }

    // -----------------------------------------------------------------------
    // Expressions

    fn expr(&mut self, m: Mode) -> PResult<(Formula, Span)> {
        let (mut lhs, span) = self.implies(m)?;
        while self.eat_kw("iff")? {
            let (rhs, _) = self.implies(m)?;
            lhs = Formula::logic(BoolOp::Iff, lhs, rhs);
        }
        Ok((lhs, span))
    }

    fn implies(&mut self, m: Mode) -> PResult<(Formula, Span)> {
        let (lhs, span) = self.or(m)?;
        if self.eat_kw("implies")? {
            let (rhs, _) = self.implies(m)?;
            return Ok((Formula::implies(lhs, rhs), span));
        }
        Ok((lhs, span))
    }

    fn or(&mut self, m: Mode) -> PResult<(Formula, Span)> {
        let (mut lhs, span) = self.and(m)?;
        loop {
            if self.eat_kw("or")? {
                let (rhs, _) = self.and(m)?;
                lhs = Formula::or(lhs, rhs);
            } else if self.at_kw("xor")? {
                return Err(unsupported("xor", self.peek_span()?));
            } else {
                return Ok((lhs, span));
            }
        }
    }

    fn and(&mut self, m: Mode) -> PResult<(Formula, Span)> {
        let (mut lhs, span) = self.until(m)?;
        while self.eat_kw("and")? {
            let (rhs, _) = self.until(m)?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok((lhs, span))
    }

    fn until(&mut self, m: Mode) -> PResult<(Formula, Span)> {
        let (lhs, span) = self.unary(m)?;
        if m.lenient() && !self.block_until && self.at_kw("U")? {
            let u = self.bump()?;
            self.ltl_ops.push(u.span);
            let (rhs, _) = self.until(m)?;
            return Ok((Formula::ltl_until(lhs, rhs), span));
        }
        Ok((lhs, span))
    }

    fn unary(&mut self, m: Mode) -> PResult<(Formula, Span)> {
        if self.at_kw("not")? {
            let span = self.bump()?.span;
            let (f, _) = self.unary(m)?;
            return Ok((Formula::not(f), span));
        }
        self.comparison(m)
    }

    fn comparison(&mut self, m: Mode) -> PResult<(Formula, Span)> {
        let (lhs, span) = self.additive(m)?;
        let op = match &self.peek()?.tok {
            Tok::Sym("=") => CmpOp::Eq,
            Tok::Sym("!=") => CmpOp::Ne,
            Tok::Sym("<") => CmpOp::Lt,
            Tok::Sym("<=") => CmpOp::Le,
            Tok::Sym(">") => CmpOp::Gt,
            Tok::Sym(">=") => CmpOp::Ge,
            _ => return Ok((lhs, span)),
        };
        self.bump()?;
        let (rhs, rspan) = self.additive(m)?;
        let t = Term::cmp(op, as_term(lhs, span)?, as_term(rhs, rspan)?);
        Ok((Formula::Atom(t), span))
    }

    fn additive(&mut self, m: Mode) -> PResult<(Formula, Span)> {
        let (mut lhs, span) = self.multiplicative(m)?;
        loop {
            let op = if self.at_sym("+")? {
                ArithOp::Add
            } else if self.at_sym("-")? {
                ArithOp::Sub
            } else {
                return Ok((lhs, span));
            };
            self.bump()?;
            let (rhs, rspan) = self.multiplicative(m)?;
            lhs = Formula::Atom(Term::arith(op, as_term(lhs, span)?, as_term(rhs, rspan)?));
        }
    }

    fn multiplicative(&mut self, m: Mode) -> PResult<(Formula, Span)> {
        let (mut lhs, span) = self.primary(m)?;
        while self.eat_kw("mod")? {
            let (rhs, rspan) = self.primary(m)?;
            lhs = Formula::Atom(Term::arith(ArithOp::Mod, as_term(lhs, span)?, as_term(rhs, rspan)?));
        }
        Ok((lhs, span))
    }

    /// Parses `( expr )` with `U` re-enabled inside the parentheses.
    fn parenthesized(&mut self, m: Mode) -> PResult<(Formula, Span)> {
        self.expect_sym("(")?;
        let saved = mem::replace(&mut self.block_until, false);
        let inner = self.expr(m);
        self.block_until = saved;
        let inner = inner?;
        self.expect_sym(")")?;
        Ok(inner)
    }

    fn primary(&mut self, m: Mode) -> PResult<(Formula, Span)> {
        let t = self.peek()?.clone();
        match t.tok {
            Tok::Int(i) => {
                self.bump()?;
                Ok((Formula::Atom(Term::Int(i)), t.span))
            }
            Tok::Var(v) => {
                self.bump()?;
                Ok((Formula::Atom(Term::Var(v)), t.span))
            }
            Tok::Sym("(") => {
                let (f, _) = self.parenthesized(m)?;
                Ok((f, t.span))
            }
            Tok::Ident(name) => {
                self.bump()?;
                let f = self.ident_primary(&name, t.span, m)?;
                Ok((f, t.span))
            }
            Tok::Sym("-") => Err(syntax("negative literals are not supported; use binary minus", t.span)),
            other => Err(syntax(format!("expected a term, found {}", other.describe()), t.span)),
        }
    }

    fn ident_primary(&mut self, name: &str, span: Span, m: Mode) -> PResult<Formula> {
        match name {
            "true" => return Ok(Formula::Atom(Term::Bool(true))),
            "false" => return Ok(Formula::Atom(Term::Bool(false))),
            _ => {}
        }
        if UNSUPPORTED_TERMS.contains(&name) {
            return Err(unsupported(name, span));
        }
        if RESERVED.contains(&name) {
            return Err(syntax(format!("expected a term, found '{name}'"), span));
        }
        if let Some((logic, lenient)) = m.temporal {
            if let Some(f) = self.temporal_primary(name, span, m, logic, lenient)? {
                return Ok(f);
            }
        }
        if self.at_sym("(")? {
            self.bump()?;
            let saved = mem::replace(&mut self.block_until, false);
            let arg = self.expr(m);
            self.block_until = saved;
            let (arg, aspan) = arg?;
            if self.at_sym(",")? {
                return Err(unsupported("n-ary function application", span));
            }
            self.expect_sym(")")?;
            return Ok(Formula::Atom(Term::app(name, Some(as_term(arg, aspan)?))));
        }
        Ok(Formula::Atom(Term::app(name, None)))
    }

    fn temporal_primary(
        &mut self,
        name: &str,
        span: Span,
        m: Mode,
        logic: Logic,
        lenient: bool,
    ) -> PResult<Option<Formula>> {
        if !self.at_sym("(")? && !self.at_sym("[")? {
            return Ok(None);
        }
        if let Some((op, allowed)) = ctl_op(name, lenient) {
            if !self.at_sym("(")? {
                return Ok(None);
            }
            if !allowed {
                return Err(syntax(format!("uppercase operator '{name}' requires lenient syntax; write '{}'", op.lower()), span));
            }
            self.ctl_ops.push(span);
            let (f, _) = self.parenthesized(m)?;
            return Ok(Some(Formula::ctl(op, f)));
        }
        let ltl_upper = LtlOp::ALL.into_iter().find(|op| op.upper() == name);
        let ltl_lower = LtlOp::ALL.into_iter().find(|op| op.lower() == name && logic == Logic::Ltl);
        if let Some(op) = ltl_upper.or(ltl_lower) {
            if !self.at_sym("(")? {
                return Ok(None);
            }
            if ltl_upper.is_some() && !lenient {
                return Err(syntax(format!("uppercase operator '{name}' requires lenient syntax; write '{}'", op.lower()), span));
            }
            self.ltl_ops.push(span);
            let (f, _) = self.parenthesized(m)?;
            return Ok(Some(Formula::ltl(op, f)));
        }
        if (name == "E" || name == "A") && self.at_sym("[")? {
            if !lenient {
                return Err(syntax(format!("'{name}[...]' requires lenient syntax"), span));
            }
            self.bump()?;
            self.ctl_ops.push(span);
            let saved = mem::replace(&mut self.block_until, true);
            let result = (|| {
                let (lhs, _) = self.expr(m)?;
                self.expect_kw("U")?;
                let (rhs, _) = self.expr(m)?;
                Ok((lhs, rhs))
            })();
            self.block_until = saved;
            let (lhs, rhs) = result?;
            self.expect_sym("]")?;
            let quant = if name == "E" { PathQuantifier::Exists } else { PathQuantifier::All };
            return Ok(Some(Formula::ctl_until(quant, lhs, rhs)));
        }
        let until_kind = match name {
            "e" | "eu" => Some(Some(PathQuantifier::Exists)),
            "a" | "au" => Some(Some(PathQuantifier::All)),
            "u" => Some(None),
            _ => None,
        };
        if let Some(kind) = until_kind {
            if !self.at_sym("(")? {
                return Ok(None);
            }
            self.bump()?;
            let saved = mem::replace(&mut self.block_until, false);
            let result = (|| {
                let (lhs, lspan) = self.expr(m)?;
                if !self.eat_sym(",")? {
                    return Ok(Err((lhs, lspan)));
                }
                let (rhs, _) = self.expr(m)?;
                Ok(Ok((lhs, rhs)))
            })();
            self.block_until = saved;
            self.expect_sym(")")?;
            return match result? {
                Ok((lhs, rhs)) => {
                    let f = match kind {
                        Some(quant) => {
                            self.ctl_ops.push(span);
                            Formula::ctl_until(quant, lhs, rhs)
                        }
                        None => {
                            self.ltl_ops.push(span);
                            Formula::ltl_until(lhs, rhs)
                        }
                    };
                    Ok(Some(f))
                }
                // A single argument: an ordinary unary function application.
                Err((arg, aspan)) => Ok(Some(Formula::Atom(Term::app(name, Some(as_term(arg, aspan)?))))),
            };
        }
        Ok(None)
    }

    fn term(&mut self) -> PResult<(Term, Span)> {
        let (f, span) = self.expr(Mode::TERM)?;
        Ok((as_term(f, span)?, span))
    }

    /// Parses a formula and checks that it does not mix CTL and LTL
    /// operators, nor use operators of the other logic.
    fn formula(&mut self, logic: Logic, lenient: bool) -> PResult<Formula> {
        self.ctl_ops.clear();
        self.ltl_ops.clear();
        let (f, _) = self.expr(Mode { temporal: Some((logic, lenient)) })?;
        let offending = match logic {
            Logic::Ctl => self.ltl_ops.first(),
            Logic::Ltl => self.ctl_ops.first(),
        };
        if let Some(span) = offending {
            let other = match logic {
                Logic::Ctl => Logic::Ltl,
                Logic::Ltl => Logic::Ctl,
            };
            return Err(Diagnostic::error("mixed-logic", format!("{other} operator in a {logic} formula")).at(*span));
        }
        Ok(f)
    }

    // -----------------------------------------------------------------------
    // Rules

    fn rule(&mut self) -> PResult<Rule> {
        let t = self.peek()?.clone();
        let Tok::Ident(word) = &t.tok else {
            return Err(syntax(format!("expected a rule, found {}", t.tok.describe()), t.span));
        };
        match word.as_str() {
            "par" => {
                self.bump()?;
                let mut rules = Vec::new();
                while !self.at_kw("endpar")? {
                    if self.at_eof()? {
                        return Err(syntax("expected 'endpar', found end of input", self.peek_span()?));
                    }
                    rules.push(self.rule()?);
                }
                self.bump()?;
                if rules.is_empty() {
                    return Err(syntax("empty 'par' block; use 'skip'", t.span));
                }
                Ok(Rule::Par(rules))
            }
            "skip" => {
                self.bump()?;
                Ok(Rule::Par(Vec::new()))
            }
            "if" => {
                self.bump()?;
                let (guard, _) = self.term()?;
                self.expect_kw("then")?;
                let then = self.rule()?;
                let otherwise = if self.eat_kw("else")? { Some(Box::new(self.rule()?)) } else { None };
                self.expect_kw("endif")?;
                Ok(Rule::If { guard, then: Box::new(then), otherwise })
            }
            w if UNSUPPORTED_RULES.contains(&w) => Err(unsupported(w, t.span)),
            _ => {
                let (name, span) = self.expect_ident("a rule")?;
                if self.eat_sym("[")? {
                    if !self.at_sym("]")? {
                        return Err(unsupported("parameterized macro call", span));
                    }
                    self.bump()?;
                    return Ok(Rule::Call(name));
                }
                let arg = if self.at_sym("(")? {
                    self.bump()?;
                    let (a, _) = self.term()?;
                    if self.at_sym(",")? {
                        return Err(unsupported("n-ary function application", span));
                    }
                    self.expect_sym(")")?;
                    Some(a)
                } else {
                    None
                };
                if !self.at_sym(":=")? {
                    let next = self.peek()?.clone();
                    return Err(syntax(
                        format!("expected ':=' or '[]' after '{name}', found {}", next.tok.describe()),
                        next.span,
                    ));
                }
                self.bump()?;
                let (value, _) = self.term()?;
                Ok(Rule::Update { function: name, arg, value })
            }
        }
    }

    // -----------------------------------------------------------------------
    // Specifications

    fn domain_type(&mut self) -> PResult<(String, Span)> {
        let t = self.peek()?.clone();
        match &t.tok {
            Tok::Ident(s) if s == "Prod" => Err(unsupported("n-ary function", t.span)),
            Tok::Ident(s) if ["Integer", "Natural", "Real", "String", "Char", "Complex", "Undef"].contains(&s.as_str()) => {
                Err(Diagnostic::error("unbounded-domain", format!("unsupported construct: unbounded domain {s}")).at(t.span))
            }
            Tok::Ident(s) if ["Seq", "Powerset", "Bag", "Map"].contains(&s.as_str()) => {
                Err(unsupported(&format!("{s} domain"), t.span))
            }
            Tok::Sym("(") => Err(unsupported("n-ary function", t.span)),
            _ => self.expect_ident("a domain name"),
        }
    }

    fn param(&mut self) -> PResult<Param> {
        self.expect_sym("(")?;
        let t = self.bump()?;
        let Tok::Var(var) = t.tok else {
            return Err(syntax(format!("expected a '$' parameter, found {}", t.tok.describe()), t.span));
        };
        self.expect_kw("in")?;
        let (domain, _) = self.domain_type()?;
        if self.at_sym(",")? {
            return Err(unsupported("n-ary function", self.peek_span()?));
        }
        self.expect_sym(")")?;
        Ok(Param { var, domain })
    }

    fn asm(&mut self) -> Result<AsmSpecification, Diagnostics> {
        let mut state = AsmBuilder::default();
        self.asm_inner(&mut state).map_err(Diagnostics::single)?;
        state.finish()
    }

    fn asm_inner(&mut self, b: &mut AsmBuilder) -> PResult<()> {
        if self.at_kw("module")? {
            return Err(unsupported("module", self.peek_span()?));
        }
        self.expect_kw("asm")?;
        let (name, _) = self.expect_ident("the machine name")?;
        b.name = name;
        while self.at_kw("import")? || self.at_kw("export")? {
            let t = self.bump()?;
            if let Tok::Ident(w) = &t.tok {
                if w == "export" {
                    return Err(unsupported("export", t.span));
                }
            }
            let (lib, span) = self.expect_ident("a module name")?;
            if lib != "StandardLibrary" {
                return Err(unsupported(&format!("import {lib}"), span));
            }
            if self.at_sym("(")? {
                return Err(unsupported("selective import", self.peek_span()?));
            }
            b.imports.push(lib);
        }
        self.expect_kw("signature")?;
        self.expect_sym(":")?;
        while !self.at_kw("definitions")? {
            self.signature_item(b)?;
        }
        self.bump()?;
        self.expect_sym(":")?;
        while !self.at_kw("default")? && !self.at_eof()? {
            self.definition_item(b)?;
        }
        if self.eat_kw("default")? {
            self.expect_kw("init")?;
            let (init_name, _) = self.expect_ident("an initial state name")?;
            self.expect_sym(":")?;
            b.init_name = Some(init_name);
            while self.at_kw("function")? {
                let span = self.bump()?.span;
                let (name, nspan) = self.expect_ident("a function name")?;
                let param = if self.at_sym("(")? { Some(self.param()?) } else { None };
                self.expect_sym("=")?;
                let (value, _) = self.term()?;
                let _ = span;
                b.init.push(InitDecl { name, param, value, span: nspan });
            }
        } else if self.at_kw("init")? {
            return Err(unsupported("non-default init", self.peek_span()?));
        }
        self.expect_eof()
    }

    fn signature_item(&mut self, b: &mut AsmBuilder) -> PResult<()> {
        let t = self.peek()?.clone();
        let Tok::Ident(word) = &t.tok else {
            return Err(syntax(format!("expected a signature declaration, found {}", t.tok.describe()), t.span));
        };
        match word.as_str() {
            "domain" => {
                self.bump()?;
                let (name, span) = self.expect_ident("a domain name")?;
                self.expect_kw("subsetof")?;
                let st = self.peek()?.clone();
                match &st.tok {
                    Tok::Ident(base) if base == "Integer" || base == "Natural" => {
                        self.bump()?;
                    }
                    Tok::Ident(base) => return Err(unsupported(&format!("subsetof {base}"), st.span)),
                    other => return Err(syntax(format!("expected 'Integer', found {}", other.describe()), st.span)),
                }
                b.domains.push(DomainDecl { name, kind: DomainKind::IntRange { lo: 0, hi: -1 }, span });
                b.pending_ranges.push(b.domains.len() - 1);
                Ok(())
            }
            "enum" => {
                self.bump()?;
                self.expect_kw("domain")?;
                let (name, span) = self.expect_ident("a domain name")?;
                self.expect_sym("=")?;
                self.expect_sym("{")?;
                let mut values = Vec::new();
                loop {
                    let (v, vspan) = self.expect_ident("an enumeration constant")?;
                    if values.contains(&v) {
                        return Err(duplicate("enumeration constant", &v, vspan));
                    }
                    values.push(v);
                    if !(self.eat_sym("|")? || self.eat_sym(",")?) {
                        break;
                    }
                }
                self.expect_sym("}")?;
                b.domains.push(DomainDecl { name, kind: DomainKind::Enumeration(values), span });
                Ok(())
            }
            "abstract" | "concrete" | "any" => Err(unsupported(&format!("{word} domain"), t.span)),
            "monitored" | "controlled" | "static" | "derived" => {
                self.bump()?;
                let kind = match word.as_str() {
                    "monitored" => FunctionKind::Monitored,
                    "controlled" => FunctionKind::Controlled,
                    "static" => FunctionKind::Static,
                    _ => FunctionKind::Derived,
                };
                let (name, span) = self.expect_ident("a function name")?;
                self.expect_sym(":")?;
                let (first, _) = self.domain_type()?;
                let (arg_domain, result_domain) = if self.eat_sym("->")? {
                    let (res, _) = self.domain_type()?;
                    (Some(first), res)
                } else {
                    (None, first)
                };
                b.functions.push(FunctionDecl { name, kind, arg_domain, result_domain, span });
                Ok(())
            }
            "shared" | "out" | "local" => Err(unsupported(&format!("{word} function"), t.span)),
            _ => Err(syntax(format!("expected a signature declaration, found '{word}'"), t.span)),
        }
    }

    fn definition_item(&mut self, b: &mut AsmBuilder) -> PResult<()> {
        let t = self.peek()?.clone();
        let Tok::Ident(word) = &t.tok else {
            return Err(syntax(format!("expected a definition, found {}", t.tok.describe()), t.span));
        };
        match word.as_str() {
            "domain" => {
                self.bump()?;
                let (name, span) = self.expect_ident("a domain name")?;
                self.expect_sym("=")?;
                self.expect_sym("{")?;
                let lo = self.int_literal()?;
                if !self.at_sym(":")? {
                    return Err(unsupported("enumerated integer domain", self.peek_span()?));
                }
                self.bump()?;
                let hi = self.int_literal()?;
                self.expect_sym("}")?;
                if lo > hi {
                    return Err(Diagnostic::error("invalid-domain", format!("domain '{name}' is empty: {lo} > {hi}")).at(span));
                }
                b.range_defs.push((name, lo, hi, span));
                Ok(())
            }
            "function" => {
                self.bump()?;
                let (name, span) = self.expect_ident("a function name")?;
                let param = if self.at_sym("(")? { Some(self.param()?) } else { None };
                self.expect_sym("=")?;
                let (body, _) = self.term()?;
                b.definitions.push(FunctionDef { name, param, body, span });
                Ok(())
            }
            "macro" => {
                self.bump()?;
                self.expect_kw("rule")?;
                let (name, span) = self.expect_ident("a rule name")?;
                if self.at_sym("(")? {
                    return Err(unsupported("parameterized macro rule", self.peek_span()?));
                }
                self.expect_sym("=")?;
                let body = self.rule()?;
                b.macro_rules.push(RuleDecl { name, body, span });
                Ok(())
            }
            "main" => {
                self.bump()?;
                self.expect_kw("rule")?;
                let (name, span) = self.expect_ident("a rule name")?;
                self.expect_sym("=")?;
                let body = self.rule()?;
                if b.main_rule.is_some() {
                    return Err(duplicate("main rule", &name, span));
                }
                b.main_rule = Some(RuleDecl { name, body, span });
                Ok(())
            }
            "CTLSPEC" | "LTLSPEC" => {
                self.bump()?;
                let logic = if word == "CTLSPEC" { Logic::Ctl } else { Logic::Ltl };
                let start = self.peek()?.start;
                let span = self.peek_span()?;
                let formula = self.formula(logic, true)?;
                let source_text = self.lx.source()[start..self.prev_end].to_string();
                b.properties.push(PropertyDecl { logic, formula, source_text, origin: Origin::HandWritten, span });
                Ok(())
            }
            "turbo" | "rule" => Err(unsupported(&format!("{word} rule"), t.span)),
            "invariant" | "JUSTICE" | "COMPASSION" | "FAIRNESS" | "INVARSPEC" => Err(unsupported(word, t.span)),
            _ => Err(syntax(format!("expected a definition, found '{word}'"), t.span)),
        }
    }

    fn int_literal(&mut self) -> PResult<i64> {
        let t = self.bump()?;
        match t.tok {
            Tok::Int(i) => Ok(i),
            Tok::Sym("-") => Err(syntax("negative literals are not supported in domains", t.span)),
            other => Err(syntax(format!("expected an integer, found {}", other.describe()), t.span)),
        }
    }

    // -----------------------------------------------------------------------
    // Scenarios

    fn avalla(&mut self) -> PResult<AvallaScenario> {
        self.expect_kw("scenario")?;
        let (name, _) = self.expect_ident("a scenario name")?;
        self.expect_kw("load")?;
        // The lookahead buffer is empty here: `expect_kw` consumed `load`.
        let load = match self.lx.raw_word() {
            Some((w, _)) => w,
            None => return Err(syntax("expected a file name after 'load'", self.lx.here())),
        };
        let mut commands = Vec::new();
        while !self.at_eof()? {
            let t = self.peek()?.clone();
            let Tok::Ident(word) = &t.tok else {
                return Err(syntax(format!("expected a command, found {}", t.tok.describe()), t.span));
            };
            match word.as_str() {
                "set" => {
                    self.bump()?;
                    let (function, _) = self.expect_ident("a function name")?;
                    let arg = if self.eat_sym("(")? {
                        let (a, _) = self.term()?;
                        self.expect_sym(")")?;
                        Some(a)
                    } else {
                        None
                    };
                    self.expect_sym(":=")?;
                    let (value, _) = self.term()?;
                    self.expect_sym(";")?;
                    commands.push(Command::Set { function, arg, value });
                }
                "step" => {
                    self.bump()?;
                    if self.at_kw("until")? {
                        return Err(Diagnostic::error("unknown-command", "unknown command: step until")
                            .at(self.peek_span()?));
                    }
                    self.expect_sym(";")?;
                    commands.push(Command::Step);
                }
                "check" => {
                    self.bump()?;
                    let (term, _) = self.term()?;
                    self.expect_sym(";")?;
                    commands.push(Command::Check(term));
                }
                other => {
                    return Err(Diagnostic::error("unknown-command", format!("unknown command: {other}")).at(t.span));
                }
            }
        }
        Ok(AvallaScenario { name, load, commands, loop_start: None })
    }
}

fn as_term(f: Formula, span: Span) -> PResult<Term> {
    match f {
        Formula::Atom(t) => Ok(t),
        _ => Err(Diagnostic::error("syntax-error", "temporal operator cannot appear inside a term").at(span)),
    }
}

#[derive(Default)]
struct AsmBuilder {
    name: String,
    imports: Vec<String>,
    domains: Vec<DomainDecl>,
    pending_ranges: Vec<usize>,
    range_defs: Vec<(String, i64, i64, Span)>,
    functions: Vec<FunctionDecl>,
    definitions: Vec<FunctionDef>,
    macro_rules: Vec<RuleDecl>,
    main_rule: Option<RuleDecl>,
    properties: Vec<PropertyDecl>,
    init_name: Option<String>,
    init: Vec<InitDecl>,
}

impl AsmBuilder {
    fn finish(mut self) -> Result<AsmSpecification, Diagnostics> {
        let mut diags = Diagnostics::new();
        let mut defined = HashSet::new();
        for (name, lo, hi, span) in std::mem::take(&mut self.range_defs) {
            if !defined.insert(name.clone()) {
                diags.push(duplicate("domain definition", &name, span));
                continue;
            }
            match self.pending_ranges.iter().find(|&&i| self.domains[i].name == name) {
                Some(&i) => self.domains[i].kind = DomainKind::IntRange { lo, hi },
                None => diags.push(
                    Diagnostic::error("undeclared-domain", format!("domain '{name}' is defined but not declared as 'subsetof Integer'"))
                        .at(span),
                ),
            }
        }
        for &i in &self.pending_ranges {
            let d = &self.domains[i];
            if !defined.contains(&d.name) {
                diags.push(
                    Diagnostic::error(
                        "unbounded-domain",
                        format!("unsupported construct: domain '{}' has no finite definition", d.name),
                    )
                    .at(d.span),
                );
            }
        }
        let main = match self.main_rule.take() {
            Some(m) => Some(m),
            None => {
                diags.push(Diagnostic::error("syntax-error", "missing 'main rule'"));
                None
            }
        };
        let mut seen = HashSet::new();
        if let Some(m) = &main {
            seen.insert(m.name.clone());
        }
        for r in &self.macro_rules {
            if !seen.insert(r.name.clone()) {
                diags.push(duplicate("rule", &r.name, r.span));
            }
        }
        let mut seen = HashSet::new();
        for d in &self.definitions {
            if !seen.insert(d.name.clone()) {
                diags.push(duplicate("function definition", &d.name, d.span));
            }
        }
        let mut seen = HashSet::new();
        for i in &self.init {
            if !seen.insert(i.name.clone()) {
                diags.push(duplicate("initializer", &i.name, i.span));
            }
        }
        if !diags.is_empty() {
            return Err(diags);
        }
        Ok(AsmSpecification {
            name: self.name,
            imports: self.imports,
            domains: self.domains,
            functions: self.functions,
            definitions: self.definitions,
            macro_rules: self.macro_rules,
            main_rule: main.expect("checked above"),
            properties: self.properties,
            init_name: self.init_name,
            init: self.init,
        })
    }
}

/// Parses an AsmetaL specification of the supported subset.
pub fn parse_asm(text: &str) -> Result<AsmSpecification, Diagnostics> {
    Parser::new(text).asm()
}

/// Parses a temporal property. With `lenient` set, uppercase operators
/// (`AG(...)`, `E[p U q]`, `p U q`) are accepted next to AsmetaL call-style
/// (`ag(...)`, `e(p, q)`, `u(p, q)`).
pub fn parse_property(text: &str, logic: Logic, lenient: bool) -> Result<Formula, Diagnostics> {
    let mut p = Parser::new(text);
    let f = p.formula(logic, lenient).map_err(Diagnostics::single)?;
    p.expect_eof().map_err(Diagnostics::single)?;
    Ok(f)
}

/// Parses a standalone first-order term.
pub fn parse_term(text: &str) -> Result<Term, Diagnostics> {
    let mut p = Parser::new(text);
    let (t, _) = p.term().map_err(Diagnostics::single)?;
    p.expect_eof().map_err(Diagnostics::single)?;
    Ok(t)
}

const LASSO_MARK: &str = "// lasso: loop starts at step ";

/// Parses an Avalla scenario.
pub fn parse_avalla(text: &str) -> Result<AvallaScenario, Diagnostics> {
    let mut sc = Parser::new(text).avalla().map_err(Diagnostics::single)?;
    sc.loop_start = text
        .lines()
        .filter_map(|l| l.trim().strip_prefix(LASSO_MARK))
        .find_map(|rest| rest.trim().parse().ok());
    Ok(sc)
}

pub(crate) fn lasso_comment(step: usize) -> String {
    format!("{LASSO_MARK}{step}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prop(text: &str) -> Formula {
        parse_property(text, Logic::Ctl, true).unwrap()
    }

    fn eq(name: &str, v: i64) -> Term {
        Term::eq(Term::var(name), Term::Int(v))
    }

    #[test]
    fn reset_property_shape() {
        let expected = Formula::ctl(
            CtlOp::AG,
            Formula::implies(Formula::Atom(eq("min", 59)), Formula::ctl(CtlOp::AX, Formula::Atom(eq("min", 0)))),
        );
        assert_eq!(prop("AG (min = 59 implies AX (min = 0))"), expected);
        assert_eq!(prop("ag(min = 59 implies ax(min = 0))"), expected);
    }

    #[test]
    fn mixed_logic_is_rejected_at_the_operator() {
        let err = parse_property("AG(F(sec = 0))", Logic::Ctl, true).unwrap_err();
        assert_eq!(err.codes(), ["mixed-logic"]);
        let span = err.entries[0].span.unwrap();
        assert_eq!((span.line, span.col), (1, 4));
        let err = parse_property("G(AX(p))", Logic::Ltl, true).unwrap_err();
        assert_eq!(err.codes(), ["mixed-logic"]);
    }

    #[test]
    fn strict_mode_rejects_uppercase() {
        let err = parse_property("AG(p)", Logic::Ctl, false).unwrap_err();
        assert_eq!(err.codes(), ["syntax-error"]);
        assert!(parse_property("ag(p)", Logic::Ctl, false).is_ok());
    }

    #[test]
    fn until_forms_agree() {
        let a = prop("E[p U q]");
        assert_eq!(a, prop("e(p, q)"));
        assert_eq!(a, prop("eu(p, q)"));
        assert!(matches!(a, Formula::CtlUntil { quant: PathQuantifier::Exists, .. }));
        let l = parse_property("p U q", Logic::Ltl, true).unwrap();
        assert_eq!(l, parse_property("u(p, q)", Logic::Ltl, true).unwrap());
    }

    #[test]
    fn single_letter_ltl_names_are_functions_in_ctl() {
        let f = prop("ag(f(3) = 1)");
        assert_eq!(
            f,
            Formula::ctl(CtlOp::AG, Formula::Atom(Term::eq(Term::app("f", Some(Term::Int(3))), Term::Int(1))))
        );
    }

    #[test]
    fn connectives_between_atoms_fold_into_the_term() {
        let f = prop("AG(min >= 0 and min <= 59)");
        let Formula::Ctl(CtlOp::AG, inner) = f else { panic!() };
        assert!(matches!(*inner, Formula::Atom(Term::Logic { op: BoolOp::And, .. })));
    }

    #[test]
    fn not_binds_looser_than_comparison() {
        assert_eq!(parse_term("not min = 59").unwrap(), Term::negate(eq("min", 59)));
    }

    #[test]
    fn arithmetic_precedence() {
        let t = parse_term("(min + 1) mod 60").unwrap();
        assert_eq!(t, Term::arith(ArithOp::Mod, Term::arith(ArithOp::Add, Term::var("min"), Term::Int(1)), Term::Int(60)));
        let t = parse_term("a - b - c").unwrap();
        assert_eq!(t, Term::arith(ArithOp::Sub, Term::arith(ArithOp::Sub, Term::var("a"), Term::var("b")), Term::var("c")));
    }

    #[test]
    fn implies_is_right_associative() {
        let t = parse_term("a implies b implies c").unwrap();
        assert_eq!(t, Term::logic(BoolOp::Implies, Term::var("a"), Term::logic(BoolOp::Implies, Term::var("b"), Term::var("c"))));
    }

    #[test]
    fn empty_text_expects_asm() {
        let err = parse_asm("").unwrap_err();
        assert_eq!(err.codes(), ["syntax-error"]);
        assert!(err.entries[0].message.contains("expected 'asm'"));
    }

    #[test]
    fn temporal_inside_term_is_an_error() {
        assert!(parse_property("AG(p) = true", Logic::Ctl, true).is_err());
    }

    #[test]
    fn avalla_unknown_command() {
        let err = parse_avalla("scenario S\nload X.asm\nexec foo;").unwrap_err();
        assert_eq!(err.codes(), ["unknown-command"]);
        assert!(err.entries[0].message.contains("exec"));
    }

    #[test]
    fn avalla_empty_and_lasso_marker() {
        let sc = parse_avalla("scenario S load X.asm").unwrap();
        assert!(sc.commands.is_empty());
        assert_eq!(sc.load, "X.asm");
        let sc = parse_avalla("scenario S\nload X.asm\nstep;\n// lasso: loop starts at step 0\n").unwrap();
        assert_eq!(sc.loop_start, Some(0));
    }

    #[test]
    fn unsupported_rule_constructs_are_named() {
        let src = "asm A\nsignature:\ncontrolled x: Boolean\ndefinitions:\nmain rule r_Main = choose $y in Boolean with true do x := $y\n";
        let err = parse_asm(src).unwrap_err();
        assert_eq!(err.entries[0].message, "unsupported construct: choose");
    }

    #[test]
    fn unbounded_integer_functions_are_rejected() {
        let src = "asm A\nsignature:\ncontrolled x: Integer\ndefinitions:\nmain rule r_Main = skip\n";
        let err = parse_asm(src).unwrap_err();
        assert_eq!(err.codes(), ["unbounded-domain"]);
    }

    #[test]
    fn duplicate_macro_rules() {
        let src = "asm A\nsignature:\ncontrolled x: Boolean\ndefinitions:\nmacro rule r_a = skip\nmacro rule r_a = skip\nmain rule r_Main = r_a[]\n";
        let err = parse_asm(src).unwrap_err();
        assert_eq!(err.codes(), ["duplicate-declaration"]);
    }
}

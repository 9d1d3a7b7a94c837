//! Parser for the NuSMV subset produced by the emitter.

use crate::diag::{Diagnostic, Span};
use crate::lang::{CtlOp, LtlOp, PathQuantifier};

use super::ast::*;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Sym(&'static str),
    Eof,
}

const SYMBOLS: &[&str] = &[
    "<->", ":=", "->", "!=", "<=", ">=", "..", "(", ")", "[", "]", "{", "}", ",", ":", ";", "=", "<", ">", "+", "-", "!",
    "&", "|",
];

fn lex(src: &str) -> Result<Vec<(Tok, Span)>, Diagnostic> {
    let mut out = Vec::new();
    let (mut line, mut col) = (1u32, 1u32);
    let bytes = src.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if src[i..].starts_with("--") {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), Span::new(line, col, (i - start) as u32)));
        } else if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let span = Span::new(line, col, (i - start) as u32);
            let v = src[start..i]
                .parse()
                .map_err(|_| Diagnostic::error("smv-syntax", "integer literal too large").at(span))?;
            out.push((Tok::Int(v), span));
        } else if let Some(sym) = SYMBOLS.iter().find(|s| src[i..].starts_with(**s)) {
            i += sym.len();
            out.push((Tok::Sym(sym), Span::new(line, col, sym.len() as u32)));
        } else {
            return Err(Diagnostic::error("smv-syntax", format!("unexpected character '{c}'")).at(Span::new(line, col, 1)));
        }
        col += (i - start) as u32;
    }
    out.push((Tok::Eof, Span::new(line, col, 1)));
    Ok(out)
}

const SECTIONS: &[&str] = &["MODULE", "VAR", "ASSIGN", "SPEC", "CTLSPEC", "LTLSPEC"];

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, what: &str) -> Result<T, Diagnostic> {
        let found = match self.peek() {
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Int(i) => format!("'{i}'"),
            Tok::Sym(s) => format!("'{s}'"),
            Tok::Eof => "end of input".into(),
        };
        Err(Diagnostic::error("smv-syntax", format!("expected {what}, found {found}")).at(self.span()))
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == k)
    }

    fn sym(&mut self, s: &str) -> Result<(), Diagnostic> {
        if self.is_sym(s) {
            self.bump();
            Ok(())
        } else {
            self.err(&format!("'{s}'"))
        }
    }

    fn kw(&mut self, k: &str) -> Result<(), Diagnostic> {
        if self.is_kw(k) {
            self.bump();
            Ok(())
        } else {
            self.err(&format!("'{k}'"))
        }
    }

    fn ident(&mut self) -> Result<String, Diagnostic> {
        match self.peek().clone() {
            Tok::Ident(s) if !SECTIONS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            _ => self.err("an identifier"),
        }
    }

    fn int(&mut self) -> Result<i64, Diagnostic> {
        let neg = self.is_sym("-");
        if neg {
            self.bump();
        }
        match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                Ok(if neg { -i } else { i })
            }
            _ => self.err("an integer"),
        }
    }

    fn program(&mut self) -> Result<SmvProgram, Diagnostic> {
        let mut p = SmvProgram::default();
        self.kw("MODULE")?;
        self.kw("main")?;
        loop {
            match self.peek().clone() {
                Tok::Eof => return Ok(p),
                Tok::Ident(k) if k == "VAR" => {
                    self.bump();
                    while matches!(self.peek(), Tok::Ident(s) if !SECTIONS.contains(&s.as_str())) {
                        let name = self.ident()?;
                        self.sym(":")?;
                        let ty = self.ty()?;
                        self.sym(";")?;
                        p.vars.push((name, ty));
                    }
                }
                Tok::Ident(k) if k == "ASSIGN" => {
                    self.bump();
                    while self.is_kw("init") || self.is_kw("next") {
                        let is_init = self.is_kw("init");
                        self.bump();
                        self.sym("(")?;
                        let name = self.ident()?;
                        self.sym(")")?;
                        self.sym(":=")?;
                        let e = self.expr()?;
                        self.sym(";")?;
                        if is_init {
                            p.inits.push((name, e));
                        } else {
                            p.nexts.push((name, e));
                        }
                    }
                }
                Tok::Ident(k) if k == "SPEC" || k == "CTLSPEC" || k == "LTLSPEC" => {
                    self.bump();
                    let kind = if k == "LTLSPEC" { SpecKind::Ltl } else { SpecKind::Ctl };
                    let e = self.expr()?;
                    if self.is_sym(";") {
                        self.bump();
                    }
                    p.specs.push((kind, e));
                }
                _ => return self.err("a section keyword"),
            }
        }
    }

    fn ty(&mut self) -> Result<SmvType, Diagnostic> {
        if self.is_kw("boolean") {
            self.bump();
            return Ok(SmvType::Boolean);
        }
        if self.is_sym("{") {
            self.bump();
            let mut vs = vec![self.ident()?];
            while self.is_sym(",") {
                self.bump();
                vs.push(self.ident()?);
            }
            self.sym("}")?;
            return Ok(SmvType::Enum(vs));
        }
        let lo = self.int()?;
        self.sym("..")?;
        let hi = self.int()?;
        Ok(SmvType::Range(lo, hi))
    }

    fn expr(&mut self) -> Result<Expr, Diagnostic> {
        let l = self.iff()?;
        if self.is_sym("->") {
            self.bump();
            let r = self.expr()?;
            return Ok(Expr::bin(BinOp::Implies, l, r));
        }
        Ok(l)
    }

    fn binary_left(
        &mut self,
        ops: &[(&str, BinOp)],
        next: fn(&mut Self) -> Result<Expr, Diagnostic>,
    ) -> Result<Expr, Diagnostic> {
        let mut l = next(self)?;
        'outer: loop {
            for (s, op) in ops {
                let hit = if *s == "mod" { self.is_kw("mod") } else { self.is_sym(s) };
                if hit {
                    self.bump();
                    let r = next(self)?;
                    l = Expr::bin(*op, l, r);
                    continue 'outer;
                }
            }
            return Ok(l);
        }
    }

    fn iff(&mut self) -> Result<Expr, Diagnostic> {
        self.binary_left(&[("<->", BinOp::Iff)], Self::or)
    }

    fn or(&mut self) -> Result<Expr, Diagnostic> {
        self.binary_left(&[("|", BinOp::Or)], Self::and)
    }

    fn and(&mut self) -> Result<Expr, Diagnostic> {
        self.binary_left(&[("&", BinOp::And)], Self::cmp)
    }

    fn cmp(&mut self) -> Result<Expr, Diagnostic> {
        let l = self.add()?;
        let ops = [
            ("=", BinOp::Eq),
            ("!=", BinOp::Ne),
            ("<=", BinOp::Le),
            (">=", BinOp::Ge),
            ("<", BinOp::Lt),
            (">", BinOp::Gt),
        ];
        for (s, op) in ops {
            if self.is_sym(s) {
                self.bump();
                let r = self.add()?;
                return Ok(Expr::bin(op, l, r));
            }
        }
        Ok(l)
    }

    fn add(&mut self) -> Result<Expr, Diagnostic> {
        self.binary_left(&[("+", BinOp::Add), ("-", BinOp::Sub)], Self::mul)
    }

    fn mul(&mut self) -> Result<Expr, Diagnostic> {
        self.binary_left(&[("mod", BinOp::Mod)], Self::unary)
    }

    fn unary(&mut self) -> Result<Expr, Diagnostic> {
        if self.is_sym("!") {
            self.bump();
            return Ok(Expr::Unary(UnOp::Not, Box::new(self.unary()?)));
        }
        if self.is_sym("-") {
            self.bump();
            if let Tok::Int(i) = *self.peek() {
                self.bump();
                return Ok(Expr::Int(-i));
            }
            return Ok(Expr::Unary(UnOp::Neg, Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, Diagnostic> {
        match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                Ok(Expr::Int(i))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                if self.is_kw("U") {
                    self.bump();
                    let r = self.expr()?;
                    self.sym(")")?;
                    return Ok(Expr::Until { quant: None, lhs: Box::new(e), rhs: Box::new(r) });
                }
                self.sym(")")?;
                Ok(e)
            }
            Tok::Ident(k) => {
                let temporal = CtlOp::ALL
                    .iter()
                    .find(|o| o.upper() == k)
                    .map(|o| Temporal::Ctl(*o))
                    .or_else(|| LtlOp::ALL.iter().find(|o| o.upper() == k).map(|o| Temporal::Ltl(*o)));
                if let Some(t) = temporal {
                    self.bump();
                    return Ok(Expr::Temporal(t, Box::new(self.unary()?)));
                }
                match k.as_str() {
                    "TRUE" | "FALSE" => {
                        self.bump();
                        Ok(Expr::Bool(k == "TRUE"))
                    }
                    "A" | "E" => {
                        self.bump();
                        self.sym("[")?;
                        let l = self.expr()?;
                        self.kw("U")?;
                        let r = self.expr()?;
                        self.sym("]")?;
                        let quant = if k == "A" { PathQuantifier::All } else { PathQuantifier::Exists };
                        Ok(Expr::Until { quant: Some(quant), lhs: Box::new(l), rhs: Box::new(r) })
                    }
                    "case" => {
                        self.bump();
                        let mut arms = Vec::new();
                        while !self.is_kw("esac") {
                            if matches!(self.peek(), Tok::Eof) || self.is_section() {
                                return self.err("'esac'");
                            }
                            let c = self.expr()?;
                            self.sym(":")?;
                            let v = self.expr()?;
                            self.sym(";")?;
                            arms.push((c, v));
                        }
                        self.bump();
                        if arms.is_empty() {
                            return self.err("at least one case arm");
                        }
                        Ok(Expr::Case(arms))
                    }
                    "mod" | "esac" | "U" | "init" | "next" => self.err("an expression"),
                    _ => Ok(Expr::Ident(self.ident()?)),
                }
            }
            _ => self.err("an expression"),
        }
    }

    fn is_section(&self) -> bool {
        matches!(self.peek(), Tok::Ident(s) if SECTIONS.contains(&s.as_str()) || s == "init" || s == "next")
    }
}

/// Parses program text into the subset AST.
pub fn parse_smv(text: &str) -> Result<SmvProgram, Diagnostic> {
    let toks = lex(text)?;
    Parser { toks, pos: 0 }.program()
}

/// Parses a single expression.
pub fn parse_smv_expr(text: &str) -> Result<Expr, Diagnostic> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if !matches!(p.peek(), Tok::Eof) {
        return p.err("end of input");
    }
    Ok(e)
}

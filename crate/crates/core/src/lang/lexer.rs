use crate::diag::{Diagnostic, Span};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// `$x`
    Var(String),
    Int(i64),
    Sym(&'static str),
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Var(s) => format!("'${s}'"),
            Tok::Int(i) => format!("'{i}'"),
            Tok::Sym(s) => format!("'{s}'"),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
    /// Byte offsets into the source.
    pub start: usize,
    pub end: usize,
}

// Longest first so that `:=` wins over `:`.
const SYMBOLS: &[&str] = &[
    ":=", "!=", "<=", ">=", "->", "(", ")", "[", "]", "{", "}", ",", ":", ";", "=", "<", ">", "+", "-", "|", ".",
];

/// On-demand tokenizer. `//` comments and whitespace are skipped; CRLF and
/// LF line endings are both accepted.
pub struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    pub fn new(src: &'a str) -> Self {
        let src = src.strip_prefix('\u{feff}').unwrap_or(src);
        Lexer { src, pos: 0, line: 1, col: 1 }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn advance(&mut self, bytes: usize) {
        for ch in self.src[self.pos..self.pos + bytes].chars() {
            if ch == '\n' {
                self.line += 1;
                self.col = 1;
            } else if ch != '\r' {
                self.col += 1;
            }
        }
        self.pos += bytes;
    }

    fn skip_trivia(&mut self) {
        loop {
            let rest = self.rest();
            let ws = rest.len() - rest.trim_start().len();
            if ws > 0 {
                self.advance(ws);
                continue;
            }
            if rest.starts_with("//") {
                let end = rest.find('\n').unwrap_or(rest.len());
                self.advance(end);
                continue;
            }
            break;
        }
    }

    pub fn source(&self) -> &'a str {
        self.src
    }

    pub fn here(&self) -> Span {
        Span::new(self.line, self.col, 1)
    }

    pub fn next_token(&mut self) -> Result<Token, Diagnostic> {
        self.skip_trivia();
        let start = self.pos;
        let tok = self.scan()?;
        Ok(Token { tok: tok.0, span: tok.1, start, end: self.pos })
    }

    fn scan(&mut self) -> Result<(Tok, Span), Diagnostic> {
        let (line, col) = (self.line, self.col);
        let rest = self.rest();
        let Some(ch) = rest.chars().next() else {
            return Ok((Tok::Eof, Span::new(line, col, 1)));
        };
        if ch.is_ascii_alphabetic() || ch == '_' {
            let len = rest.find(|c: char| !(c.is_ascii_alphanumeric() || c == '_')).unwrap_or(rest.len());
            let word = rest[..len].to_string();
            self.advance(len);
            return Ok((Tok::Ident(word), Span::new(line, col, len as u32)));
        }
        if ch == '$' {
            let body = &rest[1..];
            let len = body.find(|c: char| !(c.is_ascii_alphanumeric() || c == '_')).unwrap_or(body.len());
            if len == 0 {
                return Err(Diagnostic::error("lexical-error", "expected a variable name after '$'")
                    .at(Span::new(line, col, 1)));
            }
            let name = body[..len].to_string();
            self.advance(len + 1);
            return Ok((Tok::Var(name), Span::new(line, col, len as u32 + 1)));
        }
        if ch.is_ascii_digit() {
            let len = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
            let text = &rest[..len];
            let span = Span::new(line, col, len as u32);
            let value = text
                .parse::<i64>()
                .map_err(|_| Diagnostic::error("lexical-error", format!("integer literal {text} is too large")).at(span))?;
            self.advance(len);
            return Ok((Tok::Int(value), span));
        }
        for sym in SYMBOLS {
            if rest.starts_with(sym) {
                self.advance(sym.len());
                return Ok((Tok::Sym(sym), Span::new(line, col, sym.chars().count() as u32)));
            }
        }
        Err(Diagnostic::error("lexical-error", format!("unexpected character '{ch}'")).at(Span::new(line, col, 1)))
    }

    /// Reads a whitespace-delimited word verbatim (used for `load` paths).
    pub fn raw_word(&mut self) -> Option<(String, Span)> {
        self.skip_trivia();
        let rest = self.rest();
        let len = rest.find(|c: char| c.is_whitespace() || c == ';').unwrap_or(rest.len());
        if len == 0 {
            return None;
        }
        let span = Span::new(self.line, self.col, rest[..len].chars().count() as u32);
        let word = rest[..len].to_string();
        self.advance(len);
        Some((word, span))
    }
}

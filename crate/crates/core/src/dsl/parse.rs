use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use super::{BinOp, Expr, Formula, Func};

/// Maximum expression tree depth and parenthesis nesting.
pub const MAX_DEPTH: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    /// Byte offset into the source.
    pub offset: usize,
    pub expected: String,
    /// Up to 24 bytes of source starting at `offset`.
    pub excerpt: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.excerpt.is_empty() {
            write!(f, "at byte {}: expected {}, found end of input", self.offset, self.expected)
        } else {
            write!(f, "at byte {}: expected {}, near `{}`", self.offset, self.expected, self.excerpt)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

struct Parser<'s> {
    src: &'s str,
    pos: usize,
    tok: Tok,
    tok_start: usize,
    nesting: usize,
    n_players: usize,
    params: &'s [String],
}

fn excerpt(src: &str, offset: usize) -> String {
    let bytes = &src.as_bytes()[offset.min(src.len())..];
    String::from_utf8_lossy(&bytes[..bytes.len().min(24)]).into_owned()
}

/// Parses `source` against `n_players` strategy variables and the given
/// parameter names.
pub fn parse(source: &str, n_players: usize, param_names: &[String]) -> Result<Formula, ParseError> {
    let mut p = Parser { src: source, pos: 0, tok: Tok::End, tok_start: 0, nesting: 0, n_players, params: param_names };
    p.advance()?;
    let root = p.expr()?;
    if p.tok != Tok::End {
        return Err(p.error_here("an operator or end of input"));
    }
    Ok(Formula { root, n_players, params: Arc::from(param_names.to_vec()) })
}

impl<'s> Parser<'s> {
    fn error_at(&self, offset: usize, expected: impl Into<String>) -> ParseError {
        ParseError { offset, expected: expected.into(), excerpt: excerpt(self.src, offset) }
    }

    fn error_here(&self, expected: impl Into<String>) -> ParseError {
        self.error_at(self.tok_start, expected)
    }

    fn advance(&mut self) -> Result<(), ParseError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.tok_start = self.pos;
        let Some(&c) = bytes.get(self.pos) else {
            self.tok = Tok::End;
            return Ok(());
        };
        self.tok = match c {
            b'0'..=b'9' | b'.' => return self.number(),
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = self.pos;
                while self.pos < bytes.len() && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_') {
                    self.pos += 1;
                }
                return {
                    self.tok = Tok::Ident(self.src[start..self.pos].to_string());
                    Ok(())
                };
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => Tok::Op(c as char),
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            _ => return Err(self.error_here("a number, name, operator or parenthesis")),
        };
        self.pos += 1;
        Ok(())
    }

    fn number(&mut self) -> Result<(), ParseError> {
        let bytes = self.src.as_bytes();
        let start = self.pos;
        let digits = |p: &mut usize| {
            let s = *p;
            while *p < bytes.len() && bytes[*p].is_ascii_digit() {
                *p += 1;
            }
            *p - s
        };
        let mut p = self.pos;
        let mut count = digits(&mut p);
        if p < bytes.len() && bytes[p] == b'.' {
            p += 1;
            count += digits(&mut p);
        }
        if count == 0 {
            return Err(self.error_at(start, "digits in number"));
        }
        if p < bytes.len() && (bytes[p] == b'e' || bytes[p] == b'E') {
            let mut q = p + 1;
            if q < bytes.len() && (bytes[q] == b'+' || bytes[q] == b'-') {
                q += 1;
            }
            if digits(&mut q) == 0 {
                return Err(self.error_at(q.min(bytes.len()), "exponent digits"));
            }
            p = q;
        }
        let text = &self.src[start..p];
        let value: f64 = text.parse().map_err(|_| self.error_at(start, "a number"))?;
        if !value.is_finite() {
            return Err(self.error_at(start, "a finite number"));
        }
        self.pos = p;
        self.tok = Tok::Num(value);
        Ok(())
    }

    fn checked(&self, e: Expr, at: usize) -> Result<Expr, ParseError> {
        if e.depth() > MAX_DEPTH {
            Err(self.error_at(at, format!("an expression no deeper than {MAX_DEPTH}")))
        } else {
            Ok(e)
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.nesting += 1;
        if self.nesting > MAX_DEPTH {
            Err(self.error_here(format!("nesting no deeper than {MAX_DEPTH}")))
        } else {
            Ok(())
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        let mut depth = lhs.depth();
        while let Tok::Op(c @ ('+' | '-')) = self.tok {
            let at = self.tok_start;
            self.advance()?;
            let rhs = self.term()?;
            depth = 1 + depth.max(rhs.depth());
            if depth > MAX_DEPTH {
                return Err(self.error_at(at, format!("an expression no deeper than {MAX_DEPTH}")));
            }
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        let mut depth = lhs.depth();
        while let Tok::Op(c @ ('*' | '/')) = self.tok {
            let at = self.tok_start;
            self.advance()?;
            let rhs = self.unary()?;
            depth = 1 + depth.max(rhs.depth());
            if depth > MAX_DEPTH {
                return Err(self.error_at(at, format!("an expression no deeper than {MAX_DEPTH}")));
            }
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let result = if self.tok == Tok::Op('-') {
            let at = self.tok_start;
            self.advance()?;
            let inner = self.unary()?;
            self.checked(Expr::Neg(Box::new(inner)), at)
        } else {
            self.power()
        };
        self.nesting -= 1;
        result
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.tok == Tok::Op('^') {
            let at = self.tok_start;
            self.advance()?;
            let exp = self.unary()?;
            return self.checked(Expr::Binary { op: BinOp::Pow, lhs: Box::new(base), rhs: Box::new(exp) }, at);
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let start = self.tok_start;
        match std::mem::replace(&mut self.tok, Tok::End) {
            Tok::Num(v) => {
                self.advance()?;
                Ok(Expr::Num(v))
            }
            Tok::LParen => {
                self.advance()?;
                self.enter()?;
                let e = self.expr()?;
                self.nesting -= 1;
                self.expect_close()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.advance()?;
                if self.tok == Tok::LParen {
                    self.call(&name, start)
                } else {
                    self.resolve(&name, start)
                }
            }
            other => {
                self.tok = other;
                Err(self.error_here("a number, name or `(`"))
            }
        }
    }

    fn expect_close(&mut self) -> Result<(), ParseError> {
        if self.tok == Tok::RParen {
            self.advance()
        } else {
            Err(self.error_here("`)`"))
        }
    }

    fn call(&mut self, name: &str, start: usize) -> Result<Expr, ParseError> {
        let Some(func) = Func::from_name(name) else {
            return Err(self.error_at(start, format!("a known function (min, max, abs), not `{name}`")));
        };
        self.advance()?; // (
        self.enter()?;
        let mut args = vec![self.expr()?];
        while self.tok == Tok::Comma {
            self.advance()?;
            args.push(self.expr()?);
        }
        self.nesting -= 1;
        self.expect_close()?;
        if args.len() != func.arity() {
            return Err(self.error_at(
                start,
                format!("{} argument(s) to `{}`, got {}", func.arity(), func.name(), args.len()),
            ));
        }
        self.checked(Expr::Call { func, args }, start)
    }

    fn resolve(&self, name: &str, start: usize) -> Result<Expr, ParseError> {
        if let Some(digits) = name.strip_prefix('s') {
            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                return match digits.parse::<usize>() {
                    Ok(k) if k >= 1 && k <= self.n_players => Ok(Expr::Var(k - 1)),
                    _ => Err(self.error_at(
                        start,
                        format!("a strategy variable s1..s{}, not `{name}`", self.n_players),
                    )),
                };
            }
        }
        match self.params.iter().position(|p| p == name) {
            Some(k) => Ok(Expr::Param(k)),
            None => Err(self.error_at(start, format!("a declared parameter, not unknown name `{name}`"))),
        }
    }
}

use std::fmt;

use thiserror::Error;

use super::ast::{BinOp, Constant, Expr, Func};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    UnknownVariable,
    VelocityNotAllowed,
}

/// Parse failure. `offset` is 1-based; end of input is `len + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind:?} at offset {offset}: expected {expected}, found {found}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub offset: usize,
    pub expected: String,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(v) => write!(f, "number {v}"),
            Tok::Ident(s) => write!(f, "'{s}'"),
            Tok::Op(c) => write!(f, "'{c}'"),
            Tok::LParen => f.write_str("'('"),
            Tok::RParen => f.write_str("')'"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

fn syntax(offset: usize, expected: impl Into<String>, found: impl fmt::Display) -> ParseError {
    ParseError {
        kind: ParseErrorKind::Syntax,
        offset,
        expected: expected.into(),
        found: found.to_string(),
    }
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                let v: f64 = text
                    .parse()
                    .map_err(|_| syntax(start + 1, "number", format!("'{text}'")))?;
                if !v.is_finite() {
                    return Err(syntax(start + 1, "finite number", format!("'{text}'")));
                }
                out.push((start + 1, Tok::Num(v)));
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start + 1, Tok::Ident(src[start..i].to_string())));
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                i += 1;
                out.push((start + 1, Tok::Op(c as char)));
            }
            b'(' => {
                i += 1;
                out.push((start + 1, Tok::LParen));
            }
            b')' => {
                i += 1;
                out.push((start + 1, Tok::RParen));
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(syntax(start + 1, "token", format!("'{ch}'")));
            }
        }
    }
    out.push((src.len() + 1, Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    dim: usize,
    allow_velocity: bool,
}

/// Parses `src` for a space of dimension `dim`. Velocity variables are
/// rejected unless `allow_velocity` is set.
pub fn parse(src: &str, dim: usize, allow_velocity: bool) -> Result<Expr, ParseError> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        dim,
        allow_velocity,
    };
    let e = p.sum()?;
    match p.peek() {
        Tok::End => Ok(e),
        t => Err(syntax(p.offset(), "operator or end of input", t)),
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.product()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if let Tok::Op('-') = self.peek() {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if let Tok::Op('^') = self.peek() {
            self.bump();
            let exp = self.unary()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::LParen => {
                let e = self.sum()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Tok::Ident(name) => self.ident(offset, &name),
            t => Err(syntax(offset, "number, variable, function or '('", t)),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Tok::RParen => {
                self.bump();
                Ok(())
            }
            t => Err(syntax(self.offset(), "')'", t)),
        }
    }

    fn ident(&mut self, offset: usize, name: &str) -> Result<Expr, ParseError> {
        match name {
            "pi" => return Ok(Expr::Const(Constant::Pi)),
            "e" => return Ok(Expr::Const(Constant::E)),
            _ => {}
        }
        if let Some(func) = Func::from_name(name) {
            match self.peek() {
                Tok::LParen => {
                    self.bump();
                }
                t => return Err(syntax(self.offset(), format!("'(' after {name}"), t)),
            }
            let arg = self.sum()?;
            self.expect_rparen()?;
            return Ok(Expr::Call(func, Box::new(arg)));
        }
        let (velocity, digits) = if let Some(d) = name.strip_prefix("xdot") {
            (true, d)
        } else if let Some(d) = name.strip_prefix('x') {
            (false, d)
        } else {
            return Err(ParseError {
                kind: ParseErrorKind::UnknownVariable,
                offset,
                expected: "variable, constant or function".into(),
                found: format!("'{name}'"),
            });
        };
        let index = match digits.parse::<usize>() {
            Ok(i) if digits.bytes().all(|b| b.is_ascii_digit()) && i < self.dim => i,
            _ => {
                return Err(ParseError {
                    kind: ParseErrorKind::UnknownVariable,
                    offset,
                    expected: format!("variable index below dimension {}", self.dim),
                    found: format!("'{name}'"),
                })
            }
        };
        if velocity {
            if !self.allow_velocity {
                return Err(ParseError {
                    kind: ParseErrorKind::VelocityNotAllowed,
                    offset,
                    expected: format!("position variable x0..x{}", self.dim.saturating_sub(1)),
                    found: format!("'{name}'"),
                });
            }
            Ok(Expr::Vel(index))
        } else {
            Ok(Expr::Pos(index))
        }
    }
}

use std::fmt;

use thiserror::Error;

use super::{BinOp, Expr, Func};

#[derive(Clone, Debug, PartialEq, Error)]
#[error("syntax error at byte {offset}: {kind}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ParseErrorKind {
    Empty,
    UnexpectedChar(char),
    UnexpectedToken { found: String, expected: &'static str },
    UnexpectedEnd { expected: &'static str },
    InvalidNumber(String),
    UnknownIdentifier(String),
    VariableOutOfRange { index: usize, dim: usize },
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Empty => write!(f, "empty expression"),
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character `{c}`"),
            ParseErrorKind::UnexpectedToken { found, expected } => {
                write!(f, "found `{found}`, expected {expected}")
            }
            ParseErrorKind::UnexpectedEnd { expected } => {
                write!(f, "unexpected end of input, expected {expected}")
            }
            ParseErrorKind::InvalidNumber(s) => write!(f, "invalid number `{s}`"),
            ParseErrorKind::UnknownIdentifier(s) => write!(f, "unknown identifier `{s}`"),
            ParseErrorKind::VariableOutOfRange { index, dim } => {
                write!(f, "variable x{index} out of range for dimension {dim}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(v) => write!(f, "{v}"),
            Tok::Ident(s) => f.write_str(s),
            Tok::Op(c) => write!(f, "{c}"),
            Tok::LParen => f.write_str("("),
            Tok::RParen => f.write_str(")"),
        }
    }
}

fn err(offset: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { offset, kind }
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                out.push((i, Tok::Op(c as char)));
                i += 1;
            }
            b'(' => {
                out.push((i, Tok::LParen));
                i += 1;
            }
            b')' => {
                out.push((i, Tok::RParen));
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
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
                    .map_err(|_| err(start, ParseErrorKind::InvalidNumber(text.to_string())))?;
                if !v.is_finite() {
                    return Err(err(start, ParseErrorKind::InvalidNumber(text.to_string())));
                }
                out.push((start, Tok::Num(v)));
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(src[start..i].to_string())));
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(err(i, ParseErrorKind::UnexpectedChar(ch)));
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [(usize, Tok)],
    pos: usize,
    end: usize,
    dim: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn eat_op(&mut self, ops: &[char]) -> Option<char> {
        match self.peek() {
            Some(Tok::Op(c)) if ops.contains(c) => {
                let c = *c;
                self.pos += 1;
                Some(c)
            }
            _ => None,
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::RParen) => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(err(
                self.offset(),
                ParseErrorKind::UnexpectedToken {
                    found: t.to_string(),
                    expected: "`)`",
                },
            )),
            None => Err(err(self.end, ParseErrorKind::UnexpectedEnd { expected: "`)`" })),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Some(op) = self.eat_op(&['+', '-']) {
            let rhs = self.term()?;
            let op = if op == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        while let Some(op) = self.eat_op(&['*', '/']) {
            let rhs = self.factor()?;
            let op = if op == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.unary()?;
        if self.eat_op(&['^']).is_some() {
            let exponent = self.factor()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat_op(&['-']).is_some() {
            let inner = self.unary()?;
            // negative literals are stored directly so printing round-trips
            return Ok(match inner {
                Expr::Num(v) => Expr::Num(-v),
                other => Expr::Neg(Box::new(other)),
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        let Some(tok) = self.peek().cloned() else {
            return Err(err(
                self.end,
                ParseErrorKind::UnexpectedEnd {
                    expected: "a number, variable, function or `(`",
                },
            ));
        };
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Tok::Ident(name) => self.identifier(offset, &name),
            other => Err(err(
                offset,
                ParseErrorKind::UnexpectedToken {
                    found: other.to_string(),
                    expected: "a number, variable, function or `(`",
                },
            )),
        }
    }

    fn identifier(&mut self, offset: usize, name: &str) -> Result<Expr, ParseError> {
        if let Some(func) = Func::from_name(name) {
            match self.peek() {
                Some(Tok::LParen) => self.pos += 1,
                Some(t) => {
                    return Err(err(
                        self.offset(),
                        ParseErrorKind::UnexpectedToken {
                            found: t.to_string(),
                            expected: "`(` after function name",
                        },
                    ))
                }
                None => {
                    return Err(err(
                        self.end,
                        ParseErrorKind::UnexpectedEnd {
                            expected: "`(` after function name",
                        },
                    ))
                }
            }
            let arg = self.expr()?;
            self.expect_rparen()?;
            return Ok(Expr::Call(func, Box::new(arg)));
        }
        if name == "pi" {
            return Ok(Expr::Num(std::f64::consts::PI));
        }
        if let Some(digits) = name.strip_prefix('x') {
            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                let index: usize = digits.parse().map_err(|_| {
                    err(offset, ParseErrorKind::UnknownIdentifier(name.to_string()))
                })?;
                if index == 0 || index > self.dim {
                    return Err(err(
                        offset,
                        ParseErrorKind::VariableOutOfRange {
                            index,
                            dim: self.dim,
                        },
                    ));
                }
                return Ok(Expr::Var(index - 1));
            }
        }
        Err(err(offset, ParseErrorKind::UnknownIdentifier(name.to_string())))
    }
}

/// Parses `src` as an expression in the variables `x1..x{dim}`.
pub fn parse(src: &str, dim: usize) -> Result<Expr, ParseError> {
    let toks = lex(src)?;
    if toks.is_empty() {
        return Err(err(0, ParseErrorKind::Empty));
    }
    let mut p = Parser {
        toks: &toks,
        pos: 0,
        end: src.len(),
        dim,
    };
    let e = p.expr()?;
    if let Some((offset, t)) = toks.get(p.pos) {
        return Err(err(
            *offset,
            ParseErrorKind::UnexpectedToken {
                found: t.to_string(),
                expected: "an operator or end of input",
            },
        ));
    }
    Ok(e)
}

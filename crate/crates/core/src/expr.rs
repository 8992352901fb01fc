//! A small arithmetic expression language for user-defined right-hand sides.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' atom)*
//! atom    := number | name | name '(' sum ')' | '(' sum ')'
//! ```
//!
//! Every binary operator, `^` included, associates left to right, so
//! `2^3^2` is `(2^3)^2 = 64`. `-x^2` is `-(x^2)`. Names resolve to state
//! variables, then parameters, then the constant `pi`. Functions: `sin`,
//! `cos`, `tan`, `exp`, `ln`, `sqrt`, `abs`. Evaluation is plain IEEE double
//! arithmetic; domain errors surface as NaN and are caught by the callers.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Tan => v.tan(),
            Func::Exp => v.exp(),
            Func::Ln => v.ln(),
            Func::Sqrt => v.sqrt(),
            Func::Abs => v.abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// A parsed expression with names resolved to state indices or constants.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    State(usize),
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::State(i) => x[*i],
            Expr::Neg(e) => -e.eval(x),
            Expr::Call(f, e) => f.apply(e.eval(x)),
            Expr::Binary(op, a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => pow(a, b),
                }
            }
        }
    }

    /// Largest state index referenced, if any.
    pub fn max_state(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::State(i) => Some(*i),
            Expr::Neg(e) | Expr::Call(_, e) => e.max_state(),
            Expr::Binary(_, a, b) => a.max_state().max(b.max_state()),
        }
    }
}

fn pow(a: f64, b: f64) -> f64 {
    if b == b.trunc() && b.abs() <= i32::MAX as f64 {
        a.powi(b as i32)
    } else {
        a.powf(b)
    }
}

/// Parses `src`, resolving identifiers against `states` (by position) and
/// `params` (inlined as constants).
pub fn parse(src: &str, states: &[String], params: &BTreeMap<String, f64>) -> Result<Expr> {
    let mut p = Parser {
        src,
        pos: 0,
        states,
        params,
    };
    let e = p.sum()?;
    p.skip_ws();
    if p.pos < src.len() {
        return Err(p.err(format!("unexpected `{}`", p.rest_char())));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    states: &'a [String],
    params: &'a BTreeMap<String, f64>,
}

impl<'a> Parser<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Expr {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn rest_char(&self) -> char {
        self.src[self.pos..].chars().next().unwrap_or(' ')
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Some('+') => BinOp::Add,
                Some('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.product()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn product(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some('*') => BinOp::Mul,
                Some('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let mut lhs = self.atom()?;
        while self.eat('^') {
            let rhs = if self.peek() == Some('-') {
                self.pos += 1;
                Expr::Neg(Box::new(self.atom()?))
            } else {
                self.atom()?
            };
            lhs = Expr::Binary(BinOp::Pow, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.err("unexpected end of expression")),
            Some('(') => {
                self.pos += 1;
                let e = self.sum()?;
                if !self.eat(')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_alphabetic() || c == '_' => self.name(),
            Some(c) => Err(self.err(format!("unexpected `{c}`"))),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let mut end = start;
        while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
            end += 1;
        }
        if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
            let mut k = end + 1;
            if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                k += 1;
            }
            if k < bytes.len() && bytes[k].is_ascii_digit() {
                while k < bytes.len() && bytes[k].is_ascii_digit() {
                    k += 1;
                }
                end = k;
            }
        }
        let text = &self.src[start..end];
        let v: f64 = text
            .parse()
            .map_err(|_| self.err(format!("malformed number `{text}`")))?;
        self.pos = end;
        Ok(Expr::Const(v))
    }

    fn name(&mut self) -> Result<Expr> {
        let start = self.pos;
        let end = self.src[start..]
            .find(|c: char| !(c.is_alphanumeric() || c == '_'))
            .map_or(self.src.len(), |i| start + i);
        let ident = &self.src[start..end];
        self.pos = end;
        if self.peek() == Some('(') {
            let f = Func::from_name(ident).ok_or_else(|| Error::Expr {
                offset: start,
                message: format!("unknown function `{ident}`"),
            })?;
            self.pos += 1;
            let arg = self.sum()?;
            if !self.eat(')') {
                return Err(self.err("expected `)`"));
            }
            return Ok(Expr::Call(f, Box::new(arg)));
        }
        if let Some(i) = self.states.iter().position(|s| s == ident) {
            return Ok(Expr::State(i));
        }
        if let Some(v) = self.params.get(ident) {
            return Ok(Expr::Const(*v));
        }
        if ident == "pi" {
            return Ok(Expr::Const(std::f64::consts::PI));
        }
        Err(Error::Expr {
            offset: start,
            message: format!("unknown name `{ident}`"),
        })
    }
}

//! A tiny arithmetic-expression format for supplying Lagrangian and
//! Hamiltonian families from text.
//!
//! Grammar: `+ - * / ^` with parentheses and unary minus; `^` binds
//! tightest and associates to the right. Variables are the indexed
//! families `q1..qN`, `p1..pN`, `qdot1..qdotN`, and `t1..tN`; numbers are
//! ordinary float literals. Example: `0.5*qdot1^2 + q1*(3*t2)`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ExprError {
    #[error("parse error at byte {at}: {message}")]
    Parse { at: usize, message: String },
    #[error("variable {0}{1} is not bound (index out of range)")]
    UnboundVariable(VarKind, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Q,
    P,
    QDot,
    T,
}

impl fmt::Display for VarKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarKind::Q => write!(f, "q"),
            VarKind::P => write!(f, "p"),
            VarKind::QDot => write!(f, "qdot"),
            VarKind::T => write!(f, "t"),
        }
    }
}

/// Values bound to the variable families during evaluation. Any slice may
/// be empty when that family is not meaningful in context.
#[derive(Debug, Clone, Copy, Default)]
pub struct Bindings<'a> {
    pub q: &'a [f64],
    pub p: &'a [f64],
    pub qdot: &'a [f64],
    pub t: &'a [f64],
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number(f64),
    Var(VarKind, usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, bindings: &Bindings<'_>) -> Result<f64, ExprError> {
        match self {
            Expr::Number(v) => Ok(*v),
            Expr::Var(kind, index) => {
                let slice = match kind {
                    VarKind::Q => bindings.q,
                    VarKind::P => bindings.p,
                    VarKind::QDot => bindings.qdot,
                    VarKind::T => bindings.t,
                };
                slice
                    .get(index - 1)
                    .copied()
                    .ok_or(ExprError::UnboundVariable(*kind, *index))
            }
            Expr::Neg(a) => Ok(-a.eval(bindings)?),
            Expr::Add(a, b) => Ok(a.eval(bindings)? + b.eval(bindings)?),
            Expr::Sub(a, b) => Ok(a.eval(bindings)? - b.eval(bindings)?),
            Expr::Mul(a, b) => Ok(a.eval(bindings)? * b.eval(bindings)?),
            Expr::Div(a, b) => Ok(a.eval(bindings)? / b.eval(bindings)?),
            Expr::Pow(a, b) => Ok(a.eval(bindings)?.powf(b.eval(bindings)?)),
        }
    }

    /// Largest variable index used, per family `(q, p, qdot, t)`.
    pub fn max_indices(&self) -> (usize, usize, usize, usize) {
        let mut out = (0, 0, 0, 0);
        self.collect_indices(&mut out);
        out
    }

    fn collect_indices(&self, out: &mut (usize, usize, usize, usize)) {
        match self {
            Expr::Number(_) => {}
            Expr::Var(kind, index) => match kind {
                VarKind::Q => out.0 = out.0.max(*index),
                VarKind::P => out.1 = out.1.max(*index),
                VarKind::QDot => out.2 = out.2.max(*index),
                VarKind::T => out.3 = out.3.max(*index),
            },
            Expr::Neg(a) => a.collect_indices(out),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => {
                a.collect_indices(out);
                b.collect_indices(out);
            }
        }
    }
}

impl FromStr for Expr {
    type Err = ExprError;

    fn from_str(s: &str) -> Result<Self, ExprError> {
        let mut parser = Parser { input: s.as_bytes(), pos: 0 };
        let expr = parser.expression()?;
        parser.skip_ws();
        if parser.pos != parser.input.len() {
            return Err(parser.error("trailing input"));
        }
        Ok(expr)
    }
}

struct Parser<'a> {
    input: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, message: &str) -> ExprError {
        ExprError::Parse { at: self.pos, message: message.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.input.len() && self.input[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.input.get(self.pos).copied()
    }

    fn expression(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = Expr::Add(Box::new(acc), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = Expr::Sub(Box::new(acc), Box::new(self.term()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = Expr::Mul(Box::new(acc), Box::new(self.unary()?));
                }
                Some(b'/') => {
                    self.pos += 1;
                    acc = Expr::Div(Box::new(acc), Box::new(self.unary()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            // Right-associative; the exponent may itself carry a unary
            // minus, as in `q1^-2`.
            let exponent = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expression()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected closing parenthesis"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.variable(),
            _ => Err(self.error("expected a number, variable, or parenthesized expression")),
        }
    }

    fn number(&mut self) -> Result<Expr, ExprError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.input.len() {
            let c = self.input[self.pos];
            if c.is_ascii_digit() || c == b'.' {
                self.pos += 1;
            } else if (c == b'e' || c == b'E') && self.pos > start {
                // Exponent part, optionally signed.
                self.pos += 1;
                if matches!(self.input.get(self.pos), Some(b'+') | Some(b'-')) {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.input[start..self.pos]).unwrap();
        text.parse::<f64>()
            .map(Expr::Number)
            .map_err(|_| ExprError::Parse { at: start, message: format!("bad number {text:?}") })
    }

    fn variable(&mut self) -> Result<Expr, ExprError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.input.len() && self.input[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.input[start..self.pos]).unwrap();
        let kind = match name {
            "q" => VarKind::Q,
            "p" => VarKind::P,
            "qdot" => VarKind::QDot,
            "t" => VarKind::T,
            other => {
                return Err(ExprError::Parse {
                    at: start,
                    message: format!("unknown variable family {other:?}"),
                })
            }
        };
        let digits_start = self.pos;
        while self.pos < self.input.len() && self.input[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if digits_start == self.pos {
            return Err(ExprError::Parse {
                at: digits_start,
                message: format!("variable {name:?} needs a 1-based index, e.g. {name}1"),
            });
        }
        let index: usize = std::str::from_utf8(&self.input[digits_start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| ExprError::Parse { at: digits_start, message: "bad index".into() })?;
        if index == 0 {
            return Err(ExprError::Parse { at: digits_start, message: "index starts at 1".into() });
        }
        Ok(Expr::Var(kind, index))
    }
}

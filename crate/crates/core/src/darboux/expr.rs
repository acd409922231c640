//! Small expression language for scalar fields.
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := "-" unary | power
//! power   := atom ("^" unary)?
//! atom    := number | "pi" | "e" | "x" digit+ | func "(" expr ")" | "(" expr ")"
//! func    := sin | cos | tan | exp | ln | sqrt | arcsin | arccos
//! ```
//!
//! `^` is right associative and binds tighter than unary minus, so `-x0^2`
//! is `-(x0^2)`.

use std::f64::consts::{E, PI};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::FieldFn;
use crate::gauge::scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Arcsin,
    Arccos,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "arcsin" => Func::Arcsin,
            "arccos" => Func::Arccos,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Arcsin => "arcsin",
            Func::Arccos => "arccos",
        }
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Tan => v.tan(),
            Func::Exp => v.exp(),
            Func::Ln => v.ln(),
            Func::Sqrt => v.sqrt(),
            Func::Arcsin => v.asin(),
            Func::Arccos => v.acos(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

fn num(v: f64) -> Expr {
    Expr::Num(v)
}

fn call(f: Func, a: Expr) -> Expr {
    Expr::Call(f, Box::new(a))
}

// Constructors folding the trivial cases keep derivative trees small.
fn add(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Num(x), _) if *x == 0.0 => b,
        (_, Expr::Num(y)) if *y == 0.0 => a,
        (Expr::Num(x), Expr::Num(y)) => num(x + y),
        _ => Expr::Add(Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (_, Expr::Num(y)) if *y == 0.0 => a,
        (Expr::Num(x), _) if *x == 0.0 => neg(b),
        (Expr::Num(x), Expr::Num(y)) => num(x - y),
        _ => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Num(x), _) | (_, Expr::Num(x)) if *x == 0.0 => num(0.0),
        (Expr::Num(x), _) if *x == 1.0 => b,
        (_, Expr::Num(y)) if *y == 1.0 => a,
        (Expr::Num(x), Expr::Num(y)) => num(x * y),
        _ => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Num(x), _) if *x == 0.0 => num(0.0),
        (_, Expr::Num(y)) if *y == 1.0 => a,
        _ => Expr::Div(Box::new(a), Box::new(b)),
    }
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(x) => num(-x),
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(Box::new(other)),
    }
}

fn pow(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (_, Expr::Num(y)) if *y == 1.0 => a,
        (_, Expr::Num(y)) if *y == 0.0 => num(1.0),
        _ => Expr::Pow(Box::new(a), Box::new(b)),
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let mut p = Parser { src, pos: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos < src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(e)
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::Var(i) => *x
                .get(*i)
                .ok_or_else(|| Error::Dimension(format!("x{i} used on a {}-dimensional point", x.len())))?,
            Expr::Neg(a) => -a.eval(x)?,
            Expr::Add(a, b) => a.eval(x)? + b.eval(x)?,
            Expr::Sub(a, b) => a.eval(x)? - b.eval(x)?,
            Expr::Mul(a, b) => a.eval(x)? * b.eval(x)?,
            Expr::Div(a, b) => a.eval(x)? / b.eval(x)?,
            Expr::Pow(a, b) => a.eval(x)?.powf(b.eval(x)?),
            Expr::Call(f, a) => f.apply(a.eval(x)?),
        })
    }

    /// Largest coordinate index used, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Num(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Neg(a) | Expr::Call(_, a) => a.max_var(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.max_var().max(b.max_var())
            }
        }
    }

    fn is_const(&self) -> bool {
        self.max_var().is_none()
    }

    /// Symbolic partial derivative with respect to `x_mu`.
    pub fn diff(&self, mu: usize) -> Expr {
        match self {
            Expr::Num(_) => num(0.0),
            Expr::Var(i) => num(if *i == mu { 1.0 } else { 0.0 }),
            Expr::Neg(a) => neg(a.diff(mu)),
            Expr::Add(a, b) => add(a.diff(mu), b.diff(mu)),
            Expr::Sub(a, b) => sub(a.diff(mu), b.diff(mu)),
            Expr::Mul(a, b) => add(mul(a.diff(mu), (**b).clone()), mul((**a).clone(), b.diff(mu))),
            Expr::Div(a, b) => div(
                sub(mul(a.diff(mu), (**b).clone()), mul((**a).clone(), b.diff(mu))),
                pow((**b).clone(), num(2.0)),
            ),
            Expr::Pow(a, b) if b.is_const() => mul(
                mul((**b).clone(), pow((**a).clone(), sub((**b).clone(), num(1.0)))),
                a.diff(mu),
            ),
            Expr::Pow(a, b) => mul(
                self.clone(),
                add(
                    mul(b.diff(mu), call(Func::Ln, (**a).clone())),
                    div(mul((**b).clone(), a.diff(mu)), (**a).clone()),
                ),
            ),
            Expr::Call(f, a) => {
                let inner = (**a).clone();
                let outer = match f {
                    Func::Sin => call(Func::Cos, inner),
                    Func::Cos => neg(call(Func::Sin, inner)),
                    Func::Tan => div(num(1.0), pow(call(Func::Cos, inner), num(2.0))),
                    Func::Exp => call(Func::Exp, inner),
                    Func::Ln => div(num(1.0), inner),
                    Func::Sqrt => div(num(0.5), call(Func::Sqrt, inner)),
                    Func::Arcsin => div(num(1.0), call(Func::Sqrt, sub(num(1.0), pow(inner, num(2.0))))),
                    Func::Arccos => div(num(-1.0), call(Func::Sqrt, sub(num(1.0), pow(inner, num(2.0))))),
                };
                mul(outer, a.diff(mu))
            }
        }
    }

    /// Scalar field on `dim` coordinates with symbolic first and second derivatives.
    pub fn into_field(self, dim: usize) -> Result<FieldFn> {
        if let Some(i) = self.max_var() {
            if i >= dim {
                return Err(Error::Dimension(format!("expression uses x{i} in {dim} dimensions")));
            }
        }
        let first: Arc<Vec<Expr>> = Arc::new((0..dim).map(|mu| self.diff(mu)).collect());
        let second: Arc<Vec<Vec<Expr>>> = Arc::new(first.iter().map(|d| (0..dim).map(|nu| d.diff(nu)).collect()).collect());
        let e = self;
        Ok(FieldFn::try_scalar(dim, move |x| e.eval(x))
            .with_deriv(move |x, mu| Ok(scalar(first[mu].eval(x)?)))
            .with_deriv2(move |x, mu, nu| Ok(scalar(second[mu][nu].eval(x)?))))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(i) => write!(f, "x{i}"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, b) => write!(f, "({a} ^ {b})"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        let base = self.atom()?;
        if self.eat('^') {
            return Ok(Expr::Pow(Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                while self.peek().is_some_and(|c| c.is_ascii_digit() || c == '.') {
                    self.pos += 1;
                }
                // exponent part, only when followed by a digit so that `2e` stays an error
                let rest = &self.src[self.pos..];
                let mut chars = rest.chars();
                if matches!(chars.next(), Some('e' | 'E')) {
                    let mut look = chars.clone();
                    let signed = matches!(look.next(), Some('+' | '-'));
                    let digit = if signed { look.next() } else { chars.next() };
                    if digit.is_some_and(|d| d.is_ascii_digit()) {
                        self.pos += if signed { 2 } else { 1 };
                        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                            self.pos += 1;
                        }
                    }
                }
                self.src[start..self.pos]
                    .parse::<f64>()
                    .map(Expr::Num)
                    .map_err(|_| Error::Parse {
                        pos: start,
                        msg: format!("bad number '{}'", &self.src[start..self.pos]),
                    })
            }
            Some(c) if c.is_ascii_alphabetic() => {
                while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
                    self.pos += 1;
                }
                let name = &self.src[start..self.pos];
                match name {
                    "pi" => return Ok(Expr::Num(PI)),
                    "e" => return Ok(Expr::Num(E)),
                    _ => {}
                }
                if let Some(idx) = name.strip_prefix('x') {
                    if !idx.is_empty() && idx.chars().all(|c| c.is_ascii_digit()) {
                        return idx.parse().map(Expr::Var).map_err(|_| Error::Parse {
                            pos: start,
                            msg: format!("bad coordinate '{name}'"),
                        });
                    }
                }
                let func = Func::from_name(name).ok_or(Error::Parse {
                    pos: start,
                    msg: format!("unknown identifier '{name}'"),
                })?;
                if !self.eat('(') {
                    return Err(self.error(&format!("expected '(' after {name}")));
                }
                let arg = self.expr()?;
                if !self.eat(')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(call(func, arg))
            }
            Some(c) => Err(self.error(&format!("unexpected character '{c}'"))),
        }
    }
}

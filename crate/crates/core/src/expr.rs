//! Coefficient expression language.
//!
//! Grammar (recursive descent, no precedence surprises):
//!
//! ```text
//! expr  := term  (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | atom
//! atom  := number | 'pi' | 'x1' | 'x2' | 'y1' | 'y2'
//!        | ('cos' | 'sin' | 'exp') '(' expr ')' | '(' expr ')'
//! ```
//!
//! `y1`, `y2` are the fast (periodic) coordinates, `x1`, `x2` the slow ones.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X1,
    X2,
    Y1,
    Y2,
}

#[derive(Debug, Clone, Copy)]
pub enum Func {
    Cos,
    Sin,
    Exp,
}

#[derive(Debug, Clone)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Variable bindings for evaluation. Leave a slot `None` to forbid that
/// family of variables (e.g. a purely periodic field must not read `x`).
#[derive(Debug, Clone, Copy, Default)]
pub struct Bindings {
    pub x: Option<[f64; 2]>,
    pub y: Option<[f64; 2]>,
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let mut p = Parser { src: src.as_bytes(), pos: 0 };
        p.skip_ws();
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("trailing input"));
        }
        Ok(e)
    }

    pub fn eval(&self, b: &Bindings) -> Result<f64> {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::Var(v) => match v {
                Var::X1 => b.x.ok_or_else(|| bad_var("x1"))?[0],
                Var::X2 => b.x.ok_or_else(|| bad_var("x2"))?[1],
                Var::Y1 => b.y.ok_or_else(|| bad_var("y1"))?[0],
                Var::Y2 => b.y.ok_or_else(|| bad_var("y2"))?[1],
            },
            Expr::Neg(e) => -e.eval(b)?,
            Expr::Add(a, c) => a.eval(b)? + c.eval(b)?,
            Expr::Sub(a, c) => a.eval(b)? - c.eval(b)?,
            Expr::Mul(a, c) => a.eval(b)? * c.eval(b)?,
            Expr::Div(a, c) => a.eval(b)? / c.eval(b)?,
            Expr::Call(f, e) => {
                let v = e.eval(b)?;
                match f {
                    Func::Cos => v.cos(),
                    Func::Sin => v.sin(),
                    Func::Exp => v.exp(),
                }
            }
        })
    }

    pub fn uses_var(&self, var: Var) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(v) => *v == var,
            Expr::Neg(e) | Expr::Call(_, e) => e.uses_var(var),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.uses_var(var) || b.uses_var(var)
            }
        }
    }

    pub fn uses_slow(&self) -> bool {
        self.uses_var(Var::X1) || self.uses_var(Var::X2)
    }

    pub fn uses_fast(&self) -> bool {
        self.uses_var(Var::Y1) || self.uses_var(Var::Y2)
    }
}

fn bad_var(v: &str) -> Error {
    Error::ExprBadVariable { var: v.to_string() }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, msg: &str) -> Error {
        Error::ExprParse { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            self.skip_ws();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else {
            self.atom()
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.eat(b'(');
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            _ => Err(self.error("expected a number, variable, or function")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() || c == b'.' {
                self.pos += 1;
            } else if c == b'e' || c == b'E' {
                // exponent only if followed by digit or sign+digit
                let next = self.src.get(self.pos + 1).copied();
                let next2 = self.src.get(self.pos + 2).copied();
                match next {
                    Some(d) if d.is_ascii_digit() => self.pos += 2,
                    Some(b'+') | Some(b'-') if next2.map_or(false, |d| d.is_ascii_digit()) => {
                        self.pos += 3
                    }
                    _ => break,
                }
                while self.peek().map_or(false, |c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
                break;
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let v: f64 = text
            .parse()
            .map_err(|_| Error::ExprParse { pos: start, msg: format!("bad number `{text}`") })?;
        self.skip_ws();
        Ok(Expr::Num(v))
    }

    fn ident(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.peek().map_or(false, |c| c.is_ascii_alphanumeric()) {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string();
        self.skip_ws();
        match name.as_str() {
            "pi" => Ok(Expr::Num(std::f64::consts::PI)),
            "x1" => Ok(Expr::Var(Var::X1)),
            "x2" => Ok(Expr::Var(Var::X2)),
            "y1" => Ok(Expr::Var(Var::Y1)),
            "y2" => Ok(Expr::Var(Var::Y2)),
            "cos" | "sin" | "exp" => {
                if !self.eat(b'(') {
                    return Err(self.error("expected `(` after function name"));
                }
                let arg = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected `)`"));
                }
                let f = match name.as_str() {
                    "cos" => Func::Cos,
                    "sin" => Func::Sin,
                    _ => Func::Exp,
                };
                Ok(Expr::Call(f, Box::new(arg)))
            }
            _ => Err(Error::ExprParse {
                pos: start,
                msg: format!("unknown identifier `{name}`"),
            }),
        }
    }
}

//! Closed-form expressions for user-defined problems.
//!
//! Grammar (usual precedence, `^` binds tightest and takes an integer
//! exponent):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' '-'? integer)?
//! atom   := number | 'pi' | 't' | 'q' | 'q1' .. 'qN'
//!         | ('exp' | 'sin' | 'cos' | 'arctan' | 'atan') '(' expr ')'
//!         | '(' expr ')'
//! ```
//!
//! `q` is an alias of `q1`. Expressions are differentiated symbolically so a
//! potential `G` written in this language comes with its exact gradient and
//! Hessian.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    Time,
    /// Zero-based component index of `q`.
    Q(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Sin,
    Cos,
    Arctan,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Self> {
        let mut p = Parser { src: src.as_bytes(), pos: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos < p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(e)
    }

    pub fn eval<T: Scalar>(&self, t: T, q: &[T]) -> T {
        match self {
            Expr::Const(c) => T::lit(*c),
            Expr::Var(Var::Time) => t,
            Expr::Var(Var::Q(i)) => q[*i],
            Expr::Neg(a) => -a.eval(t, q),
            Expr::Add(a, b) => a.eval(t, q) + b.eval(t, q),
            Expr::Sub(a, b) => a.eval(t, q) - b.eval(t, q),
            Expr::Mul(a, b) => a.eval(t, q) * b.eval(t, q),
            Expr::Div(a, b) => a.eval(t, q) / b.eval(t, q),
            Expr::Pow(a, n) => a.eval(t, q).powi(*n),
            Expr::Call(f, a) => {
                let x = a.eval(t, q);
                match f {
                    Func::Exp => x.exp(),
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Arctan => x.atan(),
                }
            }
        }
    }

    pub fn uses_time(&self) -> bool {
        self.any_var(&|v| v == Var::Time)
    }

    pub fn max_component(&self) -> Option<usize> {
        let mut best = None;
        self.visit_vars(&mut |v| {
            if let Var::Q(i) = v {
                best = Some(best.map_or(i, |b: usize| b.max(i)));
            }
        });
        best
    }

    fn any_var(&self, pred: &dyn Fn(Var) -> bool) -> bool {
        let mut hit = false;
        self.visit_vars(&mut |v| hit |= pred(v));
        hit
    }

    fn visit_vars(&self, f: &mut dyn FnMut(Var)) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => f(*v),
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.visit_vars(f),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
        }
    }

    /// Symbolic partial derivative with light constant folding.
    pub fn derivative(&self, var: Var) -> Expr {
        use Expr::*;
        match self {
            Const(_) => Const(0.0),
            Var(v) => Const(if *v == var { 1.0 } else { 0.0 }),
            Neg(a) => neg(a.derivative(var)),
            Add(a, b) => add(a.derivative(var), b.derivative(var)),
            Sub(a, b) => sub(a.derivative(var), b.derivative(var)),
            Mul(a, b) => add(
                mul(a.derivative(var), (**b).clone()),
                mul((**a).clone(), b.derivative(var)),
            ),
            Div(a, b) => div(
                sub(
                    mul(a.derivative(var), (**b).clone()),
                    mul((**a).clone(), b.derivative(var)),
                ),
                pow((**b).clone(), 2),
            ),
            Pow(a, n) => mul(
                mul(Const(f64::from(*n)), pow((**a).clone(), n - 1)),
                a.derivative(var),
            ),
            Call(f, a) => {
                let inner = (**a).clone();
                let outer = match f {
                    Func::Exp => Call(Func::Exp, Box::new(inner)),
                    Func::Sin => Call(Func::Cos, Box::new(inner)),
                    Func::Cos => neg(Call(Func::Sin, Box::new(inner))),
                    Func::Arctan => div(Const(1.0), add(Const(1.0), pow(inner, 2))),
                };
                mul(outer, a.derivative(var))
            }
        }
    }
}

fn is_const(e: &Expr, c: f64) -> bool {
    matches!(e, Expr::Const(v) if *v == c)
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Const(c) => Expr::Const(-c),
        other => Expr::Neg(Box::new(other)),
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x + y),
        (a, b) if is_const(&a, 0.0) => b,
        (a, b) if is_const(&b, 0.0) => a,
        (a, b) => Expr::Add(Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x - y),
        (a, b) if is_const(&b, 0.0) => a,
        (a, b) if is_const(&a, 0.0) => neg(b),
        (a, b) => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x * y),
        (a, _) if is_const(&a, 0.0) => Expr::Const(0.0),
        (_, b) if is_const(&b, 0.0) => Expr::Const(0.0),
        (a, b) if is_const(&a, 1.0) => b,
        (a, b) if is_const(&b, 1.0) => a,
        (a, b) => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (a, _) if is_const(&a, 0.0) => Expr::Const(0.0),
        (a, b) if is_const(&b, 1.0) => a,
        (a, b) => Expr::Div(Box::new(a), Box::new(b)),
    }
}

fn pow(a: Expr, n: i32) -> Expr {
    match (a, n) {
        (_, 0) => Expr::Const(1.0),
        (a, 1) => a,
        (Expr::Const(c), n) => Expr::Const(c.powi(n)),
        (a, n) => Expr::Pow(Box::new(a), n),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(Var::Time) => write!(f, "t"),
            Expr::Var(Var::Q(i)) => write!(f, "q{}", i + 1),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, n) => write!(f, "({a})^{n}"),
            Expr::Call(func, a) => {
                let name = match func {
                    Func::Exp => "exp",
                    Func::Sin => "sin",
                    Func::Cos => "cos",
                    Func::Arctan => "arctan",
                };
                write!(f, "{name}({a})")
            }
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Expression {
            column: self.pos + 1,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
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
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        let negative = self.eat(b'-');
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("exponent must be an integer literal"));
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        let n: i32 = digits.parse().map_err(|_| self.error("exponent out of range"))?;
        Ok(Expr::Pow(Box::new(base), if negative { -n } else { n }))
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.error("unexpected end of expression")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            Some(_) => Err(self.error("unexpected character")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let bytes = self.src;
        while self.pos < bytes.len() && (bytes[self.pos].is_ascii_digit() || bytes[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < bytes.len() && (bytes[self.pos] == b'e' || bytes[self.pos] == b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < bytes.len() && (bytes[self.pos] == b'+' || bytes[self.pos] == b'-') {
                self.pos += 1;
            }
            let digits = self.pos;
            while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if digits == self.pos {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&bytes[start..self.pos]).expect("ascii number");
        text.parse::<f64>()
            .map(Expr::Const)
            .map_err(|_| Error::Expression {
                column: start + 1,
                message: format!("malformed number '{text}'"),
            })
    }

    fn ident(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii identifier");
        let func = match name {
            "exp" => Some(Func::Exp),
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "arctan" | "atan" => Some(Func::Arctan),
            _ => None,
        };
        if let Some(func) = func {
            if !self.eat(b'(') {
                return Err(self.error("expected '(' after function name"));
            }
            let arg = self.expr()?;
            if !self.eat(b')') {
                return Err(self.error("expected ')'"));
            }
            return Ok(Expr::Call(func, Box::new(arg)));
        }
        match name {
            "pi" => Ok(Expr::Const(std::f64::consts::PI)),
            "t" => Ok(Expr::Var(Var::Time)),
            "q" => Ok(Expr::Var(Var::Q(0))),
            _ => match name.strip_prefix('q').and_then(|d| d.parse::<usize>().ok()) {
                Some(i) if i >= 1 => Ok(Expr::Var(Var::Q(i - 1))),
                _ => Err(Error::Expression {
                    column: start + 1,
                    message: format!("unknown identifier '{name}'"),
                }),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ev(src: &str, t: f64, q: &[f64]) -> f64 {
        Expr::parse(src).unwrap().eval(t, q)
    }

    #[test]
    fn precedence_and_builtins() {
        assert_abs_diff_eq!(ev("1 + 2*3^2", 0.0, &[]), 19.0);
        assert_abs_diff_eq!(ev("-2^2", 0.0, &[]), -4.0);
        assert_abs_diff_eq!(ev("(1/5)*exp(-t^2) + 1/10", 0.0, &[]), 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(ev("arctan(t)/pi + 1/2", 0.0, &[]), 0.5);
        assert_abs_diff_eq!(ev("q^4", 0.0, &[2.0]), 16.0);
        assert_abs_diff_eq!(ev("q1*q2 - sin(2*t+1)", 0.5, &[3.0, 4.0]), 12.0 - 2f64.sin());
        assert_abs_diff_eq!(ev("2.5e-1 * q^-2", 0.0, &[0.5]), 1.0);
    }

    #[test]
    fn parse_errors_carry_columns() {
        match Expr::parse("1 + foo(t)") {
            Err(Error::Expression { column, .. }) => assert_eq!(column, 5),
            other => panic!("{other:?}"),
        }
        assert!(Expr::parse("q^1.5").is_err());
        assert!(Expr::parse("(t").is_err());
        assert!(Expr::parse("t t").is_err());
        assert!(Expr::parse("q0").is_err());
    }

    #[test]
    fn derivative_matches_central_difference() {
        let cases = [
            "q^4 + 0.3*q^6",
            "exp(-q^2/2)*sin(3*q)",
            "arctan(2*q - 1)*cos(q)",
            "q^3/(1 + q^2)",
        ];
        for src in cases {
            let e = Expr::parse(src).unwrap();
            let d = e.derivative(Var::Q(0));
            for &x in &[-1.3f64, -0.2, 0.4, 1.7] {
                let eps = 1e-6;
                let fd = (e.eval(0.0, &[x + eps]) - e.eval(0.0, &[x - eps])) / (2.0 * eps);
                assert_abs_diff_eq!(d.eval(0.0, &[x]), fd, epsilon = 1e-6 * (1.0 + fd.abs()));
            }
        }
    }

    #[test]
    fn variable_inventory() {
        let e = Expr::parse("q1^2 + q3*t").unwrap();
        assert!(e.uses_time());
        assert_eq!(e.max_component(), Some(2));
        assert!(!Expr::parse("q^4").unwrap().uses_time());
        assert_eq!(Expr::parse("exp(t)").unwrap().max_component(), None);
    }
}

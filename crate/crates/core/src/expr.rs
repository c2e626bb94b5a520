//! Polynomial and rational expressions in chart coordinates.
//!
//! The grammar is deliberately small:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' '-'? INTEGER)?
//! atom   := NUMBER | VAR | '(' expr ')'
//! VAR    := ('x' | 'z') INTEGER        (1-based coordinate index)
//! NUMBER := DIGITS ('.' DIGITS)?
//! ```
//!
//! There is no implicit multiplication. Division is only needed by transition
//! maps and modification inverses; unit factors are normally polynomial.
//!
//! ```
//! use ncretract::expr::Expr;
//!
//! let g: Expr = "1 + 0.1*x1".parse().unwrap();
//! assert!((g.eval(&[1.0_f64]) - 1.1).abs() < 1e-15);
//! assert_eq!(g.to_string(), "1 + 0.1*x1");
//! ```

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Field over which an expression is evaluated.
pub trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;
    fn powi(self, n: i32) -> Self;
    fn modulus(self) -> f64;
    /// Sup-norm over real and imaginary parts, used for box domains.
    fn box_norm(self) -> f64;
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn box_norm(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn from_f64(v: f64) -> Self {
        Complex64::new(v, 0.0)
    }
    fn powi(self, n: i32) -> Self {
        Complex64::powi(&self, n)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn box_norm(self) -> f64 {
        self.re.abs().max(self.im.abs())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Coordinate `idx` (0-based); `sym` is the printed prefix, `x` or `z`.
    Var {
        sym: char,
        idx: usize,
    },
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn var(idx: usize) -> Expr {
        Expr::Var { sym: 'x', idx }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 0.0)
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 1.0)
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self {
            Expr::Num(v) => Some(*v),
            _ => None,
        }
    }

    /// Largest coordinate index used, plus one.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Num(_) => 0,
            Expr::Var { idx, .. } => idx + 1,
            Expr::Neg(a) | Expr::Pow(a, _) => a.arity(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => a.arity().max(b.arity()),
        }
    }

    pub fn depends_on(&self, var: usize) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var { idx, .. } => *idx == var,
            Expr::Neg(a) | Expr::Pow(a, _) => a.depends_on(var),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.depends_on(var) || b.depends_on(var)
            }
        }
    }

    /// Evaluates at `vars`. Missing coordinates are a programming error and panic.
    pub fn eval<T: Scalar>(&self, vars: &[T]) -> T {
        match self {
            Expr::Num(v) => T::from_f64(*v),
            Expr::Var { idx, .. } => vars[*idx],
            Expr::Neg(a) => -a.eval(vars),
            Expr::Add(a, b) => a.eval(vars) + b.eval(vars),
            Expr::Sub(a, b) => a.eval(vars) - b.eval(vars),
            Expr::Mul(a, b) => a.eval(vars) * b.eval(vars),
            Expr::Div(a, b) => a.eval(vars) / b.eval(vars),
            Expr::Pow(a, n) => a.eval(vars).powi(*n),
        }
    }

    /// Symbolic partial derivative with respect to coordinate `var`.
    pub fn derivative(&self, var: usize) -> Expr {
        match self {
            Expr::Num(_) => Expr::Num(0.0),
            Expr::Var { idx, .. } => Expr::Num(if *idx == var { 1.0 } else { 0.0 }),
            Expr::Neg(a) => neg(a.derivative(var)),
            Expr::Add(a, b) => add(a.derivative(var), b.derivative(var)),
            Expr::Sub(a, b) => sub(a.derivative(var), b.derivative(var)),
            Expr::Mul(a, b) => add(mul(a.derivative(var), (**b).clone()), mul((**a).clone(), b.derivative(var))),
            Expr::Div(a, b) => {
                // (a/b)' = a'/b - a b'/b^2
                let first = div(a.derivative(var), (**b).clone());
                let second = div(mul((**a).clone(), b.derivative(var)), pow((**b).clone(), 2));
                sub(first, second)
            }
            Expr::Pow(a, n) => {
                if *n == 0 {
                    return Expr::Num(0.0);
                }
                mul(mul(Expr::Num(*n as f64), pow((**a).clone(), n - 1)), a.derivative(var))
            }
        }
    }

    pub fn gradient(&self, dim: usize) -> Vec<Expr> {
        (0..dim).map(|i| self.derivative(i)).collect()
    }

    /// Rewrites every variable prefix to `sym`.
    pub fn with_symbol(&self, sym: char) -> Expr {
        match self {
            Expr::Num(v) => Expr::Num(*v),
            Expr::Var { idx, .. } => Expr::Var { sym, idx: *idx },
            Expr::Neg(a) => Expr::Neg(Box::new(a.with_symbol(sym))),
            Expr::Add(a, b) => Expr::Add(Box::new(a.with_symbol(sym)), Box::new(b.with_symbol(sym))),
            Expr::Sub(a, b) => Expr::Sub(Box::new(a.with_symbol(sym)), Box::new(b.with_symbol(sym))),
            Expr::Mul(a, b) => Expr::Mul(Box::new(a.with_symbol(sym)), Box::new(b.with_symbol(sym))),
            Expr::Div(a, b) => Expr::Div(Box::new(a.with_symbol(sym)), Box::new(b.with_symbol(sym))),
            Expr::Pow(a, n) => Expr::Pow(Box::new(a.with_symbol(sym)), *n),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Num(v) if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) => 3,
            Expr::Pow(..) => 4,
            Expr::Num(_) | Expr::Var { .. } => 5,
        }
    }
}

// Smart constructors with light constant folding. They keep derivative trees
// small enough to print and evaluate cheaply.

pub fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(v) => Expr::Num(-v),
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(Box::new(other)),
    }
}

pub fn add(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x + y),
        _ if a.is_zero() => b,
        _ if b.is_zero() => a,
        _ => Expr::Add(Box::new(a), Box::new(b)),
    }
}

pub fn sub(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x - y),
        _ if b.is_zero() => a,
        _ if a.is_zero() => neg(b),
        _ => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

pub fn mul(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x * y),
        _ if a.is_zero() || b.is_zero() => Expr::Num(0.0),
        _ if a.is_one() => b,
        _ if b.is_one() => a,
        _ => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

pub fn div(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Num(x), Expr::Num(y)) if *y != 0.0 => Expr::Num(x / y),
        _ if a.is_zero() => Expr::Num(0.0),
        _ if b.is_one() => a,
        _ => Expr::Div(Box::new(a), Box::new(b)),
    }
}

pub fn pow(a: Expr, n: i32) -> Expr {
    match (&a, n) {
        (_, 0) => Expr::Num(1.0),
        (_, 1) => a,
        (Expr::Num(x), n) => Expr::Num(x.powi(n)),
        _ => Expr::Pow(Box::new(a), n),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn wrap(e: &Expr, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            if e.precedence() < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var { sym, idx } => write!(f, "{sym}{}", idx + 1),
            Expr::Neg(a) => {
                write!(f, "-")?;
                wrap(a, 3, f)
            }
            Expr::Add(a, b) => {
                wrap(a, 1, f)?;
                write!(f, " + ")?;
                wrap(b, 2, f)
            }
            Expr::Sub(a, b) => {
                wrap(a, 1, f)?;
                write!(f, " - ")?;
                wrap(b, 2, f)
            }
            Expr::Mul(a, b) => {
                wrap(a, 2, f)?;
                write!(f, "*")?;
                wrap(b, 3, f)
            }
            Expr::Div(a, b) => {
                wrap(a, 2, f)?;
                write!(f, "/")?;
                wrap(b, 3, f)
            }
            Expr::Pow(a, n) => {
                wrap(a, 5, f)?;
                write!(f, "^{n}")
            }
        }
    }
}

impl FromStr for Expr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Expr> {
        let mut p = Parser { src: s.as_bytes(), pos: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(e)
    }
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Expr, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Parse { offset: self.pos, message: message.to_string() }
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

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(b'/') => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let negative = if self.peek() == Some(b'-') {
                self.pos += 1;
                true
            } else {
                false
            };
            self.skip_ws();
            let digits = self.digits();
            if digits.is_empty() {
                return Err(self.error("expected integer exponent after '^'"));
            }
            let n: i32 = digits.parse().map_err(|_| self.error("exponent out of range"))?;
            return Ok(Expr::Pow(Box::new(base), if negative { -n } else { n }));
        }
        Ok(base)
    }

    fn digits(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c @ (b'x' | b'z')) => {
                self.pos += 1;
                let digits = self.digits();
                let idx: usize =
                    digits.parse().map_err(|_| self.error("expected coordinate index after variable name"))?;
                if idx == 0 {
                    return Err(self.error("coordinate indices start at 1"));
                }
                Ok(Expr::Var { sym: c as char, idx: idx - 1 })
            }
            Some(c) if c.is_ascii_digit() => {
                let mut text = self.digits();
                if self.src.get(self.pos) == Some(&b'.') {
                    self.pos += 1;
                    let frac = self.digits();
                    if frac.is_empty() {
                        return Err(self.error("expected digits after decimal point"));
                    }
                    text.push('.');
                    text.push_str(&frac);
                }
                text.parse::<f64>().map(Expr::Num).map_err(|_| self.error("malformed number"))
            }
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> Expr {
        s.parse().unwrap()
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(p("1 - 2 - 3").eval(&[] as &[f64]), -4.0);
        assert_eq!(p("2*3^2").eval(&[] as &[f64]), 18.0);
        assert_eq!(p("-2^2").eval(&[] as &[f64]), -4.0);
        assert_eq!(p("8/4/2").eval(&[] as &[f64]), 1.0);
        assert_eq!(p("x1^-1").eval(&[4.0]), 0.25);
    }

    #[test]
    fn rejects_implicit_multiplication_and_junk() {
        assert!("2x1".parse::<Expr>().is_err());
        assert!("x0".parse::<Expr>().is_err());
        assert!("x1 +".parse::<Expr>().is_err());
        assert!("(x1".parse::<Expr>().is_err());
        assert!("y1".parse::<Expr>().is_err());
        assert!("1.".parse::<Expr>().is_err());
    }

    #[test]
    fn complex_evaluation() {
        let f = p("z1^2*z2^3");
        let v = f.eval(&[Complex64::new(0.0, 1.0), Complex64::new(1.0, 0.0)]);
        assert!((v - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let f = p("x1^3*x2 - x2/(1 + x1^2) + 0.5*x1*x2^2");
        let x = [0.7, -1.3];
        for var in 0..2 {
            let d = f.derivative(var).eval(&x);
            let h = 1e-6;
            let mut xp = x;
            let mut xm = x;
            xp[var] += h;
            xm[var] -= h;
            let fd = (f.eval(&xp) - f.eval(&xm)) / (2.0 * h);
            assert!((d - fd).abs() < 1e-7, "var {var}: {d} vs {fd}");
        }
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0u32..1000, 0u32..4).prop_map(|(n, d)| Expr::Num(n as f64 / 10f64.powi(d as i32))),
            (0usize..3).prop_map(Expr::var),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
                (inner.clone(), 0i32..4).prop_map(|(a, n)| Expr::Pow(Box::new(a), n)),
            ]
        })
    }

    proptest! {
        #[test]
        fn printing_round_trips(e in arb_expr()) {
            let printed = e.to_string();
            let reparsed: Expr = printed.parse().unwrap();
            prop_assert_eq!(&reparsed, &e);
            prop_assert_eq!(reparsed.to_string(), printed);
        }
    }
}

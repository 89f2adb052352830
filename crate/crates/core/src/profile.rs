//! Radial profiles: the warp `f(r)` and the density `φ(r)`.
//!
//! A profile is either a closed-form expression in `r` (differentiated
//! exactly through [`Jet`]) or a natural cubic spline through samples. Both
//! provide the value and the first three derivatives.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Sinh,
    Cosh,
    Tanh,
    Sqrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Sqrt => "sqrt",
        }
    }

    fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "ln" | "log" => Func::Ln,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

/// Expression tree over the single variable `r`.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    /// Power with a constant exponent.
    Pow(Box<Expr>, f64),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn eval<T: Real>(&self, x: Jet<T>) -> Jet<T> {
        match self {
            Expr::Const(c) => Jet::constant(T::lit(*c)),
            Expr::Var => x,
            Expr::Neg(a) => -a.eval(x),
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Pow(a, p) => a.eval(x).powf(*p),
            Expr::Call(f, a) => {
                let v = a.eval(x);
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                    Func::Ln => v.ln(),
                    Func::Sinh => v.sinh(),
                    Func::Cosh => v.cosh(),
                    Func::Tanh => v.tanh(),
                    Func::Sqrt => v.sqrt(),
                }
            }
        }
    }

    /// True when the expression does not reference `r`.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Const(_) => true,
            Expr::Var => false,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.is_constant(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.is_constant() && b.is_constant()
            }
        }
    }

    /// Replaces every occurrence of `r` with `r / s`.
    pub fn rescale_argument(&self, s: f64) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var => Expr::Div(Box::new(Expr::Var), Box::new(Expr::Const(s))),
            Expr::Neg(a) => Expr::Neg(Box::new(a.rescale_argument(s))),
            Expr::Add(a, b) => Expr::Add(Box::new(a.rescale_argument(s)), Box::new(b.rescale_argument(s))),
            Expr::Sub(a, b) => Expr::Sub(Box::new(a.rescale_argument(s)), Box::new(b.rescale_argument(s))),
            Expr::Mul(a, b) => Expr::Mul(Box::new(a.rescale_argument(s)), Box::new(b.rescale_argument(s))),
            Expr::Div(a, b) => Expr::Div(Box::new(a.rescale_argument(s)), Box::new(b.rescale_argument(s))),
            Expr::Pow(a, p) => Expr::Pow(Box::new(a.rescale_argument(s)), *p),
            Expr::Call(f, a) => Expr::Call(*f, Box::new(a.rescale_argument(s))),
        }
    }

    pub fn parse(src: &str) -> Result<Expr> {
        let tokens = tokenize(src)?;
        let mut p = Parser { tokens, pos: 0 };
        let e = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Config(format!(
                "unexpected token {:?} at position {} in expression {src:?}",
                p.tokens[p.pos], p.pos
            )));
        }
        Ok(e)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if *c < 0.0 {
                    write!(f, "({c:?})")
                } else {
                    write!(f, "{c:?}")
                }
            }
            Expr::Var => write!(f, "r"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, p) => {
                if *p < 0.0 {
                    write!(f, "({a}^({p:?}))")
                } else {
                    write!(f, "({a}^{p:?})")
                }
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

impl FromStr for Expr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Expr::parse(s)
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

fn tokenize(src: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // exponent part, e.g. 1e-3
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v = s
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad number {s:?} in expression {src:?}")))?;
            out.push(Tok::Num(v));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else if c == '(' {
            out.push(Tok::LParen);
            i += 1;
        } else if c == ')' {
            out.push(Tok::RParen);
            i += 1;
        } else {
            return Err(Error::Config(format!("unexpected character {c:?} in expression {src:?}")));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' {
                Expr::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(op @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' {
                Expr::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if let Some(Tok::Op('-')) = self.peek() {
            self.pos += 1;
            let inner = self.unary()?;
            return Ok(match inner {
                Expr::Const(c) => Expr::Const(-c),
                other => Expr::Neg(Box::new(other)),
            });
        }
        if let Some(Tok::Op('+')) = self.peek() {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            let exponent = self.unary()?;
            if !exponent.is_constant() {
                return Err(Error::Config("exponents must be constant expressions".into()));
            }
            let p = exponent.eval::<f64>(Jet::constant(0.0)).value();
            return Ok(Expr::Pow(Box::new(base), p));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.next() {
            Some(Tok::Num(v)) => Ok(Expr::Const(v)),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                match self.next() {
                    Some(Tok::RParen) => Ok(e),
                    other => Err(Error::Config(format!("expected ')', found {other:?}"))),
                }
            }
            Some(Tok::Ident(name)) => match name.as_str() {
                "r" => Ok(Expr::Var),
                "pi" => Ok(Expr::Const(std::f64::consts::PI)),
                "e" => Ok(Expr::Const(std::f64::consts::E)),
                _ => {
                    let func = Func::lookup(&name)
                        .ok_or_else(|| Error::Config(format!("unknown identifier {name:?}")))?;
                    match self.next() {
                        Some(Tok::LParen) => {}
                        other => {
                            return Err(Error::Config(format!(
                                "expected '(' after {name}, found {other:?}"
                            )))
                        }
                    }
                    let arg = self.expr()?;
                    match self.next() {
                        Some(Tok::RParen) => Ok(Expr::Call(func, Box::new(arg))),
                        other => Err(Error::Config(format!("expected ')', found {other:?}"))),
                    }
                }
            },
            other => Err(Error::Config(format!("unexpected token {other:?}"))),
        }
    }
}

/// Natural cubic spline through `(r_i, y_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CubicSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    /// Second derivatives at the knots.
    moments: Vec<f64>,
}

impl CubicSpline {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let k = knots.len();
        if k < 3 || values.len() != k {
            return Err(Error::Config(format!(
                "spline needs at least 3 samples with matching lengths (got {} knots, {} values)",
                k,
                values.len()
            )));
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("spline knots must be strictly increasing".into()));
        }
        // Tridiagonal system for the interior moments (natural end conditions).
        let m = k - 2;
        let mut sub = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut sup = vec![0.0; m];
        let mut rhs = vec![0.0; m];
        for i in 0..m {
            let h0 = knots[i + 1] - knots[i];
            let h1 = knots[i + 2] - knots[i + 1];
            sub[i] = h0;
            diag[i] = 2.0 * (h0 + h1);
            sup[i] = h1;
            rhs[i] = 6.0 * ((values[i + 2] - values[i + 1]) / h1 - (values[i + 1] - values[i]) / h0);
        }
        for i in 1..m {
            let w = sub[i] / diag[i - 1];
            diag[i] -= w * sup[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        let mut inner = vec![0.0; m];
        for i in (0..m).rev() {
            let next = if i + 1 < m { sup[i] * inner[i + 1] } else { 0.0 };
            inner[i] = (rhs[i] - next) / diag[i];
        }
        let mut moments = vec![0.0; k];
        moments[1..k - 1].copy_from_slice(&inner);
        Ok(Self { knots, values, moments })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval<T: Real>(&self, x: Jet<T>) -> Jet<T> {
        let r = x.value().to_f64_lossy();
        let k = self.knots.len();
        let seg = match self.knots.binary_search_by(|kn| kn.total_cmp(&r)) {
            Ok(i) => i.min(k - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(k - 2),
        };
        let (x0, x1) = (self.knots[seg], self.knots[seg + 1]);
        let h = x1 - x0;
        let (y0, y1) = (self.values[seg], self.values[seg + 1]);
        let (m0, m1) = (self.moments[seg], self.moments[seg + 1]);
        // Cubic in t = r - x0: a + b t + c t^2 + d t^3
        let a = y0;
        let b = (y1 - y0) / h - h * (2.0 * m0 + m1) / 6.0;
        let c = m0 / 2.0;
        let d = (m1 - m0) / (6.0 * h);
        let t = x - Jet::constant(T::lit(x0));
        let lit = |v: f64| Jet::constant(T::lit(v));
        lit(a) + t * (lit(b) + t * (lit(c) + t * lit(d)))
    }

    fn rescaled(&self, s: f64, amplitude: f64) -> CubicSpline {
        CubicSpline {
            knots: self.knots.iter().map(|k| k * s).collect(),
            values: self.values.iter().map(|v| v * amplitude).collect(),
            moments: self.moments.iter().map(|m| m * amplitude / (s * s)).collect(),
        }
    }
}

/// A smooth radial profile with derivatives up to third order.
#[derive(Clone, Debug, PartialEq)]
pub enum Profile {
    Expr(Expr),
    Spline(CubicSpline),
}

/// Value and derivatives of a profile at one radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileValue<T> {
    pub v: T,
    pub d1: T,
    pub d2: T,
    pub d3: T,
}

impl Profile {
    pub fn constant(c: f64) -> Self {
        Profile::Expr(Expr::Const(c))
    }

    pub fn parse(src: &str) -> Result<Self> {
        Expr::parse(src).map(Profile::Expr)
    }

    pub fn jet<T: Real>(&self, r: T) -> Jet<T> {
        match self {
            Profile::Expr(e) => e.eval(Jet::variable(r)),
            Profile::Spline(s) => s.eval(Jet::variable(r)),
        }
    }

    pub fn at<T: Real>(&self, r: T) -> ProfileValue<T> {
        let j = self.jet(r);
        ProfileValue { v: j.derivative(0), d1: j.derivative(1), d2: j.derivative(2), d3: j.derivative(3) }
    }

    pub fn value<T: Real>(&self, r: T) -> T {
        self.jet(r).value()
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Profile::Expr(e) => e.is_constant(),
            Profile::Spline(s) => s.values.windows(2).all(|w| w[0] == w[1]),
        }
    }

    /// The profile `amplitude * p(r / s)`.
    pub fn dilated(&self, s: f64, amplitude: f64) -> Profile {
        match self {
            Profile::Expr(e) => {
                let inner = e.rescale_argument(s);
                if amplitude == 1.0 {
                    Profile::Expr(inner)
                } else {
                    Profile::Expr(Expr::Mul(Box::new(Expr::Const(amplitude)), Box::new(inner)))
                }
            }
            Profile::Spline(sp) => Profile::Spline(sp.rescaled(s, amplitude)),
        }
    }

    /// `self + other` for expression profiles; splines are sampled onto their knots.
    pub fn plus(&self, other: &Profile) -> Profile {
        match (self, other) {
            (Profile::Expr(a), Profile::Expr(b)) => {
                Profile::Expr(Expr::Add(Box::new(a.clone()), Box::new(b.clone())))
            }
            (Profile::Spline(s), o) | (o, Profile::Spline(s)) => {
                let vals = s.knots.iter().zip(&s.values).map(|(k, v)| v + o.value(*k)).collect();
                Profile::Spline(CubicSpline::new(s.knots.clone(), vals).expect("same knots"))
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Profile::Expr(e) => e.to_string(),
            Profile::Spline(s) => format!("spline({} knots)", s.knots.len()),
        }
    }
}

/// Serialized form: an expression string or a sample table.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProfileSpec {
    Expr(String),
    Samples { r: Vec<f64>, values: Vec<f64> },
}

impl ProfileSpec {
    pub fn build(&self) -> Result<Profile> {
        match self {
            ProfileSpec::Expr(s) => Profile::parse(s),
            ProfileSpec::Samples { r, values } => {
                Ok(Profile::Spline(CubicSpline::new(r.clone(), values.clone())?))
            }
        }
    }
}

impl From<&Profile> for ProfileSpec {
    fn from(p: &Profile) -> Self {
        match p {
            Profile::Expr(e) => ProfileSpec::Expr(e.to_string()),
            Profile::Spline(s) => ProfileSpec::Samples { r: s.knots.clone(), values: s.values.clone() },
        }
    }
}

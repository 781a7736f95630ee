//! Tiny arithmetic expression language for boundary graphs `ρ(y1, y2)` and
//! configured coefficient profiles.
//!
//! Grammar: `+ - * / ^`, unary minus, parentheses, numeric literals, `pi`,
//! named variables, functions `sin cos exp sqrt`. Exponents must be constant.
//! Surface derivatives are taken symbolically.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Num(f64),
    Var(usize),
    Add(Arc<Node>, Arc<Node>),
    Sub(Arc<Node>, Arc<Node>),
    Mul(Arc<Node>, Arc<Node>),
    Div(Arc<Node>, Arc<Node>),
    /// Base raised to a constant power.
    Pow(Arc<Node>, f64),
    Neg(Arc<Node>),
    Sin(Arc<Node>),
    Cos(Arc<Node>),
    Exp(Arc<Node>),
}

use Node::*;

fn num(x: f64) -> Arc<Node> {
    Arc::new(Num(x))
}

fn as_num(a: &Node) -> Option<f64> {
    match a {
        Num(x) => Some(*x),
        _ => None,
    }
}

fn add(a: Arc<Node>, b: Arc<Node>) -> Arc<Node> {
    match (as_num(&a), as_num(&b)) {
        (Some(x), Some(y)) => num(x + y),
        (Some(x), _) if x == 0.0 => b,
        (_, Some(y)) if y == 0.0 => a,
        _ => Arc::new(Add(a, b)),
    }
}

fn sub(a: Arc<Node>, b: Arc<Node>) -> Arc<Node> {
    match (as_num(&a), as_num(&b)) {
        (Some(x), Some(y)) => num(x - y),
        (Some(x), _) if x == 0.0 => neg(b),
        (_, Some(y)) if y == 0.0 => a,
        _ => Arc::new(Sub(a, b)),
    }
}

fn mul(a: Arc<Node>, b: Arc<Node>) -> Arc<Node> {
    match (as_num(&a), as_num(&b)) {
        (Some(x), Some(y)) => num(x * y),
        (Some(x), _) | (_, Some(x)) if x == 0.0 => num(0.0),
        (Some(x), _) if x == 1.0 => b,
        (_, Some(y)) if y == 1.0 => a,
        _ => Arc::new(Mul(a, b)),
    }
}

fn div(a: Arc<Node>, b: Arc<Node>) -> Arc<Node> {
    match (as_num(&a), as_num(&b)) {
        (Some(x), Some(y)) => num(x / y),
        (Some(x), _) if x == 0.0 => num(0.0),
        (_, Some(y)) if y == 1.0 => a,
        _ => Arc::new(Div(a, b)),
    }
}

fn pow(a: Arc<Node>, p: f64) -> Arc<Node> {
    if p == 0.0 {
        return num(1.0);
    }
    if p == 1.0 {
        return a;
    }
    match as_num(&a) {
        Some(x) => num(x.powf(p)),
        None => Arc::new(Pow(a, p)),
    }
}

fn neg(a: Arc<Node>) -> Arc<Node> {
    match &*a {
        Num(x) => num(-x),
        Neg(inner) => inner.clone(),
        _ => Arc::new(Neg(a)),
    }
}

fn unary(f: fn(Arc<Node>) -> Node, g: fn(f64) -> f64, a: Arc<Node>) -> Arc<Node> {
    match as_num(&a) {
        Some(x) => num(g(x)),
        None => Arc::new(f(a)),
    }
}

fn eval(n: &Node, y: &[f64]) -> f64 {
    match n {
        Num(x) => *x,
        Var(i) => y[*i],
        Add(a, b) => eval(a, y) + eval(b, y),
        Sub(a, b) => eval(a, y) - eval(b, y),
        Mul(a, b) => eval(a, y) * eval(b, y),
        Div(a, b) => eval(a, y) / eval(b, y),
        Pow(a, p) => {
            let base = eval(a, y);
            if p.fract() == 0.0 && p.abs() < 64.0 {
                base.powi(*p as i32)
            } else {
                base.powf(*p)
            }
        }
        Neg(a) => -eval(a, y),
        Sin(a) => eval(a, y).sin(),
        Cos(a) => eval(a, y).cos(),
        Exp(a) => eval(a, y).exp(),
    }
}

fn deriv(n: &Arc<Node>, v: usize) -> Arc<Node> {
    match &**n {
        Num(_) => num(0.0),
        Var(i) => num(if *i == v { 1.0 } else { 0.0 }),
        Add(a, b) => add(deriv(a, v), deriv(b, v)),
        Sub(a, b) => sub(deriv(a, v), deriv(b, v)),
        Mul(a, b) => add(mul(deriv(a, v), b.clone()), mul(a.clone(), deriv(b, v))),
        Div(a, b) => div(
            sub(mul(deriv(a, v), b.clone()), mul(a.clone(), deriv(b, v))),
            pow(b.clone(), 2.0),
        ),
        Pow(a, p) => mul(mul(num(*p), pow(a.clone(), p - 1.0)), deriv(a, v)),
        Neg(a) => neg(deriv(a, v)),
        Sin(a) => mul(unary(Cos, f64::cos, a.clone()), deriv(a, v)),
        Cos(a) => neg(mul(unary(Sin, f64::sin, a.clone()), deriv(a, v))),
        Exp(a) => mul(n.clone(), deriv(a, v)),
    }
}

fn has_var(n: &Node) -> bool {
    match n {
        Num(_) => false,
        Var(_) => true,
        Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) => has_var(a) || has_var(b),
        Pow(a, _) | Neg(a) | Sin(a) | Cos(a) | Exp(a) => has_var(a),
    }
}

/// A parsed surface expression together with its derivatives up to third order.
#[derive(Clone)]
pub struct SurfaceExpr {
    source: String,
    value: Arc<Node>,
    /// `[ρ1, ρ2]`
    d1: [Arc<Node>; 2],
    /// `[ρ11, ρ12, ρ22]`
    d2: [Arc<Node>; 3],
    /// `[ρ111, ρ112, ρ122, ρ222]`
    d3: [Arc<Node>; 4],
}

impl fmt::Debug for SurfaceExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("SurfaceExpr").field(&self.source).finish()
    }
}

impl PartialEq for SurfaceExpr {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
    }
}

impl SurfaceExpr {
    pub fn parse(src: &str) -> Result<Self> {
        let value = parse_with(src, &["y1", "y2"])?;
        let d1 = [deriv(&value, 0), deriv(&value, 1)];
        let d2 = [deriv(&d1[0], 0), deriv(&d1[0], 1), deriv(&d1[1], 1)];
        let d3 = [
            deriv(&d2[0], 0),
            deriv(&d2[0], 1),
            deriv(&d2[1], 1),
            deriv(&d2[2], 1),
        ];
        Ok(Self {
            source: src.to_string(),
            value,
            d1,
            d2,
            d3,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn value(&self, y: &[f64; 2]) -> f64 {
        eval(&self.value, y)
    }

    pub fn gradient(&self, y: &[f64; 2]) -> [f64; 2] {
        [eval(&self.d1[0], y), eval(&self.d1[1], y)]
    }

    pub fn hessian(&self, y: &[f64; 2]) -> [f64; 3] {
        [eval(&self.d2[0], y), eval(&self.d2[1], y), eval(&self.d2[2], y)]
    }

    pub fn third(&self, y: &[f64; 2]) -> [f64; 4] {
        [
            eval(&self.d3[0], y),
            eval(&self.d3[1], y),
            eval(&self.d3[2], y),
            eval(&self.d3[3], y),
        ]
    }
}

fn parse_with(src: &str, vars: &[&str]) -> Result<Arc<Node>> {
    let tokens = tokenize(src)?;
    let mut p = Parser { tokens, pos: 0, vars };
    let value = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(Error::Parse(format!(
            "unexpected token {:?} in expression {src:?}",
            p.tokens[p.pos]
        )));
    }
    Ok(value)
}

/// An expression in a fixed list of named variables, evaluated by position.
#[derive(Clone)]
pub struct ScalarExpr {
    source: String,
    node: Arc<Node>,
    arity: usize,
}

impl fmt::Debug for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("ScalarExpr").field(&self.source).finish()
    }
}

impl ScalarExpr {
    pub fn parse(src: &str, vars: &[&str]) -> Result<Self> {
        Ok(Self {
            source: src.to_string(),
            node: parse_with(src, vars)?,
            arity: vars.len(),
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// `args` must hold one value per declared variable.
    pub fn eval(&self, args: &[f64]) -> f64 {
        debug_assert_eq!(args.len(), self.arity);
        eval(&self.node, args)
    }

    pub fn is_constant(&self) -> bool {
        !has_var(&self.node)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
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
            let x = s
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number {s:?}")))?;
            out.push(Tok::Num(x));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character {c:?}")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Tok>,
    pos: usize,
    vars: &'a [&'a str],
}

impl Parser<'_> {
    fn peek_op(&self) -> Option<char> {
        match self.tokens.get(self.pos) {
            Some(Tok::Op(c)) => Some(*c),
            _ => None,
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek_op() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Parse(format!("expected {c:?}")))
        }
    }

    fn expr(&mut self) -> Result<Arc<Node>> {
        let mut lhs = self.term()?;
        while let Some(c @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if c == '+' { add(lhs, rhs) } else { sub(lhs, rhs) };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Arc<Node>> {
        let mut lhs = self.unary()?;
        while let Some(c @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if c == '*' { mul(lhs, rhs) } else { div(lhs, rhs) };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Arc<Node>> {
        match self.peek_op() {
            Some('-') => {
                self.pos += 1;
                Ok(neg(self.unary()?))
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Arc<Node>> {
        let base = self.atom()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            let e = self.unary()?;
            if has_var(&e) {
                return Err(Error::Parse("exponents must be constant".into()));
            }
            return Ok(pow(base, eval(&e, &[])));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Arc<Node>> {
        let tok = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| Error::Parse("unexpected end of expression".into()))?;
        self.pos += 1;
        match tok {
            Tok::Num(x) => Ok(num(x)),
            Tok::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "pi" => Ok(num(std::f64::consts::PI)),
                "sin" | "cos" | "exp" | "sqrt" => {
                    self.expect('(')?;
                    let a = self.expr()?;
                    self.expect(')')?;
                    Ok(match name.as_str() {
                        "sin" => unary(Sin, f64::sin, a),
                        "cos" => unary(Cos, f64::cos, a),
                        "sqrt" => pow(a, 0.5),
                        _ => unary(Exp, f64::exp, a),
                    })
                }
                other => match self.vars.iter().position(|v| *v == other) {
                    Some(i) => Ok(Arc::new(Var(i))),
                    None => Err(Error::Parse(format!("unknown identifier {other:?}"))),
                },
            },
            Tok::Op(c) => Err(Error::Parse(format!("unexpected {c:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + b.abs())
    }

    #[test]
    fn precedence_and_associativity() {
        let e = SurfaceExpr::parse("1 + 2*3 - 4/2 ^ 2").unwrap();
        assert!(close(e.value(&[0.0, 0.0]), 6.0));
        let e = SurfaceExpr::parse("-y1^2").unwrap();
        assert!(close(e.value(&[3.0, 0.0]), -9.0));
        let e = SurfaceExpr::parse("2^3^2").unwrap();
        assert!(close(e.value(&[0.0, 0.0]), 512.0));
    }

    #[test]
    fn scalar_expressions_bind_variables_by_position() {
        let e = ScalarExpr::parse("t + 2*x - v3^2 + sqrt(4)", &["t", "x", "v1", "v2", "v3"]).unwrap();
        assert!(close(e.eval(&[1.0, 0.5, 9.0, 9.0, 3.0]), 1.0 + 1.0 - 9.0 + 2.0));
        assert!(!e.is_constant());
        assert!(ScalarExpr::parse("2*pi", &[]).unwrap().is_constant());
        assert!(matches!(ScalarExpr::parse("y1", &["v1"]), Err(Error::Parse(_))));
    }

    #[test]
    fn derivatives_of_polynomial() {
        let e = SurfaceExpr::parse("0.5*y1^2 + 0.3*y2^2 + y1*y2^2").unwrap();
        let y = [0.7, -1.3];
        let g = e.gradient(&y);
        assert!(close(g[0], y[0] + y[1] * y[1]));
        assert!(close(g[1], 0.6 * y[1] + 2.0 * y[0] * y[1]));
        let h = e.hessian(&y);
        assert!(close(h[0], 1.0) && close(h[1], 2.0 * y[1]) && close(h[2], 0.6 + 2.0 * y[0]));
        let t = e.third(&y);
        assert!(close(t[0], 0.0) && close(t[1], 0.0) && close(t[2], 2.0) && close(t[3], 0.0));
    }

    #[test]
    fn derivatives_of_transcendental() {
        let e = SurfaceExpr::parse("0.1*sin(2*y1)*cos(3*y2) + exp(y1/2)").unwrap();
        let y: [f64; 2] = [0.4, 0.9];
        let (s, c) = ((2.0 * y[0]).sin(), (3.0 * y[1]).cos());
        let (cs, sn) = ((2.0 * y[0]).cos(), (3.0 * y[1]).sin());
        let ex = (y[0] / 2.0).exp();
        assert!(close(e.gradient(&y)[0], 0.2 * cs * c + 0.5 * ex));
        assert!(close(e.gradient(&y)[1], -0.3 * s * sn));
        assert!(close(e.hessian(&y)[1], -0.6 * cs * sn));
        assert!(close(e.third(&y)[0], -0.8 * cs * c + 0.125 * ex));
        assert!(close(e.third(&y)[3], 2.7 * s * sn));
    }

    #[test]
    fn rejects_malformed_input() {
        for bad in ["", "y3", "1 +", "sin y1", "(y1", "y1^y2", "2 $ 3", "log(y1)"] {
            assert!(SurfaceExpr::parse(bad).is_err(), "{bad}");
        }
    }
}

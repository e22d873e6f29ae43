//! A small expression language for test functions of one variable `t`.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | 't' | 'x' | 'pi' | 'e' | '(' expr ')' | '|' expr '|' | name '(' expr ')'
//! ```
//!
//! Exponents must be constant. Known functions: `abs`, `sqrt`, `exp`, `log`
//! (alias `ln`), `sin`, `cos`. Derivatives of any order come from truncated
//! Taylor arithmetic.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("unexpected character {found:?} at offset {at}")]
    UnexpectedChar { found: char, at: usize },
    #[error("unexpected end of expression")]
    UnexpectedEnd,
    #[error("expected {expected} at offset {at}")]
    Expected { expected: &'static str, at: usize },
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("exponent must not depend on t")]
    VariableExponent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Abs,
    Sqrt,
    Exp,
    Log,
    Sin,
    Cos,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            "exp" => Func::Exp,
            "log" | "ln" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Var,
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, f64),
    Call(Func, Box<Node>),
}

/// An interior point where `|t − c|^p` is not smooth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kink {
    pub at: f64,
    pub exponent: f64,
}

/// A parsed expression.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    source: String,
    root: Node,
}

impl Expr {
    pub fn parse(source: &str) -> Result<Self, ParseError> {
        let mut p = Parser {
            chars: source.char_indices().collect(),
            pos: 0,
            len: source.len(),
        };
        let root = p.expr()?;
        p.skip_ws();
        if let Some(&(at, found)) = p.chars.get(p.pos) {
            return Err(ParseError::UnexpectedChar { found, at });
        }
        Ok(Self {
            source: source.to_string(),
            root,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn eval(&self, t: f64) -> f64 {
        eval_node(&self.root, t)
    }

    /// Taylor coefficients `f^{(j)}(t)/j!` for `j = 0..=order`.
    pub fn jet(&self, t: f64, order: usize) -> Vec<f64> {
        jet_node(&self.root, t, order)
    }

    /// `f^{(order)}(t)`.
    pub fn derivative(&self, order: u32, t: f64) -> f64 {
        let c = self.jet(t, order as usize);
        let fact: f64 = (1..=order).map(f64::from).product();
        c[order as usize] * fact
    }

    /// Kinks of the form `|a t + b|^p` with the root inside `(0, 1)`.
    pub fn kinks(&self) -> Vec<Kink> {
        let mut out = Vec::new();
        collect_kinks(&self.root, 1.0, &mut out);
        out.sort_by(|a, b| a.at.total_cmp(&b.at));
        out.dedup_by(|a, b| a.at == b.at && a.exponent == b.exponent);
        out
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

struct Parser {
    chars: Vec<(usize, char)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn skip_ws(&mut self) {
        while matches!(self.chars.get(self.pos), Some((_, c)) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn offset(&self) -> usize {
        self.chars.get(self.pos).map_or(self.len, |&(i, _)| i)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char, expected: &'static str) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else if self.peek().is_none() {
            Err(ParseError::UnexpectedEnd)
        } else {
            Err(ParseError::Expected {
                expected,
                at: self.offset(),
            })
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            // '−' (U+2212) is accepted as a minus sign.
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some('-') | Some('−') => {
                    self.pos += 1;
                    lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some('*') | Some('·') => {
                    self.pos += 1;
                    lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some('/') => {
                    self.pos += 1;
                    lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        match self.peek() {
            Some('-') | Some('−') => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.atom()?;
        if self.eat('^') {
            let exponent = self.unary()?;
            let p = constant_value(&exponent).ok_or(ParseError::VariableExponent)?;
            return Ok(Node::Pow(Box::new(base), p));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        let Some(c) = self.peek() else {
            return Err(ParseError::UnexpectedEnd);
        };
        let at = self.offset();
        if c == '(' {
            self.pos += 1;
            let inner = self.expr()?;
            self.expect(')', "')'")?;
            return Ok(inner);
        }
        if c == '|' {
            self.pos += 1;
            let inner = self.expr()?;
            self.expect('|', "closing '|'")?;
            return Ok(Node::Call(Func::Abs, Box::new(inner)));
        }
        if c.is_ascii_digit() || c == '.' {
            return self.number();
        }
        if c.is_ascii_alphabetic() {
            let start = self.pos;
            while matches!(self.chars.get(self.pos), Some((_, c)) if c.is_ascii_alphanumeric() || *c == '_')
            {
                self.pos += 1;
            }
            let name: String = self.chars[start..self.pos]
                .iter()
                .map(|&(_, c)| c)
                .collect();
            return match name.as_str() {
                "t" | "x" => Ok(Node::Var),
                "pi" => Ok(Node::Const(std::f64::consts::PI)),
                "e" => Ok(Node::Const(std::f64::consts::E)),
                _ => {
                    let func = Func::from_name(&name).ok_or(ParseError::UnknownFunction(name))?;
                    self.expect('(', "'(' after function name")?;
                    let inner = self.expr()?;
                    self.expect(')', "')'")?;
                    Ok(Node::Call(func, Box::new(inner)))
                }
            };
        }
        Err(ParseError::UnexpectedChar { found: c, at })
    }

    fn number(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        let mut seen_exp = false;
        while let Some(&(_, c)) = self.chars.get(self.pos) {
            let prev = if self.pos > start {
                Some(self.chars[self.pos - 1].1)
            } else {
                None
            };
            let ok = c.is_ascii_digit()
                || c == '.'
                || (!seen_exp
                    && (c == 'e' || c == 'E')
                    && self.pos > start
                    && self.next_is_exponent())
                || ((c == '+' || c == '-') && matches!(prev, Some('e') | Some('E')) && seen_exp);
            if !ok {
                break;
            }
            if c == 'e' || c == 'E' {
                seen_exp = true;
            }
            self.pos += 1;
        }
        let text: String = self.chars[start..self.pos]
            .iter()
            .map(|&(_, c)| c)
            .collect();
        let at = self.chars[start].0;
        text.parse::<f64>()
            .map(Node::Const)
            .map_err(|_| ParseError::Expected {
                expected: "a number",
                at,
            })
    }

    /// After a mantissa, `e` starts an exponent only if a digit (or sign and digit) follows.
    fn next_is_exponent(&self) -> bool {
        let next = self.chars.get(self.pos + 1).map(|&(_, c)| c);
        let after = self.chars.get(self.pos + 2).map(|&(_, c)| c);
        match next {
            Some(d) if d.is_ascii_digit() => true,
            Some('+') | Some('-') => matches!(after, Some(d) if d.is_ascii_digit()),
            _ => false,
        }
    }
}

fn constant_value(node: &Node) -> Option<f64> {
    if contains_var(node) {
        None
    } else {
        Some(eval_node(node, f64::NAN))
    }
}

fn contains_var(node: &Node) -> bool {
    match node {
        Node::Const(_) => false,
        Node::Var => true,
        Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => contains_var(a),
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
            contains_var(a) || contains_var(b)
        }
    }
}

fn powf(base: f64, p: f64) -> f64 {
    if p.fract() == 0.0 && p.abs() < 1024.0 {
        base.powi(p as i32)
    } else {
        base.powf(p)
    }
}

fn eval_node(node: &Node, t: f64) -> f64 {
    match node {
        Node::Const(c) => *c,
        Node::Var => t,
        Node::Neg(a) => -eval_node(a, t),
        Node::Add(a, b) => eval_node(a, t) + eval_node(b, t),
        Node::Sub(a, b) => eval_node(a, t) - eval_node(b, t),
        Node::Mul(a, b) => eval_node(a, t) * eval_node(b, t),
        Node::Div(a, b) => eval_node(a, t) / eval_node(b, t),
        Node::Pow(a, p) => powf(eval_node(a, t), *p),
        Node::Call(f, a) => {
            let u = eval_node(a, t);
            match f {
                Func::Abs => u.abs(),
                Func::Sqrt => u.sqrt(),
                Func::Exp => u.exp(),
                Func::Log => u.ln(),
                Func::Sin => u.sin(),
                Func::Cos => u.cos(),
            }
        }
    }
}

fn jet_node(node: &Node, t: f64, k: usize) -> Vec<f64> {
    let mut out = vec![0.0; k + 1];
    match node {
        Node::Const(c) => out[0] = *c,
        Node::Var => {
            out[0] = t;
            if k >= 1 {
                out[1] = 1.0;
            }
        }
        Node::Neg(a) => {
            for (o, v) in out.iter_mut().zip(jet_node(a, t, k)) {
                *o = -v;
            }
        }
        Node::Add(a, b) | Node::Sub(a, b) => {
            let (x, y) = (jet_node(a, t, k), jet_node(b, t, k));
            let sign = if matches!(node, Node::Add(..)) {
                1.0
            } else {
                -1.0
            };
            for j in 0..=k {
                out[j] = x[j] + sign * y[j];
            }
        }
        Node::Mul(a, b) => {
            let (x, y) = (jet_node(a, t, k), jet_node(b, t, k));
            for j in 0..=k {
                out[j] = (0..=j).map(|i| x[i] * y[j - i]).sum();
            }
        }
        Node::Div(a, b) => {
            let (x, y) = (jet_node(a, t, k), jet_node(b, t, k));
            for j in 0..=k {
                let s: f64 = (1..=j).map(|i| y[i] * out[j - i]).sum();
                out[j] = (x[j] - s) / y[0];
            }
        }
        Node::Pow(a, p) => {
            let u = jet_node(a, t, k);
            if u[0] == 0.0 && p.fract() == 0.0 && *p >= 0.0 {
                // Repeated multiplication avoids dividing by the zero value.
                out[0] = 1.0;
                for _ in 0..(*p as usize) {
                    let prev = out.clone();
                    for j in 0..=k {
                        out[j] = (0..=j).map(|i| prev[i] * u[j - i]).sum();
                    }
                }
            } else {
                out[0] = powf(u[0], *p);
                for j in 1..=k {
                    let s: f64 = (1..=j)
                        .map(|i| ((p + 1.0) * i as f64 - j as f64) * u[i] * out[j - i])
                        .sum();
                    out[j] = s / (j as f64 * u[0]);
                }
            }
        }
        Node::Call(f, a) => {
            let u = jet_node(a, t, k);
            match f {
                Func::Abs => {
                    let s = if u[0] > 0.0 {
                        1.0
                    } else if u[0] < 0.0 {
                        -1.0
                    } else {
                        f64::NAN
                    };
                    out[0] = u[0].abs();
                    for j in 1..=k {
                        out[j] = s * u[j];
                    }
                }
                Func::Sqrt => return jet_node(&Node::Pow(a.clone(), 0.5), t, k),
                Func::Exp => {
                    out[0] = u[0].exp();
                    for j in 1..=k {
                        let s: f64 = (1..=j).map(|i| i as f64 * u[i] * out[j - i]).sum();
                        out[j] = s / j as f64;
                    }
                }
                Func::Log => {
                    out[0] = u[0].ln();
                    for j in 1..=k {
                        let s: f64 = (1..j).map(|i| i as f64 * out[i] * u[j - i]).sum();
                        out[j] = (u[j] - s / j as f64) / u[0];
                    }
                }
                Func::Sin | Func::Cos => {
                    let mut s = vec![0.0; k + 1];
                    let mut c = vec![0.0; k + 1];
                    s[0] = u[0].sin();
                    c[0] = u[0].cos();
                    for j in 1..=k {
                        let jf = j as f64;
                        s[j] = (1..=j).map(|i| i as f64 * u[i] * c[j - i]).sum::<f64>() / jf;
                        c[j] = -(1..=j).map(|i| i as f64 * u[i] * s[j - i]).sum::<f64>() / jf;
                    }
                    out = if *f == Func::Sin { s } else { c };
                }
            }
        }
    }
    out
}

fn collect_kinks(node: &Node, exponent: f64, out: &mut Vec<Kink>) {
    match node {
        Node::Const(_) | Node::Var => {}
        Node::Pow(a, p) => {
            if let Node::Call(Func::Abs, inner) = a.as_ref() {
                push_kink(inner, *p, out);
                collect_kinks(inner, 1.0, out);
            } else {
                collect_kinks(a, exponent, out);
            }
        }
        Node::Call(Func::Abs, inner) => {
            push_kink(inner, exponent, out);
            collect_kinks(inner, 1.0, out);
        }
        Node::Call(_, a) | Node::Neg(a) => collect_kinks(a, 1.0, out),
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
            collect_kinks(a, 1.0, out);
            collect_kinks(b, 1.0, out);
        }
    }
}

/// Records the root of `inner` if it is affine in `t` with a root in `(0, 1)`.
fn push_kink(inner: &Node, exponent: f64, out: &mut Vec<Kink>) {
    let probe = 0.318_309_886_183_790_7;
    let j = jet_node(inner, probe, 3);
    if j[1] == 0.0 || j[2] != 0.0 || j[3] != 0.0 {
        return;
    }
    let at = probe - j[0] / j[1];
    if at > 0.0 && at < 1.0 {
        // Snap to a nearby short decimal so that grids can hit it exactly.
        let snapped = (at * 1e12).round() / 1e12;
        let at = if (snapped - at).abs() <= 1e-14 {
            snapped
        } else {
            at
        };
        out.push(Kink { at, exponent });
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Const(c) => write!(f, "{c}"),
            Node::Var => f.write_str("t"),
            Node::Neg(a) => write!(f, "-({a})"),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Sub(a, b) => write!(f, "({a} - {b})"),
            Node::Mul(a, b) => write!(f, "({a} * {b})"),
            Node::Div(a, b) => write!(f, "({a} / {b})"),
            Node::Pow(a, p) => write!(f, "({a})^({p})"),
            Node::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

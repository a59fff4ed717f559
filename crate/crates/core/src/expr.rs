//! Closed-form expressions of a single real variable `x`.
//!
//! Expressions are parsed from a small infix language, evaluated with
//! explicit domain checks, and differentiated symbolically. Every other
//! module consumes functions through this representation.
//!
//! Grammar (whitespace is insignificant):
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := unary (('*' | '/') unary)*
//! unary    := '-' unary | power
//! power    := atom ('^' exponent)?
//! exponent := '-' exponent | atom ('^' exponent)?      (must fold to a constant)
//! atom     := number | 'x' | 'pi' | 'e' | ident '(' expr ')' | '(' expr ')'
//! ident    := sin | cos | exp | log | sqrt | sinh | cosh | tanh
//! ```
//!
//! `^` binds tighter than unary minus, so `-x^2` is `-(x^2)`.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
    Tanh,
}

impl UnaryOp {
    /// Function name as written in source; `None` for negation.
    pub fn name(self) -> Option<&'static str> {
        match self {
            UnaryOp::Neg => None,
            UnaryOp::Sin => Some("sin"),
            UnaryOp::Cos => Some("cos"),
            UnaryOp::Exp => Some("exp"),
            UnaryOp::Log => Some("log"),
            UnaryOp::Sqrt => Some("sqrt"),
            UnaryOp::Sinh => Some("sinh"),
            UnaryOp::Cosh => Some("cosh"),
            UnaryOp::Tanh => Some("tanh"),
        }
    }

    fn from_name(name: &str) -> Option<UnaryOp> {
        Some(match name {
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "exp" => UnaryOp::Exp,
            "log" => UnaryOp::Log,
            "sqrt" => UnaryOp::Sqrt,
            "sinh" => UnaryOp::Sinh,
            "cosh" => UnaryOp::Cosh,
            "tanh" => UnaryOp::Tanh,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    /// Right operand is always a `Const`.
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
            BinaryOp::Pow => '^',
        }
    }
}

/// Expression tree over the single variable `x`.
///
/// Subtrees are reference counted, so cloning is cheap and derivative
/// trees share structure with their source.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Unary(UnaryOp, Arc<Expr>),
    Binary(BinaryOp, Arc<Expr>, Arc<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("exponent at byte {offset} is not a constant")]
    NonConstantExponent { offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownIdentifier { offset, .. }
            | ParseError::NonConstantExponent { offset } => *offset,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    LogNonPositive,
    SqrtNegative,
    DivisionByZero,
    PowDomain,
    NonFinite,
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DomainKind::LogNonPositive => "log of a non-positive value",
            DomainKind::SqrtNegative => "sqrt of a negative value",
            DomainKind::DivisionByZero => "division by zero",
            DomainKind::PowDomain => "power outside its real domain",
            DomainKind::NonFinite => "non-finite result",
        })
    }
}

/// Evaluation failed at `x` inside the sub-expression `node`.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind} in `{node}` at x = {x}")]
pub struct EvalError {
    pub node: String,
    pub x: f64,
    pub kind: DomainKind,
}

const NODE_TEXT_LIMIT: usize = 80;

impl EvalError {
    fn new(node: &Expr, x: f64, kind: DomainKind) -> Self {
        let mut text = node.to_string();
        if text.len() > NODE_TEXT_LIMIT {
            let mut cut = NODE_TEXT_LIMIT;
            while !text.is_char_boundary(cut) {
                cut -= 1;
            }
            text.truncate(cut);
            text.push_str("...");
        }
        EvalError { node: text, x, kind }
    }
}

pub fn parse(source: &str) -> Result<Expr, ParseError> {
    let mut parser = Parser { src: source.as_bytes(), pos: 0 };
    let e = parser.expr()?;
    parser.skip_ws();
    if parser.pos < parser.src.len() {
        return Err(parser.syntax("unexpected trailing input"));
    }
    Ok(e)
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn syntax(&self, message: &str) -> ParseError {
        ParseError::Syntax { offset: self.pos, message: message.to_string() }
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

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinaryOp::Add,
                Some(b'-') => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Arc::new(lhs), Arc::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinaryOp::Mul,
                Some(b'/') => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Arc::new(lhs), Arc::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            let inner = self.unary()?;
            return Ok(Expr::Unary(UnaryOp::Neg, Arc::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        self.skip_ws();
        let start = self.pos;
        let exponent = self.exponent()?;
        match exponent.constant_value() {
            Some(c) if c.is_finite() => {
                Ok(Expr::Binary(BinaryOp::Pow, Arc::new(base), Arc::new(Expr::Const(c))))
            }
            _ => Err(ParseError::NonConstantExponent { offset: start }),
        }
    }

    fn exponent(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            let inner = self.exponent()?;
            return Ok(Expr::Unary(UnaryOp::Neg, Arc::new(inner)));
        }
        self.power()
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            None => Err(self.syntax("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.syntax("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
                match name {
                    "x" => Ok(Expr::Var),
                    "pi" => Ok(Expr::Const(std::f64::consts::PI)),
                    "e" => Ok(Expr::Const(std::f64::consts::E)),
                    _ => {
                        let Some(op) = UnaryOp::from_name(name) else {
                            return Err(ParseError::UnknownIdentifier {
                                offset: start,
                                name: name.to_string(),
                            });
                        };
                        if !self.eat(b'(') {
                            return Err(self.syntax("expected `(` after function name"));
                        }
                        let arg = self.expr()?;
                        if !self.eat(b')') {
                            return Err(self.syntax("expected `)`"));
                        }
                        Ok(Expr::Unary(op, Arc::new(arg)))
                    }
                }
            }
            Some(_) => Err(self.syntax("unexpected character")),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut n = digits(self);
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            self.pos = start;
            return Err(self.syntax("malformed number"));
        }
        // Scientific suffix only when a digit follows, so `2*e` still means Euler's number.
        if self.pos < self.src.len() && matches!(self.src[self.pos], b'e' | b'E') {
            let mut look = self.pos + 1;
            if look < self.src.len() && matches!(self.src[look], b'+' | b'-') {
                look += 1;
            }
            if look < self.src.len() && self.src[look].is_ascii_digit() {
                self.pos = look;
                digits(self);
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
        text.parse::<f64>()
            .map(Expr::Const)
            .map_err(|_| ParseError::Syntax { offset: start, message: "malformed number".into() })
    }
}

impl Expr {
    pub fn x() -> Expr {
        Expr::Var
    }

    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    pub fn is_const(&self, c: f64) -> bool {
        matches!(self, Expr::Const(v) if *v == c)
    }

    pub fn contains_var(&self) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var => true,
            Expr::Unary(_, u) => u.contains_var(),
            Expr::Binary(_, l, r) => l.contains_var() || r.contains_var(),
        }
    }

    /// Value of a variable-free expression, if it evaluates.
    pub fn constant_value(&self) -> Option<f64> {
        if self.contains_var() {
            return None;
        }
        self.eval(0.0).ok()
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var => 1,
            Expr::Unary(_, u) => 1 + u.node_count(),
            Expr::Binary(_, l, r) => 1 + l.node_count() + r.node_count(),
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        let v = match self {
            Expr::Const(c) => *c,
            Expr::Var => x,
            Expr::Unary(op, u) => {
                let a = u.eval(x)?;
                match op {
                    UnaryOp::Neg => -a,
                    UnaryOp::Sin => a.sin(),
                    UnaryOp::Cos => a.cos(),
                    UnaryOp::Exp => a.exp(),
                    UnaryOp::Log => {
                        if a <= 0.0 {
                            return Err(EvalError::new(self, x, DomainKind::LogNonPositive));
                        }
                        a.ln()
                    }
                    UnaryOp::Sqrt => {
                        if a < 0.0 {
                            return Err(EvalError::new(self, x, DomainKind::SqrtNegative));
                        }
                        a.sqrt()
                    }
                    UnaryOp::Sinh => a.sinh(),
                    UnaryOp::Cosh => a.cosh(),
                    UnaryOp::Tanh => a.tanh(),
                }
            }
            Expr::Binary(op, l, r) => {
                let a = l.eval(x)?;
                let b = r.eval(x)?;
                match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div => {
                        if b == 0.0 {
                            return Err(EvalError::new(self, x, DomainKind::DivisionByZero));
                        }
                        a / b
                    }
                    BinaryOp::Pow => pow_checked(a, b).ok_or_else(|| {
                        let kind = if a == 0.0 { DomainKind::DivisionByZero } else { DomainKind::PowDomain };
                        EvalError::new(self, x, kind)
                    })?,
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::new(self, x, DomainKind::NonFinite))
        }
    }

    /// Symbolic derivative with respect to `x`.
    pub fn differentiate(&self) -> Expr {
        match self {
            Expr::Const(_) => Expr::Const(0.0),
            Expr::Var => Expr::Const(1.0),
            Expr::Unary(op, u) => {
                let du = u.differentiate();
                let u = (**u).clone();
                let outer = match op {
                    UnaryOp::Neg => return -du,
                    UnaryOp::Sin => u.cos(),
                    UnaryOp::Cos => -u.sin(),
                    UnaryOp::Exp => u.exp(),
                    UnaryOp::Log => return du / u,
                    UnaryOp::Sqrt => return du / (Expr::Const(2.0) * u.sqrt()),
                    UnaryOp::Sinh => u.cosh(),
                    UnaryOp::Cosh => u.sinh(),
                    UnaryOp::Tanh => Expr::Const(1.0) - u.tanh().powf(2.0),
                };
                outer * du
            }
            Expr::Binary(op, l, r) => {
                let (l, r) = ((**l).clone(), (**r).clone());
                match op {
                    BinaryOp::Add => l.differentiate() + r.differentiate(),
                    BinaryOp::Sub => l.differentiate() - r.differentiate(),
                    BinaryOp::Mul => l.differentiate() * r.clone() + l * r.differentiate(),
                    BinaryOp::Div => {
                        (l.differentiate() * r.clone() - l * r.differentiate()) / r.powf(2.0)
                    }
                    BinaryOp::Pow => {
                        let Expr::Const(c) = r else {
                            unreachable!("pow exponent is constant by construction")
                        };
                        let dl = l.differentiate();
                        Expr::Const(c) * l.powf(c - 1.0) * dl
                    }
                }
            }
        }
    }

    fn unary(self, op: UnaryOp) -> Expr {
        if let Expr::Const(c) = self {
            if let Ok(v) = Expr::Unary(op, Arc::new(Expr::Const(c))).eval(0.0) {
                return Expr::Const(v);
            }
        }
        Expr::Unary(op, Arc::new(self))
    }

    pub fn sin(self) -> Expr {
        self.unary(UnaryOp::Sin)
    }
    pub fn cos(self) -> Expr {
        self.unary(UnaryOp::Cos)
    }
    pub fn exp(self) -> Expr {
        self.unary(UnaryOp::Exp)
    }
    pub fn ln(self) -> Expr {
        self.unary(UnaryOp::Log)
    }
    pub fn sqrt(self) -> Expr {
        self.unary(UnaryOp::Sqrt)
    }
    pub fn sinh(self) -> Expr {
        self.unary(UnaryOp::Sinh)
    }
    pub fn cosh(self) -> Expr {
        self.unary(UnaryOp::Cosh)
    }
    pub fn tanh(self) -> Expr {
        self.unary(UnaryOp::Tanh)
    }

    /// `self ^ c` with folding of the trivial exponents 0 and 1.
    pub fn powf(self, c: f64) -> Expr {
        if c == 0.0 {
            return Expr::Const(1.0);
        }
        if c == 1.0 {
            return self;
        }
        if let Expr::Const(b) = self {
            if let Some(v) = pow_checked(b, c).filter(|v| v.is_finite()) {
                return Expr::Const(v);
            }
        }
        Expr::Binary(BinaryOp::Pow, Arc::new(self), Arc::new(Expr::Const(c)))
    }

    fn binary(op: BinaryOp, l: Expr, r: Expr) -> Expr {
        if let (Expr::Const(_), Expr::Const(_)) = (&l, &r) {
            let folded = Expr::Binary(op, Arc::new(l.clone()), Arc::new(r.clone()));
            if let Ok(v) = folded.eval(0.0) {
                return Expr::Const(v);
            }
            return folded;
        }
        Expr::Binary(op, Arc::new(l), Arc::new(r))
    }
}

fn pow_checked(base: f64, c: f64) -> Option<f64> {
    if base == 0.0 && c < 0.0 {
        return None;
    }
    if c.fract() == 0.0 && c.abs() <= 64.0 {
        return Some(base.powi(c as i32));
    }
    if base < 0.0 {
        return None;
    }
    Some(base.powf(c))
}

impl Add for Expr {
    type Output = Expr;

    fn add(self, rhs: Expr) -> Expr {
        if rhs.is_const(0.0) {
            return self;
        }
        if self.is_const(0.0) {
            return rhs;
        }
        Expr::binary(BinaryOp::Add, self, rhs)
    }
}

impl Sub for Expr {
    type Output = Expr;

    fn sub(self, rhs: Expr) -> Expr {
        if rhs.is_const(0.0) {
            return self;
        }
        if self.is_const(0.0) {
            return -rhs;
        }
        Expr::binary(BinaryOp::Sub, self, rhs)
    }
}

impl Mul for Expr {
    type Output = Expr;

    fn mul(self, rhs: Expr) -> Expr {
        if self.is_const(0.0) || rhs.is_const(0.0) {
            return Expr::Const(0.0);
        }
        if self.is_const(1.0) {
            return rhs;
        }
        if rhs.is_const(1.0) {
            return self;
        }
        Expr::binary(BinaryOp::Mul, self, rhs)
    }
}

impl Div for Expr {
    type Output = Expr;

    fn div(self, rhs: Expr) -> Expr {
        if rhs.is_const(1.0) {
            return self;
        }
        if self.is_const(0.0) && !rhs.is_const(0.0) {
            return Expr::Const(0.0);
        }
        Expr::binary(BinaryOp::Div, self, rhs)
    }
}

impl Neg for Expr {
    type Output = Expr;

    fn neg(self) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Unary(UnaryOp::Neg, inner) => (*inner).clone(),
            other => Expr::Unary(UnaryOp::Neg, Arc::new(other)),
        }
    }
}

impl From<f64> for Expr {
    fn from(c: f64) -> Self {
        Expr::Const(c)
    }
}

/// Prints in a form `parse` reads back to an equal-valued tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) => {
                write!(f, "(-{})", -c)
            }
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var => f.write_str("x"),
            Expr::Unary(UnaryOp::Neg, u) => write!(f, "-({u})"),
            Expr::Unary(op, u) => write!(f, "{}({u})", op.name().unwrap_or_default()),
            Expr::Binary(BinaryOp::Pow, l, r) => write!(f, "({l})^({r})"),
            Expr::Binary(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
        }
    }
}

/// A function together with its first three symbolic derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothFn {
    pub label: String,
    layers: [Expr; 4],
}

impl SmoothFn {
    pub fn new(e: Expr, label: impl Into<String>) -> Self {
        let d1 = e.differentiate();
        let d2 = d1.differentiate();
        let d3 = d2.differentiate();
        SmoothFn { label: label.into(), layers: [e, d1, d2, d3] }
    }

    pub fn parse(source: &str, label: impl Into<String>) -> Result<Self, ParseError> {
        Ok(SmoothFn::new(parse(source)?, label))
    }

    pub fn d0(&self) -> &Expr {
        &self.layers[0]
    }
    pub fn d1(&self) -> &Expr {
        &self.layers[1]
    }
    pub fn d2(&self) -> &Expr {
        &self.layers[2]
    }
    pub fn d3(&self) -> &Expr {
        &self.layers[3]
    }

    /// Derivative layer `order` (0..=3).
    pub fn layer(&self, order: usize) -> &Expr {
        &self.layers[order]
    }

    pub fn value(&self, x: f64) -> Result<f64, EvalError> {
        self.layers[0].eval(x)
    }

    pub fn deriv(&self, x: f64) -> Result<f64, EvalError> {
        self.layers[1].eval(x)
    }

    pub fn eval_layer(&self, order: usize, x: f64) -> Result<f64, EvalError> {
        self.layers[order].eval(x)
    }
}

/// Bundle `e` with its derivatives up to order three.
pub fn smooth(e: Expr, label: impl Into<String>) -> SmoothFn {
    SmoothFn::new(e, label)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn parses_variable_and_functions() {
        assert_eq!(p("x"), Expr::Var);
        assert_eq!(p("cosh(x)"), Expr::Unary(UnaryOp::Cosh, Arc::new(Expr::Var)));
        assert_eq!(p("  cosh ( x ) "), p("cosh(x)"));
    }

    #[test]
    fn precedence_and_associativity() {
        let expected = Expr::Binary(
            BinaryOp::Sub,
            Arc::new(Expr::Binary(
                BinaryOp::Mul,
                Arc::new(Expr::Const(2.0)),
                Arc::new(Expr::Binary(BinaryOp::Pow, Arc::new(Expr::Var), Arc::new(Expr::Const(3.0)))),
            )),
            Arc::new(Expr::Const(1.0)),
        );
        assert_eq!(p("2*x^3 - 1"), expected);
        // pow binds tighter than unary minus
        assert_eq!(p("-x^2").eval(3.0).unwrap(), -9.0);
        // right-associative pow
        assert_eq!(p("2^3^2").eval(0.0).unwrap(), 512.0);
        // left-associative sub and div
        assert_eq!(p("10-4-3").eval(0.0).unwrap(), 3.0);
        assert_eq!(p("64/4/2").eval(0.0).unwrap(), 8.0);
        assert_eq!(p("x^-2").eval(2.0).unwrap(), 0.25);
        assert_eq!(p("x^(1/2)").eval(9.0).unwrap(), 3.0);
    }

    #[test]
    fn named_constants_and_numbers() {
        assert_eq!(p("pi"), Expr::Const(PI));
        assert_eq!(p("e"), Expr::Const(E));
        assert_eq!(p("2*e").eval(0.0).unwrap(), 2.0 * E);
        assert_eq!(p("1.5e-3").eval(0.0).unwrap(), 1.5e-3);
        assert_eq!(p(".5").eval(0.0).unwrap(), 0.5);
    }

    #[test]
    fn parse_errors_carry_offsets() {
        assert_eq!(
            parse("x + foo(x)"),
            Err(ParseError::UnknownIdentifier { offset: 4, name: "foo".into() })
        );
        assert_eq!(parse("x^x"), Err(ParseError::NonConstantExponent { offset: 2 }));
        assert_eq!(parse("2^(1+x)").unwrap_err().offset(), 2);
        assert!(matches!(parse("(x"), Err(ParseError::Syntax { offset: 2, .. })));
        assert!(matches!(parse("x )"), Err(ParseError::Syntax { offset: 2, .. })));
        assert!(matches!(parse(""), Err(ParseError::Syntax { offset: 0, .. })));
        assert!(matches!(parse("x $"), Err(ParseError::Syntax { offset: 2, .. })));
    }

    #[test]
    fn evaluates_examples() {
        assert_eq!(p("cosh(x)").eval(0.0).unwrap(), 1.0);
        assert!((p("exp(x)").eval(1.0).unwrap() - E).abs() < 1e-15);
        assert!((p("sin(2*x)").eval(PI / 4.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn domain_errors_name_the_node() {
        let err = p("1 + log(x)").eval(-1.0).unwrap_err();
        assert_eq!(err.kind, DomainKind::LogNonPositive);
        assert_eq!(err.node, "log(x)");
        assert_eq!(p("sqrt(x)").eval(-1.0).unwrap_err().kind, DomainKind::SqrtNegative);
        assert_eq!(p("1/x").eval(0.0).unwrap_err().kind, DomainKind::DivisionByZero);
        assert_eq!(p("x^-1").eval(0.0).unwrap_err().kind, DomainKind::DivisionByZero);
        assert_eq!(p("x^0.5").eval(-4.0).unwrap_err().kind, DomainKind::PowDomain);
        assert_eq!(p("exp(exp(x))").eval(10.0).unwrap_err().kind, DomainKind::NonFinite);
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(p("cosh(x)").differentiate(), p("sinh(x)"));
        assert_eq!(p("7.5").differentiate(), Expr::Const(0.0));
        let d = p("x^3").differentiate();
        let h = 1e-5;
        let fd = (p("x^3").eval(2.0 + h).unwrap() - p("x^3").eval(2.0 - h).unwrap()) / (2.0 * h);
        assert!((fd - 12.0).abs() < 1e-6);
        assert!((d.eval(2.0).unwrap() - 12.0).abs() < 1e-12);
    }

    #[test]
    fn smooth_layers() {
        let s = SmoothFn::parse("x^2", "F").unwrap();
        assert_eq!(s.d1().eval(3.0).unwrap(), 6.0);
        assert_eq!(s.d2(), &Expr::Const(2.0));
        assert_eq!(s.d3(), &Expr::Const(0.0));

        let s = SmoothFn::parse("exp(x)", "G").unwrap();
        for &x in &[-2.0, 0.0, 0.7, 3.0] {
            let v = s.value(x).unwrap();
            for k in 1..4 {
                assert_eq!(s.eval_layer(k, x).unwrap(), v);
            }
        }
    }

    #[test]
    fn second_derivative_of_sin3x_matches_finite_differences() {
        // Oracle: second-order central difference of d0, independent of the symbolic rules.
        let s = SmoothFn::parse("sin(3*x)", "g").unwrap();
        let h = 1e-4;
        let mut state = 0x2545_f491_4f6c_dd1du64;
        for _ in 0..10 {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            let x = -3.0 + 6.0 * ((state >> 11) as f64 / (1u64 << 53) as f64);
            let f = |t: f64| s.value(t).unwrap();
            let fd = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
            let sym = s.d2().eval(x).unwrap();
            assert!((sym - fd).abs() < 1e-5, "x={x} sym={sym} fd={fd}");
            assert!((sym + 9.0 * (3.0 * x).sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_folding_in_derivatives() {
        assert_eq!(p("x").differentiate(), Expr::Const(1.0));
        assert_eq!(p("3*x").differentiate(), Expr::Const(3.0));
        assert_eq!(p("x + 4").differentiate(), Expr::Const(1.0));
        assert_eq!(p("x^2").differentiate().differentiate(), Expr::Const(2.0));
    }

    #[test]
    fn display_round_trips() {
        for src in ["-x^2 + 3*sin(2*x)", "x^-2.5", "exp(-x)/(1+x^2)", "tanh(x) - -3", "sqrt(cosh(x))*log(2+x)"] {
            let e = p(src);
            let back = p(&e.to_string());
            for &x in &[0.3, 1.1, 1.9] {
                assert_eq!(e.eval(x).unwrap(), back.eval(x).unwrap(), "{src} -> {e}");
            }
        }
    }
}

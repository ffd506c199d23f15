//! Scalar expressions over chart coordinates.
//!
//! Every metric, frame and Weingarten component in the crate is an [`Expr`],
//! so derivatives entering Christoffel symbols and curvature are exact. Trees
//! are immutable and share subtrees through `Arc`; evaluation and
//! differentiation memoize shared nodes so that the cost tracks the size of
//! the DAG rather than of the unfolded tree.
//!
//! # Grammar
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?
//! atom    := number | constant | variable | function '(' expr ')' | '(' expr ')'
//! number  := digits ['.' digits] [('e' | 'E') ['+' | '-'] digits]
//! function:= sin | cos | exp | sqrt | ln | log
//! constant:= pi
//! ```
//!
//! `^` is right associative and binds tighter than unary minus, so `-x^2`
//! reads as `-(x^2)`. Variables must be declared; the default vocabulary is
//! `t` (with aliases `tau` and `τ`) and `x1`, `x2`, `x3`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};

/// Name of the time coordinate of a split spacetime.
pub const TIME: &str = "t";
/// Names of the slice coordinates.
pub const COORDS: [&str; 3] = ["x1", "x2", "x3"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Exp,
    Sqrt,
    Ln,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, PartialEq)]
enum Node {
    Const(f64),
    Var(Arc<str>),
    Unary(UnaryOp, Expr),
    Binary(BinaryOp, Expr, Expr),
}

/// An immutable scalar expression.
#[derive(Clone, PartialEq)]
pub struct Expr(Arc<Node>);

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl From<f64> for Expr {
    fn from(value: f64) -> Self {
        Expr::constant(value)
    }
}

impl Expr {
    pub fn constant(value: f64) -> Self {
        Expr(Arc::new(Node::Const(value)))
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn var(name: &str) -> Self {
        Expr(Arc::new(Node::Var(Arc::from(name))))
    }

    /// The time coordinate `t`.
    pub fn time() -> Self {
        Self::var(TIME)
    }

    /// Slice coordinate `x{index+1}`.
    pub fn coord(index: usize) -> Self {
        Self::var(COORDS[index])
    }

    /// Constant value, if this node is a literal.
    pub fn as_constant(&self) -> Option<f64> {
        match *self.0 {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_constant() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.as_constant() == Some(1.0)
    }

    fn key(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    fn shared(&self) -> bool {
        Arc::strong_count(&self.0) > 1
    }

    pub fn unary(op: UnaryOp, arg: Expr) -> Self {
        if let Some(c) = arg.as_constant() {
            if let Some(v) = fold_unary(op, c) {
                return Expr::constant(v);
            }
        }
        if op == UnaryOp::Neg {
            if let Node::Unary(UnaryOp::Neg, inner) = &*arg.0 {
                return inner.clone();
            }
        }
        Expr(Arc::new(Node::Unary(op, arg)))
    }

    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Self {
        if let (Some(a), Some(b)) = (lhs.as_constant(), rhs.as_constant()) {
            if let Some(v) = fold_binary(op, a, b) {
                return Expr::constant(v);
            }
        }
        match op {
            BinaryOp::Add => {
                if lhs.is_zero() {
                    return rhs;
                }
                if rhs.is_zero() {
                    return lhs;
                }
            }
            BinaryOp::Sub => {
                if rhs.is_zero() {
                    return lhs;
                }
                if lhs.is_zero() {
                    return Expr::unary(UnaryOp::Neg, rhs);
                }
            }
            BinaryOp::Mul => {
                if lhs.is_zero() || rhs.is_zero() {
                    return Expr::zero();
                }
                if lhs.is_one() {
                    return rhs;
                }
                if rhs.is_one() {
                    return lhs;
                }
            }
            BinaryOp::Div => {
                if rhs.is_one() {
                    return lhs;
                }
                if lhs.is_zero() && rhs.as_constant().is_none() {
                    return Expr::zero();
                }
            }
            BinaryOp::Pow => {
                if rhs.is_one() {
                    return lhs;
                }
                if rhs.is_zero() {
                    return Expr::one();
                }
            }
        }
        Expr(Arc::new(Node::Binary(op, lhs, rhs)))
    }

    pub fn sin(&self) -> Self {
        Self::unary(UnaryOp::Sin, self.clone())
    }

    pub fn cos(&self) -> Self {
        Self::unary(UnaryOp::Cos, self.clone())
    }

    pub fn exp(&self) -> Self {
        Self::unary(UnaryOp::Exp, self.clone())
    }

    pub fn sqrt(&self) -> Self {
        Self::unary(UnaryOp::Sqrt, self.clone())
    }

    pub fn ln(&self) -> Self {
        Self::unary(UnaryOp::Ln, self.clone())
    }

    pub fn pow(&self, exponent: impl Into<Expr>) -> Self {
        Self::binary(BinaryOp::Pow, self.clone(), exponent.into())
    }

    pub fn powi(&self, exponent: i32) -> Self {
        self.pow(f64::from(exponent))
    }

    /// Evaluate at a binding.
    pub fn eval(&self, binding: &Binding) -> Result<f64> {
        Evaluator::new(binding).eval(self)
    }

    /// Exact partial derivative with respect to `var`.
    pub fn diff(&self, var: &str) -> Expr {
        let mut memo = HashMap::new();
        self.diff_memo(var, &mut memo)
    }

    fn diff_memo(&self, var: &str, memo: &mut HashMap<usize, Expr>) -> Expr {
        if let Some(d) = memo.get(&self.key()) {
            return d.clone();
        }
        let d = match &*self.0 {
            Node::Const(_) => Expr::zero(),
            Node::Var(name) => {
                if &**name == var {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Unary(op, a) => {
                let da = a.diff_memo(var, memo);
                if da.is_zero() {
                    Expr::zero()
                } else {
                    match op {
                        UnaryOp::Neg => -da,
                        UnaryOp::Sin => a.cos() * da,
                        UnaryOp::Cos => -(a.sin() * da),
                        UnaryOp::Exp => self.clone() * da,
                        UnaryOp::Sqrt => da / (Expr::constant(2.0) * self.clone()),
                        UnaryOp::Ln => da / a.clone(),
                    }
                }
            }
            Node::Binary(op, a, b) => {
                let da = a.diff_memo(var, memo);
                let db = b.diff_memo(var, memo);
                match op {
                    BinaryOp::Add => da + db,
                    BinaryOp::Sub => da - db,
                    BinaryOp::Mul => da * b.clone() + a.clone() * db,
                    BinaryOp::Div => {
                        if db.is_zero() {
                            da / b.clone()
                        } else {
                            (da * b.clone() - a.clone() * db) / (b.clone() * b.clone())
                        }
                    }
                    BinaryOp::Pow => match b.as_constant() {
                        Some(n) => Expr::constant(n) * a.pow(n - 1.0) * da,
                        None => {
                            // d(a^b) = a^b (b' ln a + b a'/a)
                            let log_part = if db.is_zero() {
                                Expr::zero()
                            } else {
                                db * a.ln()
                            };
                            let base_part = if da.is_zero() {
                                Expr::zero()
                            } else {
                                b.clone() * da / a.clone()
                            };
                            self.clone() * (log_part + base_part)
                        }
                    },
                }
            }
        };
        if self.shared() {
            memo.insert(self.key(), d.clone());
        }
        d
    }

    /// Replace every occurrence of variable `var` by `value`, folding constants.
    pub fn substitute(&self, var: &str, value: &Expr) -> Expr {
        let mut memo = HashMap::new();
        self.subst_memo(var, value, &mut memo)
    }

    fn subst_memo(&self, var: &str, value: &Expr, memo: &mut HashMap<usize, Expr>) -> Expr {
        if let Some(s) = memo.get(&self.key()) {
            return s.clone();
        }
        let s = match &*self.0 {
            Node::Const(_) => self.clone(),
            Node::Var(name) => {
                if &**name == var {
                    value.clone()
                } else {
                    self.clone()
                }
            }
            Node::Unary(op, a) => Expr::unary(*op, a.subst_memo(var, value, memo)),
            Node::Binary(op, a, b) => Expr::binary(
                *op,
                a.subst_memo(var, value, memo),
                b.subst_memo(var, value, memo),
            ),
        };
        if self.shared() {
            memo.insert(self.key(), s.clone());
        }
        s
    }

    /// Names of the free variables.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![self];
        while let Some(e) = stack.pop() {
            if !seen.insert(e.key()) {
                continue;
            }
            match &*e.0 {
                Node::Const(_) => {}
                Node::Var(name) => {
                    out.insert(name.to_string());
                }
                Node::Unary(_, a) => stack.push(a),
                Node::Binary(_, a, b) => {
                    stack.push(a);
                    stack.push(b);
                }
            }
        }
        out
    }

    pub fn depends_on(&self, var: &str) -> bool {
        self.variables().contains(var)
    }

    /// Number of distinct nodes in the DAG.
    pub fn node_count(&self) -> usize {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![self];
        while let Some(e) = stack.pop() {
            if !seen.insert(e.key()) {
                continue;
            }
            match &*e.0 {
                Node::Unary(_, a) => stack.push(a),
                Node::Binary(_, a, b) => {
                    stack.push(a);
                    stack.push(b);
                }
                _ => {}
            }
        }
        seen.len()
    }
}

fn fold_unary(op: UnaryOp, c: f64) -> Option<f64> {
    let v = match op {
        UnaryOp::Neg => -c,
        UnaryOp::Sin => c.sin(),
        UnaryOp::Cos => c.cos(),
        UnaryOp::Exp => c.exp(),
        UnaryOp::Sqrt if c >= 0.0 => c.sqrt(),
        UnaryOp::Ln if c > 0.0 => c.ln(),
        _ => return None,
    };
    v.is_finite().then_some(v)
}

fn fold_binary(op: BinaryOp, a: f64, b: f64) -> Option<f64> {
    let v = match op {
        BinaryOp::Add => a + b,
        BinaryOp::Sub => a - b,
        BinaryOp::Mul => a * b,
        BinaryOp::Div if b != 0.0 => a / b,
        BinaryOp::Pow => checked_pow(a, b).ok()?,
        _ => return None,
    };
    v.is_finite().then_some(v)
}

fn checked_pow(a: f64, b: f64) -> Result<f64> {
    if b.fract() == 0.0 && b.abs() < i32::MAX as f64 {
        if a == 0.0 && b < 0.0 {
            return Err(Error::Domain("zero raised to a negative power".into()));
        }
        return Ok(a.powi(b as i32));
    }
    if a < 0.0 {
        return Err(Error::Domain(format!("negative base {a} with non-integer exponent {b}")));
    }
    if a == 0.0 && b < 0.0 {
        return Err(Error::Domain("zero raised to a negative power".into()));
    }
    Ok(a.powf(b))
}

macro_rules! impl_binary_ops {
    ($($trait:ident, $method:ident, $op:expr;)*) => {$(
        impl $trait for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::binary($op, self, rhs)
            }
        }
        impl $trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::binary($op, self.clone(), rhs.clone())
            }
        }
        impl $trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::binary($op, self, rhs.clone())
            }
        }
        impl $trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::binary($op, self.clone(), rhs)
            }
        }
        impl $trait<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                Expr::binary($op, self, Expr::constant(rhs))
            }
        }
        impl $trait<f64> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                Expr::binary($op, self.clone(), Expr::constant(rhs))
            }
        }
        impl $trait<Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::binary($op, Expr::constant(self), rhs)
            }
        }
        impl $trait<&Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::binary($op, Expr::constant(self), rhs.clone())
            }
        }
    )*};
}

impl_binary_ops! {
    Add, add, BinaryOp::Add;
    Sub, sub, BinaryOp::Sub;
    Mul, mul, BinaryOp::Mul;
    Div, div, BinaryOp::Div;
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::unary(UnaryOp::Neg, self)
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::unary(UnaryOp::Neg, self.clone())
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        iter.fold(Expr::zero(), |acc, e| acc + e)
    }
}

/// Values for the free variables of an expression.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Binding {
    values: Vec<(String, f64)>,
}

impl Binding {
    pub fn new() -> Self {
        Self::default()
    }

    /// Binding of the slice coordinates `x1..x3` only.
    pub fn slice(x: [f64; 3]) -> Self {
        let mut b = Self::new();
        for (name, v) in COORDS.iter().zip(x) {
            b.set(name, v);
        }
        b
    }

    /// Binding of the time `t` and the slice coordinates.
    pub fn spacetime(t: f64, x: [f64; 3]) -> Self {
        Self::slice(x).with(TIME, t)
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.set(name, value);
        self
    }

    pub fn set(&mut self, name: &str, value: f64) {
        match self.values.iter_mut().find(|(n, _)| n == name) {
            Some(slot) => slot.1 = value,
            None => self.values.push((name.to_string(), value)),
        }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.iter().find(|(n, _)| n == name).map(|&(_, v)| v)
    }

    /// Slice coordinates, if all three are bound.
    pub fn coords(&self) -> Option<[f64; 3]> {
        Some([self.get(COORDS[0])?, self.get(COORDS[1])?, self.get(COORDS[2])?])
    }

    pub fn time(&self) -> Option<f64> {
        self.get(TIME)
    }

    /// Copy with `name` shifted by `delta`; panics if `name` is unbound.
    pub fn shifted(&self, name: &str, delta: f64) -> Self {
        let mut b = self.clone();
        let v = b.get(name).expect("shifted variable must be bound");
        b.set(name, v + delta);
        b
    }
}

/// Evaluates several expressions at one binding, sharing work on common subtrees.
pub struct Evaluator<'a> {
    binding: &'a Binding,
    // holds a clone of each cached node so its address cannot be reused
    cache: HashMap<usize, (Expr, f64)>,
}

impl<'a> Evaluator<'a> {
    pub fn new(binding: &'a Binding) -> Self {
        Self {
            binding,
            cache: HashMap::new(),
        }
    }

    pub fn binding(&self) -> &Binding {
        self.binding
    }

    pub fn eval(&mut self, e: &Expr) -> Result<f64> {
        let shared = e.shared();
        if shared {
            if let Some(&(_, v)) = self.cache.get(&e.key()) {
                return Ok(v);
            }
        }
        let v = match &*e.0 {
            Node::Const(c) => *c,
            Node::Var(name) => self
                .binding
                .get(name)
                .ok_or_else(|| Error::UnboundVariable(name.to_string()))?,
            Node::Unary(op, a) => {
                let x = self.eval(a)?;
                match op {
                    UnaryOp::Neg => -x,
                    UnaryOp::Sin => x.sin(),
                    UnaryOp::Cos => x.cos(),
                    UnaryOp::Exp => x.exp(),
                    UnaryOp::Sqrt => {
                        if x < 0.0 {
                            return Err(Error::Domain(format!("sqrt of negative value {x}")));
                        }
                        x.sqrt()
                    }
                    UnaryOp::Ln => {
                        if x <= 0.0 {
                            return Err(Error::Domain(format!("ln of non-positive value {x}")));
                        }
                        x.ln()
                    }
                }
            }
            Node::Binary(op, a, b) => {
                let x = self.eval(a)?;
                let y = self.eval(b)?;
                match op {
                    BinaryOp::Add => x + y,
                    BinaryOp::Sub => x - y,
                    BinaryOp::Mul => x * y,
                    BinaryOp::Div => {
                        if y == 0.0 {
                            return Err(Error::Domain("division by zero".into()));
                        }
                        x / y
                    }
                    BinaryOp::Pow => checked_pow(x, y)?,
                }
            }
        };
        if !v.is_finite() {
            return Err(Error::Domain(format!("non-finite result in `{e}`")));
        }
        if shared {
            self.cache.insert(e.key(), (e.clone(), v));
        }
        Ok(v)
    }
}

// ---------------------------------------------------------------------------
// printing

const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match &*e.0 {
        Node::Const(c) if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) => PREC_NEG,
        Node::Const(_) | Node::Var(_) => PREC_ATOM,
        Node::Unary(UnaryOp::Neg, _) => PREC_NEG,
        Node::Unary(..) => PREC_ATOM,
        Node::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => PREC_ADD,
        Node::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => PREC_MUL,
        Node::Binary(BinaryOp::Pow, ..) => PREC_POW,
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            Node::Const(c) => write!(f, "{c}"),
            Node::Var(name) => f.write_str(name),
            Node::Unary(UnaryOp::Neg, a) => {
                f.write_str("-")?;
                write_operand(f, a, precedence(a) < PREC_NEG)
            }
            Node::Unary(op, a) => {
                let name = match op {
                    UnaryOp::Sin => "sin",
                    UnaryOp::Cos => "cos",
                    UnaryOp::Exp => "exp",
                    UnaryOp::Sqrt => "sqrt",
                    UnaryOp::Ln => "ln",
                    UnaryOp::Neg => unreachable!(),
                };
                write!(f, "{name}({a})")
            }
            Node::Binary(op, a, b) => {
                let (sym, prec) = match op {
                    BinaryOp::Add => (" + ", PREC_ADD),
                    BinaryOp::Sub => (" - ", PREC_ADD),
                    BinaryOp::Mul => (" * ", PREC_MUL),
                    BinaryOp::Div => (" / ", PREC_MUL),
                    BinaryOp::Pow => ("^", PREC_POW),
                };
                if *op == BinaryOp::Pow {
                    write_operand(f, a, precedence(a) <= PREC_POW)?;
                    f.write_str(sym)?;
                    write_operand(f, b, precedence(b) < PREC_NEG)
                } else {
                    write_operand(f, a, precedence(a) < prec)?;
                    f.write_str(sym)?;
                    write_operand(f, b, precedence(b) <= prec)
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// parsing

/// Parse with the default vocabulary (`t`, `x1`, `x2`, `x3`).
pub fn parse(text: &str) -> Result<Expr> {
    parse_with(text, &[TIME, COORDS[0], COORDS[1], COORDS[2]])
}

/// Parse, accepting exactly the listed variable names.
pub fn parse_with(text: &str, variables: &[&str]) -> Result<Expr> {
    let tokens = tokenize(text)?;
    let mut p = Parser {
        tokens,
        idx: 0,
        variables,
        end: text.chars().count(),
    };
    let e = p.expr()?;
    match p.peek() {
        None => Ok(e),
        Some((tok, pos)) => Err(Error::Syntax {
            pos,
            message: format!("unexpected {tok}"),
        }),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Num(v) => write!(f, "number {v}"),
            Token::Ident(s) => write!(f, "identifier `{s}`"),
            Token::Op(c) => write!(f, "`{c}`"),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(Token, usize)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
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
            let v = s.parse::<f64>().map_err(|_| Error::Syntax {
                pos: start,
                message: format!("malformed number `{s}`"),
            })?;
            out.push((Token::Num(v), start));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Token::Ident(chars[start..i].iter().collect()), start));
        } else if "+-*/^(),".contains(c) {
            out.push((Token::Op(c), i));
            i += 1;
        } else {
            return Err(Error::Syntax {
                pos: i,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(Token, usize)>,
    idx: usize,
    variables: &'a [&'a str],
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<(Token, usize)> {
        self.tokens.get(self.idx).cloned()
    }

    fn peek_op(&self) -> Option<char> {
        match self.tokens.get(self.idx) {
            Some((Token::Op(c), _)) => Some(*c),
            _ => None,
        }
    }

    fn expect(&mut self, op: char) -> Result<()> {
        match self.peek() {
            Some((Token::Op(c), _)) if c == op => {
                self.idx += 1;
                Ok(())
            }
            Some((tok, pos)) => Err(Error::Syntax {
                pos,
                message: format!("expected `{op}`, found {tok}"),
            }),
            None => Err(Error::Syntax {
                pos: self.end,
                message: format!("expected `{op}`, found end of input"),
            }),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.idx += 1;
            let rhs = self.term()?;
            lhs = if op == '+' { lhs + rhs } else { lhs - rhs };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.idx += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' { lhs * rhs } else { lhs / rhs };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek_op() == Some('-') {
            self.idx += 1;
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek_op() == Some('^') {
            self.idx += 1;
            let exponent = self.unary()?;
            return Ok(Expr::binary(BinaryOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let Some((tok, pos)) = self.peek() else {
            return Err(Error::Syntax {
                pos: self.end,
                message: "unexpected end of input".into(),
            });
        };
        self.idx += 1;
        match tok {
            Token::Num(v) => Ok(Expr::constant(v)),
            Token::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Token::Ident(name) => {
                let func = match name.as_str() {
                    "sin" => Some(UnaryOp::Sin),
                    "cos" => Some(UnaryOp::Cos),
                    "exp" => Some(UnaryOp::Exp),
                    "sqrt" => Some(UnaryOp::Sqrt),
                    "ln" | "log" => Some(UnaryOp::Ln),
                    _ => None,
                };
                if let Some(op) = func {
                    self.expect('(')?;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(Expr::unary(op, arg));
                }
                if name == "pi" {
                    return Ok(Expr::constant(std::f64::consts::PI));
                }
                let canonical = match name.as_str() {
                    "tau" | "τ" if self.variables.contains(&TIME) => TIME,
                    other => other,
                };
                if self.variables.contains(&canonical) {
                    Ok(Expr::var(canonical))
                } else {
                    Err(Error::UnknownIdentifier { name, pos })
                }
            }
            Token::Op(c) => Err(Error::Syntax {
                pos,
                message: format!("unexpected `{c}`"),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(pairs: &[(&str, f64)]) -> Binding {
        pairs.iter().fold(Binding::new(), |b, &(n, v)| b.with(n, v))
    }

    #[test]
    fn parse_rejects_undeclared_identifier() {
        let err = parse("sin(x1)*a").unwrap_err();
        assert_eq!(
            err,
            Error::UnknownIdentifier {
                name: "a".into(),
                pos: 8
            }
        );
    }

    #[test]
    fn parse_reports_syntax_position() {
        match parse("x1 + * 2") {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("expected syntax error, got {other:?}"),
        }
        assert!(matches!(parse("sin(x1"), Err(Error::Syntax { .. })));
        assert!(matches!(parse(""), Err(Error::Syntax { .. })));
        assert!(matches!(parse("x1 $ 2"), Err(Error::Syntax { pos: 3, .. })));
    }

    #[test]
    fn parse_and_eval_basics() {
        let e = parse("x1^2 + 1").unwrap();
        assert_eq!(e.eval(&at(&[("x1", 2.0)])).unwrap(), 5.0);
        let e = parse("exp(0.3*t)").unwrap();
        assert_eq!(e.eval(&at(&[("t", 0.0)])).unwrap(), 1.0);
        let e = parse("exp(0.3*tau)").unwrap();
        assert!(e.depends_on("t"));
    }

    #[test]
    fn precedence_and_associativity() {
        let b = at(&[("x1", 3.0), ("x2", 2.0)]);
        assert_eq!(parse("-x1^2").unwrap().eval(&b).unwrap(), -9.0);
        assert_eq!(parse("x2^x2^x2").unwrap().eval(&b).unwrap(), 16.0);
        assert_eq!(parse("x1 - x2 - 1").unwrap().eval(&b).unwrap(), 0.0);
        assert_eq!(parse("x1 / x2 / 2").unwrap().eval(&b).unwrap(), 0.75);
        assert_eq!(parse("2*x1^-1").unwrap().eval(&b).unwrap(), 2.0 / 3.0);
        assert_eq!(parse("1.5e1 + .5").unwrap().eval(&b).unwrap(), 15.5);
    }

    #[test]
    fn eval_examples() {
        assert_eq!(parse("sin(x1)").unwrap().eval(&at(&[("x1", 0.0)])).unwrap(), 0.0);
        let err = parse("x1/x2").unwrap().eval(&at(&[("x1", 1.0), ("x2", 0.0)]));
        assert!(matches!(err, Err(Error::Domain(_))));
        let v = parse("(x1+x2)^3").unwrap().eval(&at(&[("x1", 1.0), ("x2", 2.0)])).unwrap();
        assert_eq!(v, 27.0);
    }

    #[test]
    fn eval_errors() {
        let e = parse("x1 + x2").unwrap();
        assert_eq!(
            e.eval(&at(&[("x1", 1.0)])),
            Err(Error::UnboundVariable("x2".into()))
        );
        assert!(matches!(
            parse("sqrt(x1)").unwrap().eval(&at(&[("x1", -1.0)])),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            parse("ln(x1)").unwrap().eval(&at(&[("x1", 0.0)])),
            Err(Error::Domain(_))
        ));
        assert_eq!(parse("sqrt(x1)").unwrap().eval(&at(&[("x1", 0.0)])), Ok(0.0));
    }

    #[test]
    fn diff_examples() {
        let x = Expr::var("x1");
        let d = (&x * &x).diff("x1");
        assert_eq!(d.eval(&at(&[("x1", 3.0)])).unwrap(), 6.0);
        assert!(Expr::constant(4.2).diff("x1").is_zero());
        assert!(parse("sin(x2) * t").unwrap().diff("x1").is_zero());

        let e = parse("sin(x1)*exp(x2)").unwrap();
        let d = e.diff("x1");
        let b = at(&[("x1", 0.7), ("x2", 0.2)]);
        let h = 1e-5;
        let fd = (e.eval(&b.shifted("x1", h)).unwrap() - e.eval(&b.shifted("x1", -h)).unwrap())
            / (2.0 * h);
        assert!((d.eval(&b).unwrap() - fd).abs() < 1e-8);
    }

    #[test]
    fn structural_simplification() {
        let x = Expr::var("x1");
        assert_eq!(Expr::zero() * &x, Expr::zero());
        assert_eq!(Expr::one() * &x, x);
        assert_eq!(&x + Expr::zero(), x);
        assert_eq!(-(-x.clone()), x);
        assert_eq!(parse("2*3 + 1").unwrap().as_constant(), Some(7.0));
        // folding never hides a domain error
        assert!(parse("ln(0)").unwrap().as_constant().is_none());
        assert!(parse("1/0").unwrap().eval(&Binding::new()).is_err());
    }

    #[test]
    fn print_round_trip_examples() {
        for text in [
            "x1^2 + 1",
            "-x1^2",
            "(-x1)^2",
            "2^-x1",
            "x1 - (x2 - t)",
            "x1 / (x2 * t)",
            "-(x1 * x2)",
            "exp(-0.5 * t) * sin(x1)^2",
            "x1^(x2^2)",
            "(x1^x2)^2",
            "2 - -3 * x1",
        ] {
            let e = parse(text).unwrap();
            let printed = e.to_string();
            let again = parse(&printed).unwrap();
            assert_eq!(again.to_string(), printed, "{text}");
            let b = at(&[("x1", 1.3), ("x2", 0.4), ("t", 0.9)]);
            assert_eq!(e.eval(&b).unwrap(), again.eval(&b).unwrap(), "{text}");
        }
    }

    #[test]
    fn substitute_folds() {
        let e = parse("exp(2*t) * x1").unwrap();
        let s = e.substitute("t", &Expr::zero());
        assert_eq!(s, Expr::var("x1"));
        assert!(!s.depends_on("t"));
    }

    #[test]
    fn general_power_derivative() {
        let e = parse("x1^x2").unwrap();
        let b = at(&[("x1", 1.7), ("x2", 0.6)]);
        let dx = e.diff("x1").eval(&b).unwrap();
        let dy = e.diff("x2").eval(&b).unwrap();
        assert!((dx - 0.6 * 1.7f64.powf(-0.4)).abs() < 1e-14);
        assert!((dy - 1.7f64.powf(0.6) * 1.7f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn shared_subtrees_stay_small() {
        let mut e = Expr::var("x1");
        for _ in 0..40 {
            e = &e * &e + e.sin();
        }
        assert!(e.node_count() < 200);
        let d = e.diff("x1");
        assert!(d.node_count() < 1000);
        assert!(e.eval(&at(&[("x1", 0.01)])).is_ok());
    }
}

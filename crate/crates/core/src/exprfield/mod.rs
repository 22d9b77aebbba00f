//! Scalar expressions over (x, y, z) and their exact differentiation.
//!
//! Grammar (whitespace insensitive):
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := unary (("*" | "/") unary)*
//! unary  := "-" unary | power
//! power  := atom ("^" unary)?          -- right associative
//! atom   := number | ident | ident "(" expr ")" | "(" expr ")"
//! ```
//!
//! Variables are `x`, `y`, `z`; the synonyms `u`, `q` (for `x`) and `v`, `p`
//! (for `y`) exist so surface patches read naturally. Any other identifier
//! must be a declared parameter or a function name: `sin`, `cos`, `tan`,
//! `exp`, `log`, `sqrt`, `arccos`, `arcsin`, `abs` (with `ln`, `acos`, `asin`
//! accepted as aliases). `^` with a constant integer exponent is evaluated by
//! repeated multiplication and so stays valid for non-positive bases.

mod field;
mod jet;
mod parser;

pub use field::{FieldDef, FieldJet, GradField, Pencil, ScalarField, VectorField, VectorJet};
pub use jet::Jet2;
pub use parser::{parse_field, parse_scalar, validate_params};

use std::collections::BTreeMap;
use std::fmt;

use crate::error::xyz;
use crate::{Error, Result, R3};

/// Named constants available to an expression.
pub type Params = BTreeMap<String, f64>;

/// Spatial coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X = 0,
    Y = 1,
    Z = 2,
}

impl Axis {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn unit(self) -> R3 {
        let mut e = R3::zeros();
        e[self.index()] = 1.0;
        e
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Acos,
    Asin,
    Abs,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Acos => "arccos",
            Func::Asin => "arcsin",
            Func::Abs => "abs",
        }
    }
}

/// Expression tree. Structure is preserved exactly by `Display` followed by
/// parsing, so trees can be serialized into configs and reports.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Axis),
    Param(String),
    Neg(Box<Expr>),
    Unary(Func, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    /// Evaluate the plain value. Domain rules match the jet evaluation so a
    /// point is either valid for both or neither.
    pub fn value(&self, x: &R3, params: &Params) -> Result<f64> {
        let v = self.value_inner(x, params)?;
        if !v.is_finite() {
            return Err(self.domain_error(x, "non-finite result"));
        }
        Ok(v)
    }

    fn value_inner(&self, x: &R3, params: &Params) -> Result<f64> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var(a) => x[a.index()],
            Expr::Param(name) => self.param_value(name, x, params)?,
            Expr::Neg(e) => -e.value_inner(x, params)?,
            Expr::Unary(func, e) => {
                let u = e.value_inner(x, params)?;
                match func {
                    Func::Sin => u.sin(),
                    Func::Cos => u.cos(),
                    Func::Tan => u.tan(),
                    Func::Exp => u.exp(),
                    Func::Log => {
                        if u <= 0.0 {
                            return Err(self.domain_error(x, "log of a non-positive value"));
                        }
                        u.ln()
                    }
                    Func::Sqrt => {
                        if u < 0.0 {
                            return Err(self.domain_error(x, "sqrt of a negative value"));
                        }
                        u.sqrt()
                    }
                    Func::Acos => {
                        if u.abs() > 1.0 {
                            return Err(self.domain_error(x, "arccos argument outside [-1, 1]"));
                        }
                        u.acos()
                    }
                    Func::Asin => {
                        if u.abs() > 1.0 {
                            return Err(self.domain_error(x, "arcsin argument outside [-1, 1]"));
                        }
                        u.asin()
                    }
                    Func::Abs => u.abs(),
                }
            }
            Expr::Binary(op, a, b) => {
                let (a, b) = (a.value_inner(x, params)?, b.value_inner(x, params)?);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(self.domain_error(x, "division by zero"));
                        }
                        a / b
                    }
                    BinOp::Pow => {
                        let p = a.powf(b);
                        if !p.is_finite() {
                            return Err(self.domain_error(x, "power outside the real domain"));
                        }
                        p
                    }
                }
            }
        })
    }

    /// Evaluate value, gradient and Hessian at a point.
    pub fn jet(&self, x: &R3, params: &Params) -> Result<Jet2> {
        let j = self.jet_inner(x, params)?;
        if !j.is_finite() {
            return Err(self.domain_error(x, "non-finite result"));
        }
        Ok(j)
    }

    fn jet_inner(&self, x: &R3, params: &Params) -> Result<Jet2> {
        Ok(match self {
            Expr::Const(c) => Jet2::constant(*c),
            Expr::Var(a) => Jet2::variable(x[a.index()], a.index()),
            Expr::Param(name) => Jet2::constant(self.param_value(name, x, params)?),
            Expr::Neg(e) => -e.jet_inner(x, params)?,
            Expr::Unary(func, e) => {
                let u = e.jet_inner(x, params)?;
                match func {
                    Func::Sin => u.sin(),
                    Func::Cos => u.cos(),
                    Func::Tan => u.tan(),
                    Func::Exp => u.exp(),
                    Func::Log => u.ln().map_err(|r| self.domain_error(x, r))?,
                    Func::Sqrt => u.sqrt().map_err(|r| self.domain_error(x, r))?,
                    Func::Acos => u.acos().map_err(|r| self.domain_error(x, r))?,
                    Func::Asin => u.asin().map_err(|r| self.domain_error(x, r))?,
                    Func::Abs => u.abs().map_err(|r| self.domain_error(x, r))?,
                }
            }
            Expr::Binary(op, a, b) => match op {
                BinOp::Add => a.jet_inner(x, params)? + b.jet_inner(x, params)?,
                BinOp::Sub => a.jet_inner(x, params)? - b.jet_inner(x, params)?,
                BinOp::Mul => a.jet_inner(x, params)? * b.jet_inner(x, params)?,
                BinOp::Div => {
                    let den = b.jet_inner(x, params)?;
                    let inv = den.recip().map_err(|r| self.domain_error(x, r))?;
                    a.jet_inner(x, params)? * inv
                }
                BinOp::Pow => {
                    let base = a.jet_inner(x, params)?;
                    match const_int_exponent(b) {
                        Some(k) => base.powi(k).map_err(|r| self.domain_error(x, r))?,
                        None => {
                            let e = b.jet_inner(x, params)?;
                            base.pow(e).map_err(|r| self.domain_error(x, r))?
                        }
                    }
                }
            },
        })
    }

    fn param_value(&self, name: &str, x: &R3, params: &Params) -> Result<f64> {
        params
            .get(name)
            .copied()
            .ok_or_else(|| self.domain_error(x, "undefined parameter"))
    }

    fn domain_error(&self, x: &R3, reason: &str) -> Error {
        Error::Domain {
            expr: self.to_string(),
            at: xyz(x),
            reason: reason.to_string(),
        }
    }

    /// Exact symbolic partial derivative. Fails only for `abs`, whose
    /// derivative leaves the grammar.
    pub fn derivative(&self, axis: Axis) -> Result<Expr> {
        Ok(match self {
            Expr::Const(_) | Expr::Param(_) => Expr::Const(0.0),
            Expr::Var(a) => Expr::Const(if *a == axis { 1.0 } else { 0.0 }),
            Expr::Neg(e) => neg(e.derivative(axis)?),
            Expr::Unary(func, e) => {
                let de = e.derivative(axis)?;
                let a = e.as_ref().clone();
                match func {
                    Func::Sin => mul(Expr::Unary(Func::Cos, e.clone()), de),
                    Func::Cos => neg(mul(Expr::Unary(Func::Sin, e.clone()), de)),
                    Func::Tan => {
                        let sec2 = add(
                            Expr::Const(1.0),
                            pow(Expr::Unary(Func::Tan, e.clone()), 2.0),
                        );
                        mul(sec2, de)
                    }
                    Func::Exp => mul(Expr::Unary(Func::Exp, e.clone()), de),
                    Func::Log => div(de, a),
                    Func::Sqrt => div(de, mul(Expr::Const(2.0), Expr::Unary(Func::Sqrt, e.clone()))),
                    Func::Acos => neg(div(de, sqrt_one_minus_sq(a))),
                    Func::Asin => div(de, sqrt_one_minus_sq(a)),
                    Func::Abs => {
                        return Err(Error::UnsupportedDerivative {
                            function: "abs".to_string(),
                        })
                    }
                }
            }
            Expr::Binary(op, a, b) => {
                let (da, db) = (a.derivative(axis)?, b.derivative(axis)?);
                let (a, b) = (a.as_ref().clone(), b.as_ref().clone());
                match op {
                    BinOp::Add => add(da, db),
                    BinOp::Sub => sub(da, db),
                    BinOp::Mul => add(mul(da, b), mul(a, db)),
                    BinOp::Div => div(sub(mul(da, b.clone()), mul(a, db)), mul(b.clone(), b)),
                    BinOp::Pow => match const_value(&b) {
                        Some(k) => {
                            // d(a^k) = k a^(k-1) da
                            mul(mul(Expr::Const(k), pow(a, k - 1.0)), da)
                        }
                        None => {
                            // d(a^b) = a^b (db log a + b da / a)
                            let val = Expr::Binary(
                                BinOp::Pow,
                                Box::new(a.clone()),
                                Box::new(b.clone()),
                            );
                            let inner = add(
                                mul(db, Expr::Unary(Func::Log, Box::new(a.clone()))),
                                div(mul(b, da), a),
                            );
                            mul(val, inner)
                        }
                    },
                }
            }
        })
    }
}

/// Constant integer exponent small enough for repeated multiplication.
fn const_int_exponent(e: &Expr) -> Option<i32> {
    match const_value(e) {
        Some(k) if k.fract() == 0.0 && k.abs() <= 64.0 => Some(k as i32),
        _ => None,
    }
}

fn const_value(e: &Expr) -> Option<f64> {
    match e {
        Expr::Const(c) => Some(*c),
        Expr::Neg(inner) => const_value(inner).map(|c| -c),
        _ => None,
    }
}

fn is_const(e: &Expr, c: f64) -> bool {
    matches!(e, Expr::Const(v) if *v == c)
}

// Smart constructors used by `derivative` and by code that assembles
// derived fields symbolically; they fold additive and multiplicative
// identities so derivative trees stay readable.

pub(crate) fn add(a: Expr, b: Expr) -> Expr {
    if is_const(&a, 0.0) {
        return b;
    }
    if is_const(&b, 0.0) {
        return a;
    }
    Expr::Binary(BinOp::Add, Box::new(a), Box::new(b))
}

pub(crate) fn sub(a: Expr, b: Expr) -> Expr {
    if is_const(&b, 0.0) {
        return a;
    }
    if is_const(&a, 0.0) {
        return neg(b);
    }
    Expr::Binary(BinOp::Sub, Box::new(a), Box::new(b))
}

pub(crate) fn mul(a: Expr, b: Expr) -> Expr {
    if is_const(&a, 0.0) || is_const(&b, 0.0) {
        return Expr::Const(0.0);
    }
    if is_const(&a, 1.0) {
        return b;
    }
    if is_const(&b, 1.0) {
        return a;
    }
    Expr::Binary(BinOp::Mul, Box::new(a), Box::new(b))
}

fn div(a: Expr, b: Expr) -> Expr {
    if is_const(&a, 0.0) {
        return Expr::Const(0.0);
    }
    if is_const(&b, 1.0) {
        return a;
    }
    Expr::Binary(BinOp::Div, Box::new(a), Box::new(b))
}

pub(crate) fn neg(a: Expr) -> Expr {
    if is_const(&a, 0.0) {
        return a;
    }
    Expr::Neg(Box::new(a))
}

fn pow(a: Expr, k: f64) -> Expr {
    if k == 0.0 {
        return Expr::Const(1.0);
    }
    if k == 1.0 {
        return a;
    }
    Expr::Binary(BinOp::Pow, Box::new(a), Box::new(Expr::Const(k)))
}

fn sqrt_one_minus_sq(a: Expr) -> Expr {
    Expr::Unary(
        Func::Sqrt,
        Box::new(sub(Expr::Const(1.0), pow(a, 2.0))),
    )
}

// Display with minimal parentheses. Precedence: additive 1, multiplicative
// and unary minus 2, power 3, atoms 4. Reparsing the output reproduces the
// tree structurally.

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
        Expr::Binary(BinOp::Mul | BinOp::Div, ..) | Expr::Neg(_) => 2,
        Expr::Binary(BinOp::Pow, ..) => 3,
        _ => 4,
    }
}

fn fmt_prec(e: &Expr, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if prec(e) < min {
        write!(f, "(")?;
        fmt_node(e, f)?;
        write!(f, ")")
    } else {
        fmt_node(e, f)
    }
}

fn fmt_node(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Expr::Const(c) => write!(f, "{c}"),
        Expr::Var(Axis::X) => write!(f, "x"),
        Expr::Var(Axis::Y) => write!(f, "y"),
        Expr::Var(Axis::Z) => write!(f, "z"),
        Expr::Param(name) => write!(f, "{name}"),
        Expr::Neg(inner) => {
            write!(f, "-")?;
            fmt_prec(inner, 3, f)
        }
        Expr::Unary(func, inner) => {
            write!(f, "{}(", func.name())?;
            fmt_node(inner, f)?;
            write!(f, ")")
        }
        Expr::Binary(op, a, b) => match op {
            BinOp::Add => {
                fmt_prec(a, 1, f)?;
                write!(f, "+")?;
                fmt_prec(b, 2, f)
            }
            BinOp::Sub => {
                fmt_prec(a, 1, f)?;
                write!(f, "-")?;
                fmt_prec(b, 2, f)
            }
            BinOp::Mul => {
                fmt_prec(a, 2, f)?;
                write!(f, "*")?;
                fmt_prec(b, 3, f)
            }
            BinOp::Div => {
                fmt_prec(a, 2, f)?;
                write!(f, "/")?;
                fmt_prec(b, 3, f)
            }
            BinOp::Pow => {
                fmt_prec(a, 4, f)?;
                write!(f, "^")?;
                fmt_prec(b, 3, f)
            }
        },
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_node(self, f)
    }
}

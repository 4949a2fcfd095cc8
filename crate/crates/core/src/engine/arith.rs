//! Arithmetic evaluation for `is/2` and the comparison builtins.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use super::bindings::Bindings;
use crate::term::Term;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ArithError {
    #[error("arithmetic: unbound variable {0}")]
    Unbound(String),
    #[error("arithmetic: not a number or evaluable expression: {0}")]
    NotNumeric(String),
    #[error("arithmetic: division by zero in {0}")]
    DivisionByZero(String),
    #[error("arithmetic: {op} expects integers, got {expr}")]
    IntegerExpected { op: &'static str, expr: String },
    #[error("arithmetic: result of {0} is not a finite float")]
    NonFinite(String),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Number {
    Int(BigInt),
    Float(f64),
}

impl Number {
    pub fn to_f64(&self) -> f64 {
        match self {
            Number::Int(i) => i.to_f64().unwrap_or(f64::NAN),
            Number::Float(f) => *f,
        }
    }

    pub fn into_term(self) -> Term {
        match self {
            Number::Int(i) => Term::Int(i),
            Number::Float(f) => Term::Float(f),
        }
    }

    pub fn from_term(t: &Term) -> Option<Number> {
        match t {
            Term::Int(i) => Some(Number::Int(i.clone())),
            Term::Float(f) => Some(Number::Float(*f)),
            _ => None,
        }
    }

    /// Numeric comparison; mixed operands compare as floats.
    pub fn compare(&self, other: &Number) -> Ordering {
        match (self, other) {
            (Number::Int(a), Number::Int(b)) => a.cmp(b),
            _ => self.to_f64().partial_cmp(&other.to_f64()).unwrap_or(Ordering::Equal),
        }
    }
}

fn finite(v: f64, expr: &Term) -> Result<Number, ArithError> {
    if v.is_finite() {
        Ok(Number::Float(v))
    } else {
        Err(ArithError::NonFinite(expr.to_string()))
    }
}

/// Evaluates a ground arithmetic expression over `+ - * / // mod` and unary
/// `-`. Integer operands stay exact; `/` on integers yields an integer only
/// when the division is exact.
pub fn eval_arith(expr: &Term, env: &Bindings) -> Result<Number, ArithError> {
    let t = env.deref(expr);
    match t {
        Term::Int(i) => Ok(Number::Int(i.clone())),
        Term::Float(f) => Ok(Number::Float(*f)),
        Term::Var(_) => Err(ArithError::Unbound(env.resolve(expr).to_string())),
        Term::Compound(c) => match (&**c.functor(), c.args()) {
            ("-", [a]) => match eval_arith(a, env)? {
                Number::Int(i) => Ok(Number::Int(-i)),
                Number::Float(f) => Ok(Number::Float(-f)),
            },
            ("+", [a]) => eval_arith(a, env),
            (op @ ("+" | "-" | "*" | "/" | "//" | "mod"), [a, b]) => {
                let x = eval_arith(a, env)?;
                let y = eval_arith(b, env)?;
                binary(op, x, y, &env.resolve(t))
            }
            _ => Err(ArithError::NotNumeric(env.resolve(t).to_string())),
        },
        Term::Atom(_) => Err(ArithError::NotNumeric(t.to_string())),
    }
}

fn binary(op: &str, x: Number, y: Number, expr: &Term) -> Result<Number, ArithError> {
    use Number::Int as I;
    let int_only = |op: &'static str| ArithError::IntegerExpected { op, expr: expr.to_string() };
    match (op, x, y) {
        ("+", I(a), I(b)) => Ok(I(a + b)),
        ("-", I(a), I(b)) => Ok(I(a - b)),
        ("*", I(a), I(b)) => Ok(I(a * b)),
        ("/", I(a), I(b)) => {
            if b.is_zero() {
                return Err(ArithError::DivisionByZero(expr.to_string()));
            }
            let (q, r) = a.div_rem(&b);
            if r.is_zero() {
                Ok(I(q))
            } else {
                finite(a.to_f64().unwrap_or(f64::NAN) / b.to_f64().unwrap_or(f64::NAN), expr)
            }
        }
        ("//", I(a), I(b)) => {
            if b.is_zero() {
                return Err(ArithError::DivisionByZero(expr.to_string()));
            }
            // truncates toward zero
            Ok(I(a / b))
        }
        ("mod", I(a), I(b)) => {
            if b.is_zero() {
                return Err(ArithError::DivisionByZero(expr.to_string()));
            }
            // result takes the sign of the divisor
            Ok(I(a.mod_floor(&b)))
        }
        ("//", ..) => Err(int_only("//")),
        ("mod", ..) => Err(int_only("mod")),
        (op, x, y) => {
            let (a, b) = (x.to_f64(), y.to_f64());
            if !a.is_finite() || !b.is_finite() {
                return Err(ArithError::NonFinite(expr.to_string()));
            }
            let v = match op {
                "+" => a + b,
                "-" => a - b,
                "*" => a * b,
                "/" => {
                    if b == 0.0 {
                        return Err(ArithError::DivisionByZero(expr.to_string()));
                    }
                    a / b
                }
                _ => unreachable!("operator {op} filtered by caller"),
            };
            finite(v, expr)
        }
    }
}

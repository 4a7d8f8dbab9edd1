use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use super::{BinOp, Expr, Func};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum EvalErrorKind {
    #[error("division by zero")]
    DivisionByZero,
    #[error("square root of a negative number")]
    SqrtNegative,
    #[error("non-finite value")]
    NonFinite,
    #[error("function has no exact rational value")]
    NotRational,
    #[error("point has the wrong number of coordinates")]
    Arity,
}

/// Evaluation failure with the offending subexpression.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind}")]
pub struct EvalError {
    pub kind: EvalErrorKind,
    pub subexpr: Expr,
}

impl EvalError {
    fn at(kind: EvalErrorKind, e: &Expr) -> Self {
        EvalError {
            kind,
            subexpr: e.clone(),
        }
    }

    pub fn render(&self, names: &[String]) -> String {
        format!("{} in `{}`", self.kind, self.subexpr.display(names))
    }
}

pub(crate) fn hstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// Floating evaluation at `point` (one value per coordinate).
pub fn eval_float(e: &Expr, point: &[f64]) -> Result<f64, EvalError> {
    if e.max_var().is_some_and(|v| v >= point.len()) {
        return Err(EvalError::at(EvalErrorKind::Arity, e));
    }
    let v = float_rec(e, point)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::at(EvalErrorKind::NonFinite, e))
    }
}

fn float_rec(e: &Expr, p: &[f64]) -> Result<f64, EvalError> {
    Ok(match e {
        Expr::Var(i) => p[*i],
        Expr::Num(lit) => lit.approx,
        Expr::Neg(a) => -float_rec(a, p)?,
        Expr::Bin(op, a, b) => {
            let x = float_rec(a, p)?;
            let y = float_rec(b, p)?;
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => {
                    if y == 0.0 {
                        return Err(EvalError::at(EvalErrorKind::DivisionByZero, e));
                    }
                    x / y
                }
            }
        }
        Expr::Pow(a, k) => {
            let x = float_rec(a, p)?;
            match i32::try_from(*k) {
                Ok(k) => x.powi(k),
                Err(_) => x.powf(*k as f64),
            }
        }
        Expr::Call(f, a) => {
            let x = float_rec(a, p)?;
            match f {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Exp => x.exp(),
                Func::Sqrt => {
                    if x < 0.0 {
                        return Err(EvalError::at(EvalErrorKind::SqrtNegative, e));
                    }
                    x.sqrt()
                }
                Func::Abs => x.abs(),
                Func::Hstep => hstep(x),
            }
        }
    })
}

/// Exact evaluation over the rationals. Defined for the rational-function
/// fragment (`+ - * /`, `^`, `abs`); other builtins yield `NotRational`.
pub fn eval_exact(e: &Expr, point: &[BigRational]) -> Result<BigRational, EvalError> {
    if e.max_var().is_some_and(|v| v >= point.len()) {
        return Err(EvalError::at(EvalErrorKind::Arity, e));
    }
    exact_rec(e, point)
}

fn exact_rec(e: &Expr, p: &[BigRational]) -> Result<BigRational, EvalError> {
    Ok(match e {
        Expr::Var(i) => p[*i].clone(),
        Expr::Num(lit) => lit.value.clone(),
        Expr::Neg(a) => -exact_rec(a, p)?,
        Expr::Bin(op, a, b) => {
            let x = exact_rec(a, p)?;
            let y = exact_rec(b, p)?;
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => {
                    if y.is_zero() {
                        return Err(EvalError::at(EvalErrorKind::DivisionByZero, e));
                    }
                    x / y
                }
            }
        }
        Expr::Pow(a, k) => {
            let x = exact_rec(a, p)?;
            let mut acc = BigRational::one();
            for _ in 0..*k {
                acc *= &x;
            }
            acc
        }
        Expr::Call(Func::Abs, a) => {
            let x = exact_rec(a, p)?;
            if x < BigRational::zero() {
                -x
            } else {
                x
            }
        }
        Expr::Call(Func::Hstep, a) => {
            // zero branch is exact
            let x = exact_rec(a, p)?;
            if x <= BigRational::zero() {
                BigRational::zero()
            } else {
                return Err(EvalError::at(EvalErrorKind::NotRational, e));
            }
        }
        Expr::Call(_, _) => return Err(EvalError::at(EvalErrorKind::NotRational, e)),
    })
}

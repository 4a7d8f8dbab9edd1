//! Scalar coordinate expressions.
//!
//! Vector-field coefficients and function components are written in a small
//! expression language. The grammar, with the usual precedence (`^` binds
//! tighter than unary minus, which binds tighter than `*` `/`, which bind
//! tighter than `+` `-`):
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = "-" unary | power ;
//! power   = primary [ "^" integer ] ;
//! primary = number | ident | func "(" expr ")" | "(" expr ")" ;
//! func    = "sin" | "cos" | "exp" | "sqrt" | "abs" | "hstep" ;
//! number  = digit { digit } [ "." { digit } ] | "." digit { digit } ;
//! integer = digit { digit } ;
//! ident   = letter { letter | digit | "_" } ;   (* a declared coordinate *)
//! ```
//!
//! Exponents are literal non-negative integers; chained powers need
//! parentheses (`(x^2)^3`). Decimal literals are converted to exact
//! rationals, and a quotient of two literals (`1/2`) folds into a single
//! rational literal. `hstep(t)` is `0` for `t <= 0` and `exp(-1/t)` for
//! `t > 0`.

mod eval;
mod parser;
mod poly;

use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;

pub use eval::{EvalError, EvalErrorKind};
pub use parser::{parse, validate_coords, ParseError, ParseErrorKind};
pub use poly::PolyForm;

/// Builtin scalar functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
    Abs,
    Hstep,
}

impl Func {
    pub const ALL: [Func; 6] = [
        Func::Sin,
        Func::Cos,
        Func::Exp,
        Func::Sqrt,
        Func::Abs,
        Func::Hstep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Hstep => "hstep",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

/// Expression tree. Variables are indices into the coordinate list the
/// expression was parsed against.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Var(usize),
    Num(Literal),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Call(Func, Box<Expr>),
}

/// A rational literal together with its nearest `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Literal {
    pub value: BigRational,
    pub approx: f64,
}

impl Literal {
    pub fn new(value: BigRational) -> Self {
        let approx = crate::rational::to_f64(&value);
        Literal { value, approx }
    }
}

impl Expr {
    pub fn num(value: BigRational) -> Expr {
        Expr::Num(Literal::new(value))
    }

    pub fn int(value: i64) -> Expr {
        Expr::num(BigRational::from_integer(value.into()))
    }

    /// Largest variable index used, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Var(i) => Some(*i),
            Expr::Num(_) => None,
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Call(_, e) => e.max_var(),
            Expr::Bin(_, a, b) => match (a.max_var(), b.max_var()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            },
        }
    }

    pub fn is_zero_literal(&self) -> bool {
        matches!(self, Expr::Num(lit) if num_traits::Zero::is_zero(&lit.value))
    }

    /// Renders the expression with the given coordinate names.
    pub fn display<'a>(&'a self, names: &'a [String]) -> ExprDisplay<'a> {
        ExprDisplay { expr: self, names }
    }
}

pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    names: &'a [String],
}

impl ExprDisplay<'_> {
    fn write(&self, f: &mut fmt::Formatter<'_>, e: &Expr, parent: u8) -> fmt::Result {
        match e {
            Expr::Var(i) => match self.names.get(*i) {
                Some(name) => write!(f, "{name}"),
                None => write!(f, "${i}"),
            },
            Expr::Num(lit) => {
                let text = crate::rational::format_rational(&lit.value);
                let needs_parens = text.contains('/') || text.starts_with('-');
                if needs_parens && parent > 0 {
                    write!(f, "({text})")
                } else {
                    write!(f, "{text}")
                }
            }
            Expr::Neg(inner) => {
                if parent > 2 {
                    write!(f, "(")?;
                }
                write!(f, "-")?;
                self.write(f, inner, 3)?;
                if parent > 2 {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Expr::Bin(op, a, b) => {
                let prec = op.precedence();
                let paren = prec < parent;
                if paren {
                    write!(f, "(")?;
                }
                self.write(f, a, prec)?;
                write!(f, " {} ", op.symbol())?;
                // Right operands of - and / need strictly higher precedence.
                self.write(f, b, prec + 1)?;
                if paren {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Expr::Pow(base, k) => {
                if parent > 3 {
                    write!(f, "(")?;
                }
                self.write(f, base, 4)?;
                write!(f, "^{k}")?;
                if parent > 3 {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Expr::Call(func, arg) => {
                write!(f, "{}(", func.name())?;
                self.write(f, arg, 0)?;
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, self.expr, 0)
    }
}

/// A parsed expression bundled with its source text and, when it has one,
/// its exact polynomial form. Shared cheaply between specs.
#[derive(Debug, Clone)]
pub struct Coefficient {
    source: Arc<str>,
    expr: Arc<Expr>,
    poly: Option<Arc<PolyForm>>,
}

impl PartialEq for Coefficient {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source && self.expr == other.expr
    }
}

impl Coefficient {
    pub fn parse(text: &str, coords: &[String]) -> Result<Coefficient, ParseError> {
        let expr = parse(text, coords)?;
        Ok(Coefficient::from_expr(text.to_string(), expr, coords.len()))
    }

    pub fn from_expr(source: String, expr: Expr, nvars: usize) -> Coefficient {
        let poly = PolyForm::from_expr(&expr, nvars).map(Arc::new);
        Coefficient {
            source: source.into(),
            expr: Arc::new(expr),
            poly,
        }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn poly(&self) -> Option<&PolyForm> {
        self.poly.as_deref()
    }

    pub fn is_polynomial(&self) -> bool {
        self.poly.is_some()
    }

    pub fn eval_float(&self, point: &[f64]) -> Result<f64, EvalError> {
        eval::eval_float(&self.expr, point)
    }

    /// Exact value at a rational point. Uses the polynomial form when
    /// available and falls back to rational evaluation of the tree.
    pub fn eval_exact(&self, point: &[BigRational]) -> Result<BigRational, EvalError> {
        match &self.poly {
            Some(p) => Ok(p.eval(point)),
            None => eval::eval_exact(&self.expr, point),
        }
    }
}

pub use eval::{eval_exact, eval_float};

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn display_reparses_to_same_tree() {
        let coords = names(&["x", "y"]);
        for text in [
            "x^2*y - 1/2",
            "-(x + y)^3",
            "x - (y - 1)",
            "x / (y * 2)",
            "sin(x)*hstep(-y)",
            "-x^2",
            "(-x)^2",
            "2 - -3",
        ] {
            let e = parse(text, &coords).unwrap();
            let shown = e.display(&coords).to_string();
            let again = parse(&shown, &coords).unwrap();
            assert_eq!(e, again, "{text} -> {shown}");
        }
    }
}

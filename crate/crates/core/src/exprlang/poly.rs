use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{BinOp, Expr};

/// Multivariate polynomial with exact rational coefficients.
///
/// Terms map exponent vectors (one entry per declared coordinate) to
/// nonzero coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyForm {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, BigRational>,
}

impl PolyForm {
    pub fn zero(nvars: usize) -> Self {
        PolyForm {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: BigRational) -> Self {
        let mut p = PolyForm::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut exps = vec![0; nvars];
        exps[i] = 1;
        let mut p = PolyForm::zero(nvars);
        p.terms.insert(exps, BigRational::one());
        p
    }

    pub fn from_terms(
        nvars: usize,
        terms: impl IntoIterator<Item = (Vec<u32>, BigRational)>,
    ) -> Self {
        let mut p = PolyForm::zero(nvars);
        for (exps, c) in terms {
            assert_eq!(exps.len(), nvars);
            p.add_term(exps, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &BigRational)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// The constant value, if the polynomial has degree zero.
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (e, c) = self.terms.iter().next()?;
                e.iter().all(|&k| k == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    fn add_term(&mut self, exps: Vec<u32>, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(exps).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add(&self, other: &PolyForm) -> PolyForm {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> PolyForm {
        PolyForm {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &PolyForm) -> PolyForm {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &PolyForm) -> PolyForm {
        let mut out = PolyForm::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> PolyForm {
        if c.is_zero() {
            return PolyForm::zero(self.nvars);
        }
        PolyForm {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> PolyForm {
        let mut acc = PolyForm::constant(self.nvars, BigRational::one());
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Converts an expression to polynomial form. Returns `None` unless the
    /// expression uses only coordinates, rational literals, `+ - *`, integer
    /// powers, and division by nonzero constants.
    pub fn from_expr(e: &Expr, nvars: usize) -> Option<PolyForm> {
        if e.max_var().is_some_and(|v| v >= nvars) {
            return None;
        }
        Some(match e {
            Expr::Var(i) => PolyForm::var(nvars, *i),
            Expr::Num(lit) => PolyForm::constant(nvars, lit.value.clone()),
            Expr::Neg(a) => PolyForm::from_expr(a, nvars)?.neg(),
            Expr::Bin(op, a, b) => {
                let pa = PolyForm::from_expr(a, nvars)?;
                let pb = PolyForm::from_expr(b, nvars)?;
                match op {
                    BinOp::Add => pa.add(&pb),
                    BinOp::Sub => pa.sub(&pb),
                    BinOp::Mul => pa.mul(&pb),
                    BinOp::Div => {
                        let c = pb.as_constant()?;
                        if c.is_zero() {
                            return None;
                        }
                        pa.scale(&c.recip())
                    }
                }
            }
            Expr::Pow(a, k) => PolyForm::from_expr(a, nvars)?.pow(*k),
            Expr::Call(_, _) => return None,
        })
    }

    /// Builds an expression tree `c1*x^a*y^b + ...` with the same value.
    pub fn to_expr(&self) -> Expr {
        let mut out: Option<Expr> = None;
        for (exps, c) in &self.terms {
            let mut factors: Vec<Expr> = exps
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| match k {
                    1 => Expr::Var(i),
                    k => Expr::Pow(Box::new(Expr::Var(i)), k),
                })
                .collect();
            let negative = *c < BigRational::zero();
            let mag = if negative { -c.clone() } else { c.clone() };
            if !mag.is_one() || factors.is_empty() {
                factors.insert(0, Expr::num(mag));
            }
            let term = factors
                .into_iter()
                .reduce(|a, b| Expr::Bin(BinOp::Mul, Box::new(a), Box::new(b)))
                .expect("term has at least one factor");
            out = Some(match (out, negative) {
                (None, false) => term,
                (None, true) => Expr::Neg(Box::new(term)),
                (Some(acc), false) => Expr::Bin(BinOp::Add, Box::new(acc), Box::new(term)),
                (Some(acc), true) => Expr::Bin(BinOp::Sub, Box::new(acc), Box::new(term)),
            });
        }
        out.unwrap_or_else(|| Expr::int(0))
    }

    pub fn eval(&self, point: &[BigRational]) -> BigRational {
        let mut total = BigRational::zero();
        for (exps, c) in &self.terms {
            let mut t = c.clone();
            for (x, &k) in point.iter().zip(exps) {
                for _ in 0..k {
                    t *= x;
                }
            }
            total += t;
        }
        total
    }
}

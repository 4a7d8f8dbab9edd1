//! The n-point Lie matrix and the n-point Wronskian.
//!
//! Both are `r x (n * block)` matrices. Row `k` lists the values of the
//! `k`-th generator (or function) at `z_1`, then at `z_2`, and so on; each
//! column block holds the `block` components in declared order.

use nalgebra::DMatrix;
use num_rational::BigRational;
use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;

use crate::actionmodel::{ActionSpec, Backend, FunctionFamily};
use crate::error::{Error, Result};
use crate::exprlang::Coefficient;
use crate::rational::{format_rational, parse_rational, to_f64};

/// `n` points of an `m`-dimensional chart.
#[derive(Debug, Clone, PartialEq)]
pub enum PointTuple {
    Float(Vec<Vec<f64>>),
    Exact(Vec<Vec<BigRational>>),
}

impl PointTuple {
    pub fn order(&self) -> usize {
        match self {
            PointTuple::Float(p) => p.len(),
            PointTuple::Exact(p) => p.len(),
        }
    }

    pub fn backend(&self) -> Backend {
        match self {
            PointTuple::Float(_) => Backend::Float,
            PointTuple::Exact(_) => Backend::Exact,
        }
    }

    fn dims(&self) -> Vec<usize> {
        match self {
            PointTuple::Float(p) => p.iter().map(Vec::len).collect(),
            PointTuple::Exact(p) => p.iter().map(Vec::len).collect(),
        }
    }

    pub fn to_float(&self) -> Vec<Vec<f64>> {
        match self {
            PointTuple::Float(p) => p.clone(),
            PointTuple::Exact(p) => p.iter().map(|pt| pt.iter().map(to_f64).collect()).collect(),
        }
    }

    /// Converts to the requested backend. Floats become the exact rationals
    /// of their shortest decimal representation.
    pub fn to_backend(&self, backend: Backend) -> PointTuple {
        match (self, backend) {
            (PointTuple::Float(p), Backend::Exact) => PointTuple::Exact(
                p.iter()
                    .map(|pt| {
                        pt.iter()
                            .map(|&x| crate::rational::rational_from_f64(x).expect("finite point"))
                            .collect()
                    })
                    .collect(),
            ),
            (PointTuple::Exact(_), Backend::Float) => PointTuple::Float(self.to_float()),
            _ => self.clone(),
        }
    }

    /// Concatenates two tuples; the result is exact only if both are.
    pub fn concat(&self, other: &PointTuple) -> PointTuple {
        match (self, other) {
            (PointTuple::Exact(a), PointTuple::Exact(b)) => {
                PointTuple::Exact(a.iter().chain(b).cloned().collect())
            }
            _ => {
                let mut a = self.to_float();
                a.extend(other.to_float());
                PointTuple::Float(a)
            }
        }
    }

    /// The first `k` points.
    pub fn prefix(&self, k: usize) -> PointTuple {
        match self {
            PointTuple::Float(p) => PointTuple::Float(p[..k].to_vec()),
            PointTuple::Exact(p) => PointTuple::Exact(p[..k].to_vec()),
        }
    }

    /// Parses `"x,y;x,y;..."`. With `Backend::Exact`, decimals are read as
    /// exact rationals.
    pub fn parse(text: &str, backend: Backend) -> Result<PointTuple> {
        let points: Vec<Vec<&str>> = text
            .split(';')
            .map(|p| p.split(',').map(str::trim).collect())
            .collect();
        let bad = |s: &str| Error::Points(format!("`{s}` is not a finite number"));
        match backend {
            Backend::Exact => points
                .iter()
                .map(|p| {
                    p.iter()
                        .map(|s| parse_rational(s).ok_or_else(|| bad(s)))
                        .collect()
                })
                .collect::<Result<Vec<Vec<_>>>>()
                .map(PointTuple::Exact),
            Backend::Float => points
                .iter()
                .map(|p| {
                    p.iter()
                        .map(|s| {
                            s.parse::<f64>()
                                .ok()
                                .filter(|x| x.is_finite())
                                .or_else(|| parse_rational(s).map(|q| to_f64(&q)))
                                .ok_or_else(|| bad(s))
                        })
                        .collect()
                })
                .collect::<Result<Vec<Vec<_>>>>()
                .map(PointTuple::Float),
        }
    }

    /// Checks every point has `dim` coordinates.
    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if self.order() == 0 {
            return Err(Error::Points("tuple has no points".into()));
        }
        if let Some((j, d)) = self.dims().into_iter().enumerate().find(|(_, d)| *d != dim) {
            return Err(Error::Points(format!(
                "point {} has {d} coordinates, expected {dim}",
                j + 1
            )));
        }
        if let PointTuple::Float(p) = self {
            if p.iter().flatten().any(|x| !x.is_finite()) {
                return Err(Error::Points("non-finite coordinate".into()));
            }
        }
        Ok(())
    }
}

impl Serialize for PointTuple {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.order()))?;
        match self {
            PointTuple::Float(p) => {
                for pt in p {
                    seq.serialize_element(pt)?;
                }
            }
            PointTuple::Exact(p) => {
                for pt in p {
                    let strs: Vec<String> = pt.iter().map(format_rational).collect();
                    seq.serialize_element(&strs)?;
                }
            }
        }
        seq.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    Lie,
    Wronskian,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Entries {
    Float(DMatrix<f64>),
    Exact(Vec<Vec<BigRational>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointMatrix {
    pub entries: Entries,
    pub kind: MatrixKind,
    pub source: String,
    /// Column block width: `m` for Lie matrices, `q` for Wronskians.
    pub block: usize,
    pub tuple: PointTuple,
}

impl JointMatrix {
    pub fn nrows(&self) -> usize {
        match &self.entries {
            Entries::Float(m) => m.nrows(),
            Entries::Exact(rows) => rows.len(),
        }
    }

    pub fn ncols(&self) -> usize {
        match &self.entries {
            Entries::Float(m) => m.ncols(),
            Entries::Exact(rows) => rows.first().map_or(0, Vec::len),
        }
    }

    pub fn order(&self) -> usize {
        self.tuple.order()
    }

    pub fn backend(&self) -> Backend {
        match self.entries {
            Entries::Float(_) => Backend::Float,
            Entries::Exact(_) => Backend::Exact,
        }
    }

    pub fn to_float(&self) -> DMatrix<f64> {
        match &self.entries {
            Entries::Float(m) => m.clone(),
            Entries::Exact(rows) => {
                DMatrix::from_fn(self.nrows(), self.ncols(), |i, j| to_f64(&rows[i][j]))
            }
        }
    }

    pub fn entry_strings(&self) -> Vec<Vec<String>> {
        match &self.entries {
            Entries::Float(m) => (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| format!("{}", m[(i, j)])).collect())
                .collect(),
            Entries::Exact(rows) => rows
                .iter()
                .map(|r| r.iter().map(format_rational).collect())
                .collect(),
        }
    }

    /// Rows as lines, entries space-separated.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for row in self.entry_strings() {
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

fn assemble(
    rows: &[&[Coefficient]],
    names: &[String],
    tuple: &PointTuple,
    row_label: &'static str,
) -> Result<Entries> {
    let block = names.len();
    tuple.check_dim(block)?;
    let n = tuple.order();
    let eval_err = |k: usize, j: usize, e: crate::exprlang::EvalError| Error::Eval {
        row: row_label,
        row_index: k + 1,
        point: j + 1,
        message: e.render(names),
    };
    let comps = rows.first().map_or(0, |r| r.len());
    let polynomial = rows
        .iter()
        .all(|r| r.iter().all(Coefficient::is_polynomial));
    match tuple {
        PointTuple::Exact(points) if polynomial => {
            let mut out = Vec::with_capacity(rows.len());
            for (k, row) in rows.iter().enumerate() {
                let mut line = Vec::with_capacity(n * comps);
                for (j, p) in points.iter().enumerate() {
                    for c in row.iter() {
                        line.push(c.eval_exact(p).map_err(|e| eval_err(k, j, e))?);
                    }
                }
                out.push(line);
            }
            Ok(Entries::Exact(out))
        }
        _ => {
            let points = tuple.to_float();
            let mut m = DMatrix::zeros(rows.len(), n * comps);
            for (k, row) in rows.iter().enumerate() {
                for (j, p) in points.iter().enumerate() {
                    for (i, c) in row.iter().enumerate() {
                        m[(k, j * comps + i)] = c.eval_float(p).map_err(|e| eval_err(k, j, e))?;
                    }
                }
            }
            Ok(Entries::Float(m))
        }
    }
}

/// `L_n(z_1, ..., z_n)`: entry `(k, (j-1)m + i)` is `xi_k^i(z_j)`.
///
/// Exact when the tuple is exact and every coefficient is polynomial;
/// otherwise evaluated in floating point.
pub fn lie_matrix(spec: &ActionSpec, tuple: &PointTuple) -> Result<JointMatrix> {
    let rows: Vec<&[Coefficient]> = spec
        .generators
        .iter()
        .map(|g| g.coefficients.as_slice())
        .collect();
    let entries = assemble(&rows, &spec.coords, tuple, "generator")?;
    Ok(JointMatrix {
        entries,
        kind: MatrixKind::Lie,
        source: spec.name.clone(),
        block: spec.dim(),
        tuple: tuple.clone(),
    })
}

/// `W_n(x_1, ..., x_n)`: entry `(k, (j-1)q + l)` is `f_k^l(x_j)`.
pub fn wronskian_matrix(family: &FunctionFamily, tuple: &PointTuple) -> Result<JointMatrix> {
    let rows: Vec<&[Coefficient]> = family.functions.iter().map(Vec::as_slice).collect();
    let entries = assemble(&rows, &family.xcoords, tuple, "function")?;
    Ok(JointMatrix {
        entries,
        kind: MatrixKind::Wronskian,
        source: family.name.clone(),
        block: family.qdim,
        tuple: tuple.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actionmodel::{builtin_fixture, bump_family};

    fn action(name: &str) -> ActionSpec {
        builtin_fixture(name).unwrap().into_action().unwrap()
    }

    fn family(name: &str) -> FunctionFamily {
        builtin_fixture(name).unwrap().into_functions().unwrap()
    }

    fn exact(text: &str) -> PointTuple {
        PointTuple::parse(text, Backend::Exact).unwrap()
    }

    #[test]
    fn se2_at_origin() {
        let m = lie_matrix(&action("se2"), &exact("0,0")).unwrap();
        assert_eq!(m.dump(), "1 0\n0 1\n0 0\n");
    }

    #[test]
    fn se2_two_points() {
        let m = lie_matrix(&action("se2"), &exact("0,0;1,0")).unwrap();
        assert_eq!(m.backend(), Backend::Exact);
        assert_eq!(m.dump(), "1 0 1 0\n0 1 0 1\n0 0 0 -1\n");
        let f = lie_matrix(
            &action("se2"),
            &PointTuple::parse("0,0;1,0", Backend::Float).unwrap(),
        )
        .unwrap();
        assert_eq!(f.to_float(), m.to_float());
    }

    #[test]
    fn zero_generator_gives_zero_row() {
        let spec =
            ActionSpec::from_strings("z", &["x", "y"], &[vec!["1", "0"], vec!["0", "0"]]).unwrap();
        let m = lie_matrix(&spec, &exact("0.5,2;-1,3")).unwrap();
        assert_eq!(m.entry_strings()[1], vec!["0"; 4]);
    }

    #[test]
    fn wronskian_examples() {
        let m = wronskian_matrix(&family("monomials3"), &exact("0;1;2;3")).unwrap();
        assert_eq!(m.dump(), "1 1 1 1\n0 1 2 3\n0 1 4 9\n");
        let m = wronskian_matrix(&family("dependent-pair"), &exact("1;2;5")).unwrap();
        assert_eq!(m.dump(), "1 2 5\n2 4 10\n");
        let m = wronskian_matrix(&bump_family(), &exact("1;2")).unwrap();
        assert_eq!(m.backend(), Backend::Float);
        let f = m.to_float();
        assert_eq!(f[(0, 0)], (-1.0f64).exp());
        assert_eq!(f[(0, 1)], (-0.5f64).exp());
        assert_eq!((f[(1, 0)], f[(1, 1)]), (0.0, 0.0));
    }

    #[test]
    fn point_shape_errors() {
        let se2 = action("se2");
        assert!(matches!(
            lie_matrix(&se2, &exact("0,0,1")),
            Err(Error::Points(_))
        ));
        assert!(PointTuple::parse("0,x", Backend::Exact).is_err());
        assert!(PointTuple::parse("0,inf", Backend::Float).is_err());
        assert_eq!(
            PointTuple::parse("1/2,0.25", Backend::Float).unwrap(),
            PointTuple::Float(vec![vec![0.5, 0.25]])
        );
    }

    #[test]
    fn evaluation_errors_carry_indices() {
        let spec = ActionSpec::from_strings("d", &["x"], &[vec!["1"], vec!["1/x"]]).unwrap();
        let err = lie_matrix(&spec, &exact("1;0")).unwrap_err();
        match err {
            Error::Eval {
                row_index,
                point,
                message,
                ..
            } => {
                assert_eq!((row_index, point), (2, 2));
                assert!(message.contains("1 / x"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn restriction_consistency() {
        let gl3 = action("gl3");
        let long = exact("0.5,0.25;-0.3,0.7;0.9,-0.1");
        let full = lie_matrix(&gl3, &long).unwrap().to_float();
        let short = lie_matrix(&gl3, &long.prefix(2)).unwrap().to_float();
        assert_eq!(full.columns(0, 4).into_owned(), short);
    }
}

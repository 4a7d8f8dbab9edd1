//! Linear independence of function families on a region through the
//! multi-point Wronskian, and the translation action whose Lie matrix
//! reproduces it.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::actionmodel::{
    sample_points, ActionSpec, Backend, FunctionFamily, Region, SampleCfg, VectorField,
};
use crate::error::{Error, Result};
use crate::exprlang::{Coefficient, Expr};
use crate::jointmatrix::{wronskian_matrix, Entries, JointMatrix, PointTuple};
use crate::rankcore::{exact, search_max_rank, GenericRank};
use crate::rational::primitive_direction;

/// Fresh points at which an extracted relation is re-verified.
pub const RELATION_CHECKS: usize = 100;
/// Largest residual accepted for a floating-point relation.
pub const RELATION_RESIDUAL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Independence {
    Independent,
    DependentOnRegion,
    HeuristicDependent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Relation {
    Exact(#[serde(serialize_with = "crate::rational::serialize_rationals")] Vec<BigRational>),
    Float(Vec<f64>),
}

impl Relation {
    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            Relation::Exact(v) => v.iter().map(crate::rational::to_f64).collect(),
            Relation::Float(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndependenceReport {
    pub region: Region,
    pub r: usize,
    pub q: usize,
    pub p: usize,
    pub order: usize,
    pub max_wronskian_rank: usize,
    pub verdict: Independence,
    /// Constants `c` with `sum_k c_k f_k = 0` at every checked point.
    pub relation: Option<Relation>,
    /// Dimension of the relation space seen at the extraction points.
    pub relation_space_dim: usize,
    pub max_residual: Option<f64>,
    pub witness: PointTuple,
    pub trials_used: usize,
    pub failed_trials: usize,
    pub backend: Backend,
    pub warnings: Vec<String>,
}

fn check_region(family: &FunctionFamily, region: &Region) -> Result<()> {
    if region.dim() != family.xdim() {
        return Err(Error::Config(format!(
            "region has dimension {}, the family is defined on dimension {}",
            region.dim(),
            family.xdim()
        )));
    }
    Ok(())
}

/// Largest Wronskian rank over `cfg.trials` sampled `n`-tuples in `region`.
pub fn generic_wronskian_rank(
    family: &FunctionFamily,
    n: usize,
    region: &Region,
    cfg: &SampleCfg,
) -> Result<GenericRank> {
    check_region(family, region)?;
    if n == 0 {
        return Err(Error::Config("order must be at least 1".into()));
    }
    let backend = cfg.resolve_backend(family.is_polynomial())?;
    search_max_rank(
        0..cfg.trials as u64,
        family.len().min(n * family.qdim),
        cfg.tol,
        !family.is_polynomial(),
        |t| Ok(sample_points(region, n, backend, cfg.seed, t)),
        |tuple| wronskian_matrix(family, tuple),
    )
}

/// Decides whether the family is linearly independent on `region`: some
/// `(r + 1)`-point Wronskian of rank `r` certifies independence. Otherwise a
/// constant relation is extracted and checked at fresh points.
pub fn independence_on_region(
    family: &FunctionFamily,
    region: &Region,
    cfg: &SampleCfg,
) -> Result<IndependenceReport> {
    cfg.validate()?;
    check_region(family, region)?;
    let r = family.len();
    let q = family.qdim;
    let n = r + 1;
    let trials = cfg.trials as u64;
    let g = generic_wronskian_rank(family, n, region, cfg)?;
    let mut report = IndependenceReport {
        region: region.clone(),
        r,
        q,
        p: family.xdim(),
        order: n,
        max_wronskian_rank: g.rank,
        verdict: Independence::Independent,
        relation: None,
        relation_space_dim: 0,
        max_residual: None,
        witness: g.witness.clone(),
        trials_used: g.trials_used,
        failed_trials: g.failed_trials,
        backend: g.backend,
        warnings: Vec::new(),
    };
    if g.rank == r {
        return Ok(report);
    }
    report.verdict = match g.backend {
        Backend::Exact => Independence::DependentOnRegion,
        Backend::Float => Independence::HeuristicDependent,
    };
    // One extra generic point beyond the witness; its trial stream lies past
    // the search trials.
    let fresh = sample_points(region, 1, g.backend, cfg.seed, trials);
    let points = g.witness.concat(&fresh);
    let w = wronskian_matrix(family, &points)?;
    let basis = relation_basis(&w, cfg.tol);
    report.relation_space_dim = basis.len();
    let Some(candidate) = basis.into_iter().next() else {
        report
            .warnings
            .push("no relation found at the extraction points".into());
        return Ok(report);
    };
    let checks: Vec<PointTuple> = (0..RELATION_CHECKS as u64)
        .map(|i| sample_points(region, 1, g.backend, cfg.seed, trials + 1 + i))
        .collect();
    match verify_relation(family, &candidate, &checks) {
        Ok(residual) => {
            report.max_residual = Some(residual);
            report.relation = Some(candidate);
        }
        Err(msg) => report.warnings.push(format!("relation rejected: {msg}")),
    }
    Ok(report)
}

/// Basis of `{ c : c^T W = 0 }`, normalized: primitive integers with a
/// positive leading entry when exact, unit max-norm with a positive leading
/// entry otherwise.
pub fn relation_basis(w: &JointMatrix, tol: f64) -> Vec<Relation> {
    match &w.entries {
        Entries::Exact(rows) => {
            let cols = rows.first().map_or(0, Vec::len);
            let transposed: Vec<Vec<BigRational>> = (0..cols)
                .map(|j| rows.iter().map(|row| row[j].clone()).collect())
                .collect();
            exact::nullspace(&transposed, rows.len())
                .iter()
                .map(|v| Relation::Exact(primitive_direction(v)))
                .collect()
        }
        Entries::Float(m) => float_left_nullspace(m, tol)
            .into_iter()
            .map(|v| Relation::Float(normalize_float(&v)))
            .collect(),
    }
}

fn float_left_nullspace(m: &DMatrix<f64>, tol: f64) -> Vec<Vec<f64>> {
    let r = m.nrows();
    // pad so the SVD of the transpose has a full r x r right factor
    let mut t = DMatrix::<f64>::zeros(m.ncols().max(r), r);
    t.view_mut((0, 0), (m.ncols(), r)).copy_from(&m.transpose());
    let svd = t.svd(false, true);
    let Some(vt) = svd.v_t else { return Vec::new() };
    let sv = &svd.singular_values;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    (0..sv.len())
        .filter(|&i| sv[i] <= tol * smax || smax == 0.0)
        .map(|i| vt.row(i).iter().copied().collect())
        .collect()
}

fn normalize_float(v: &[f64]) -> Vec<f64> {
    let scale = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if scale == 0.0 {
        return v.to_vec();
    }
    let lead = v
        .iter()
        .find(|x| x.abs() > 1e-12 * scale)
        .copied()
        .unwrap_or(1.0);
    let s = lead.signum() * scale;
    v.iter()
        .map(|x| {
            let y = x / s;
            if y.abs() < 1e-14 {
                0.0
            } else {
                y
            }
        })
        .collect()
}

/// Largest `|sum_k c_k f_k^l(x)|` over the given single-point tuples, or a
/// message when the relation fails.
pub fn verify_relation(
    family: &FunctionFamily,
    relation: &Relation,
    points: &[PointTuple],
) -> std::result::Result<f64, String> {
    let mut worst = 0.0f64;
    for tuple in points {
        let w = wronskian_matrix(family, tuple).map_err(|e| e.to_string())?;
        match (relation, &w.entries) {
            (Relation::Exact(c), Entries::Exact(rows)) => {
                for l in 0..family.qdim {
                    let sum: BigRational = c.iter().zip(rows).map(|(ck, row)| ck * &row[l]).sum();
                    if !sum.is_zero() {
                        return Err(format!(
                            "nonzero combination {sum} at {:?}",
                            tuple.to_float()[0]
                        ));
                    }
                }
            }
            _ => {
                let c = relation.to_f64();
                let m = w.to_float();
                for l in 0..family.qdim {
                    let sum: f64 = c.iter().enumerate().map(|(k, ck)| ck * m[(k, l)]).sum();
                    worst = worst.max(sum.abs());
                }
                if worst >= RELATION_RESIDUAL {
                    return Err(format!("residual {worst:e} at {:?}", tuple.to_float()[0]));
                }
            }
        }
    }
    Ok(worst)
}

/// The translation action `(x, v) -> (x, v + sum_k t_k f_k(x))` on
/// `X x R^q`. Its generators are `sum_l f_k^l(x) d/dv^l`. Fiber coordinates
/// are named `v1, ..., vq`, renamed with trailing underscores if they clash
/// with the base coordinates.
pub fn induced_action_oracle(family: &FunctionFamily) -> (ActionSpec, Vec<String>) {
    let mut warnings = Vec::new();
    let mut coords = family.xcoords.clone();
    for l in 1..=family.qdim {
        let mut name = format!("v{l}");
        let wanted = name.clone();
        while coords.contains(&name) {
            name.push('_');
        }
        if name != wanted {
            warnings.push(format!("fiber coordinate `{wanted}` renamed to `{name}`"));
        }
        coords.push(name);
    }
    let nvars = coords.len();
    let zero = Coefficient::from_expr("0".into(), Expr::int(0), nvars);
    let generators =
        family
            .functions
            .iter()
            .map(|f| {
                let mut coefficients = vec![zero.clone(); family.xdim()];
                coefficients.extend(f.iter().map(|c| {
                    Coefficient::from_expr(c.source().to_string(), c.expr().clone(), nvars)
                }));
                VectorField { coefficients }
            })
            .collect();
    let spec = ActionSpec {
        name: format!("{}-induced", family.name),
        coords,
        generators,
        regions: BTreeMap::new(),
        analytic_hint: false,
    };
    (spec, warnings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actionmodel::{builtin_fixture, bump_family};
    use crate::jointmatrix::lie_matrix;
    use crate::rankcore::rank;

    fn family(name: &str) -> FunctionFamily {
        builtin_fixture(name).unwrap().into_functions().unwrap()
    }

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn monomials_are_independent() {
        let rep = independence_on_region(
            &family("monomials3"),
            &Region::unit(1),
            &SampleCfg::default(),
        )
        .unwrap();
        assert_eq!(rep.max_wronskian_rank, 3);
        assert_eq!(rep.verdict, Independence::Independent);
        assert!(rep.relation.is_none());
    }

    #[test]
    fn dependent_pair_relation() {
        let rep = independence_on_region(
            &family("dependent-pair"),
            &Region::unit(1),
            &SampleCfg::default(),
        )
        .unwrap();
        assert_eq!(rep.max_wronskian_rank, 1);
        assert_eq!(rep.verdict, Independence::DependentOnRegion);
        assert_eq!(rep.relation, Some(Relation::Exact(vec![q(2), q(-1)])));
        assert_eq!(rep.relation_space_dim, 1);
    }

    #[test]
    fn bump_family_on_positive_half() {
        let region = Region::new(vec![(0.1, 1.0)]).unwrap();
        let rep = independence_on_region(&bump_family(), &region, &SampleCfg::default()).unwrap();
        assert_eq!(rep.max_wronskian_rank, 1);
        assert_eq!(rep.verdict, Independence::HeuristicDependent);
        assert_eq!(rep.relation, Some(Relation::Float(vec![0.0, 1.0])));
        assert_eq!(rep.max_residual, Some(0.0));

        let sym = independence_on_region(&bump_family(), &Region::unit(1), &SampleCfg::default())
            .unwrap();
        assert_eq!(sym.verdict, Independence::Independent);
    }

    #[test]
    fn wrong_relation_is_rejected() {
        let f = family("monomials3");
        let pts: Vec<_> = ["0.5", "-0.25"]
            .iter()
            .map(|s| PointTuple::parse(s, Backend::Exact).unwrap())
            .collect();
        assert!(verify_relation(&f, &Relation::Exact(vec![q(1), q(0), q(-1)]), &pts).is_err());
        assert!(verify_relation(&f, &Relation::Float(vec![1.0, 0.0, -1.0]), &pts).is_err());
    }

    #[test]
    fn oracle_shapes() {
        let (m3, w) = induced_action_oracle(&family("monomials3"));
        assert!(w.is_empty());
        assert_eq!(m3.coords, vec!["x", "v1"]);
        let comps: Vec<Vec<&str>> = m3
            .generators
            .iter()
            .map(|g| g.coefficients.iter().map(Coefficient::source).collect())
            .collect();
        assert_eq!(
            comps,
            vec![vec!["0", "1"], vec!["0", "x"], vec!["0", "x^2"]]
        );
        assert!(m3.is_polynomial());

        let (bump, _) = induced_action_oracle(&bump_family());
        assert_eq!((bump.group_dim(), bump.dim()), (2, 2));
        assert!(!bump.is_polynomial());
    }

    #[test]
    fn oracle_renames_clashing_fibers() {
        let f = FunctionFamily::from_strings("c", &["v1", "x"], 2, &[vec!["v1", "x"]]).unwrap();
        let (spec, w) = induced_action_oracle(&f);
        assert_eq!(spec.coords, vec!["v1", "x", "v1_", "v2"]);
        assert_eq!(w.len(), 1);
    }

    #[test]
    fn oracle_rank_matches_wronskian() {
        let f = family("monomials3");
        let (spec, _) = induced_action_oracle(&f);
        for (xs, vs) in [
            ("1/2;1/3", "5,9"),
            ("1/2;1/2", "0,7"),
            ("-1/3;1/4;2/3", "1,0,-4"),
        ] {
            let xt = PointTuple::parse(xs, Backend::Exact).unwrap();
            let pts: Vec<String> = xs
                .split(';')
                .zip(vs.split(','))
                .map(|(x, v)| format!("{x},{v}"))
                .collect();
            let zt = PointTuple::parse(&pts.join(";"), Backend::Exact).unwrap();
            let wr = rank(&wronskian_matrix(&f, &xt).unwrap(), 1e-9)
                .unwrap()
                .rank;
            let lr = rank(&lie_matrix(&spec, &zt).unwrap(), 1e-9).unwrap().rank;
            assert_eq!(wr, lr);
        }
    }
}

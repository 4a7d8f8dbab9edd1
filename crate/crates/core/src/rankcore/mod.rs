//! Matrix rank, floating and exact, and the generic (maximal) rank of the
//! Lie matrix over sampled tuples.

pub mod exact;

use std::ops::Range;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::actionmodel::{sample_tuple, ActionSpec, Backend, SampleCfg};
use crate::error::{Error, Result};
use crate::jointmatrix::{lie_matrix, Entries, JointMatrix, PointTuple};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Spectrum {
    /// Singular values in decreasing order.
    Singular(Vec<f64>),
    /// Number of nonzero pivots found by exact elimination.
    Pivots(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankReport {
    pub rank: usize,
    pub backend: Backend,
    pub tol: Option<f64>,
    pub spectrum: Spectrum,
    /// Smallest accepted over largest rejected singular value; `None` is
    /// infinite (exact backend, or nothing on one side of the threshold).
    #[serde(serialize_with = "crate::rational::serialize_ratio")]
    pub gap_ratio: Option<f64>,
}

/// Singular values of `m`, largest first.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut sv: Vec<f64> = m
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Rank of a float matrix as the number of singular values above
/// `tol * sigma_max`.
pub fn float_rank(m: &DMatrix<f64>, tol: f64) -> Result<RankReport> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let sv = singular_values(m);
    let smax = sv.first().copied().unwrap_or(0.0);
    let rank = if smax == 0.0 {
        0
    } else {
        sv.iter().filter(|&&s| s > tol * smax).count()
    };
    let gap_ratio = if rank == 0 || rank == sv.len() || sv[rank] == 0.0 {
        None
    } else {
        Some(sv[rank - 1] / sv[rank])
    };
    Ok(RankReport {
        rank,
        backend: Backend::Float,
        tol: Some(tol),
        spectrum: Spectrum::Singular(sv),
        gap_ratio,
    })
}

/// Tolerance-based rank of a joint matrix (exact entries are converted).
pub fn numeric_rank(mat: &JointMatrix, tol: f64) -> Result<RankReport> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::Config(format!("tol {tol} must lie in (0, 1)")));
    }
    float_rank(&mat.to_float(), tol)
}

/// Exact rank by fraction-free elimination. Requires exact entries.
pub fn exact_rank(mat: &JointMatrix) -> Result<RankReport> {
    match &mat.entries {
        Entries::Exact(rows) => {
            let rank = exact::rank(rows);
            Ok(RankReport {
                rank,
                backend: Backend::Exact,
                tol: None,
                spectrum: Spectrum::Pivots(rank),
                gap_ratio: None,
            })
        }
        Entries::Float(_) => Err(Error::BackendMismatch("exact rank needs exact entries")),
    }
}

/// Rank in the matrix's own backend.
pub fn rank(mat: &JointMatrix, tol: f64) -> Result<RankReport> {
    match mat.entries {
        Entries::Exact(_) => exact_rank(mat),
        Entries::Float(_) => numeric_rank(mat, tol),
    }
}

/// Result of a maximal-rank search over sampled tuples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenericRank {
    pub order: usize,
    pub rank: usize,
    /// `min(r, n * block)`: no tuple can exceed it.
    pub bound: usize,
    pub witness: PointTuple,
    pub witness_trial: u64,
    /// Trials whose tuple attained `rank`.
    pub attained: usize,
    pub trials_used: usize,
    pub failed_trials: usize,
    pub backend: Backend,
    /// Set when the data is not polynomial, so sampling gives no
    /// probabilistic guarantee.
    pub heuristic: bool,
    #[serde(serialize_with = "crate::rational::serialize_ratio")]
    pub min_gap_ratio: Option<f64>,
}

impl GenericRank {
    pub fn saturated(&self) -> bool {
        self.rank == self.bound
    }

    /// Folds in a further batch of trials searched for the same order.
    pub fn merge(mut self, other: GenericRank) -> GenericRank {
        if other.rank > self.rank {
            let failed = self.failed_trials + other.failed_trials;
            let used = self.trials_used + other.trials_used;
            let gap = min_gap(self.min_gap_ratio, other.min_gap_ratio);
            self = other;
            self.failed_trials = failed;
            self.trials_used = used;
            self.min_gap_ratio = gap;
            return self;
        }
        if other.rank == self.rank {
            self.attained += other.attained;
        }
        self.trials_used += other.trials_used;
        self.failed_trials += other.failed_trials;
        self.min_gap_ratio = min_gap(self.min_gap_ratio, other.min_gap_ratio);
        self
    }
}

fn min_gap(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    }
}

/// Maximum rank over the tuples produced by `sample` for each trial index.
/// Stops early once `bound` is reached; trials whose matrix cannot be
/// evaluated are skipped.
pub(crate) fn search_max_rank<S, B>(
    trials: Range<u64>,
    bound: usize,
    tol: f64,
    heuristic: bool,
    mut sample: S,
    mut build: B,
) -> Result<GenericRank>
where
    S: FnMut(u64) -> Result<PointTuple>,
    B: FnMut(&PointTuple) -> Result<JointMatrix>,
{
    let total = trials.end.saturating_sub(trials.start) as usize;
    let mut best: Option<GenericRank> = None;
    let mut failed = 0;
    let mut used = 0;
    let mut last_err = String::new();
    let mut gap: Option<f64> = None;
    for trial in trials {
        used += 1;
        let tuple = sample(trial)?;
        let mat = match build(&tuple) {
            Ok(m) => m,
            Err(e @ Error::Eval { .. }) => {
                failed += 1;
                last_err = e.to_string();
                continue;
            }
            Err(e) => return Err(e),
        };
        let report = rank(&mat, tol)?;
        gap = min_gap(gap, report.gap_ratio);
        match &mut best {
            Some(b) if report.rank < b.rank => {}
            Some(b) if report.rank == b.rank => b.attained += 1,
            _ => {
                best = Some(GenericRank {
                    order: tuple.order(),
                    rank: report.rank,
                    bound,
                    witness: tuple,
                    witness_trial: trial,
                    attained: 1,
                    trials_used: 0,
                    failed_trials: 0,
                    backend: mat.backend(),
                    heuristic,
                    min_gap_ratio: None,
                })
            }
        }
        if best.as_ref().is_some_and(|b| b.rank >= bound) {
            break;
        }
    }
    match best {
        Some(mut b) => {
            b.trials_used = used;
            b.failed_trials = failed;
            b.min_gap_ratio = gap;
            Ok(b)
        }
        None => Err(Error::AllTrialsFailed {
            trials: total,
            last: last_err,
        }),
    }
}

/// Estimates `s_n`, the maximal orbit dimension on `M^{x n}`, as the largest
/// Lie-matrix rank over `cfg.trials` sampled tuples.
pub fn generic_rank(spec: &ActionSpec, n: usize, cfg: &SampleCfg) -> Result<GenericRank> {
    generic_rank_trials(spec, n, cfg, 0..cfg.trials as u64)
}

/// As [`generic_rank`], over an explicit range of trial indices.
pub fn generic_rank_trials(
    spec: &ActionSpec,
    n: usize,
    cfg: &SampleCfg,
    trials: Range<u64>,
) -> Result<GenericRank> {
    cfg.validate()?;
    if n == 0 {
        return Err(Error::Config("order must be at least 1".into()));
    }
    let bound = spec.group_dim().min(n * spec.dim());
    search_max_rank(
        trials,
        bound,
        cfg.tol,
        !spec.is_polynomial(),
        |trial| sample_tuple(spec, n, cfg, trial),
        |tuple| lie_matrix(spec, tuple),
    )
}

/// Rank of the Lie matrix at one tuple.
pub fn tuple_rank(spec: &ActionSpec, tuple: &PointTuple, tol: f64) -> Result<RankReport> {
    rank(&lie_matrix(spec, tuple)?, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actionmodel::builtin_fixture;
    use proptest::prelude::*;

    fn action(name: &str) -> ActionSpec {
        builtin_fixture(name).unwrap().into_action().unwrap()
    }

    fn dm(rows: usize, cols: usize, v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(rows, cols, v)
    }

    #[test]
    fn float_rank_examples() {
        assert_eq!(float_rank(&DMatrix::identity(3, 3), 1e-9).unwrap().rank, 3);
        let r = float_rank(&dm(2, 2, &[1.0, 2.0, 2.0, 4.0]), 1e-9).unwrap();
        assert_eq!(r.rank, 1);
        assert!(r.gap_ratio.is_none_or(|g| g > 1e10));
        assert_eq!(float_rank(&DMatrix::zeros(2, 3), 1e-9).unwrap().rank, 0);
        assert!(matches!(
            float_rank(&dm(1, 2, &[1.0, f64::NAN]), 1e-9),
            Err(Error::NonFinite)
        ));
    }

    #[test]
    fn gap_ratio_is_accepted_over_rejected() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1e-3, 1e-12]));
        let r = float_rank(&m, 1e-9).unwrap();
        assert_eq!(r.rank, 2);
        assert!((r.gap_ratio.unwrap() - 1e9).abs() < 1.0);
    }

    #[test]
    fn se2_diagonal_has_rank_two() {
        let se2 = action("se2");
        let t = PointTuple::parse("1,2;1,2", Backend::Float).unwrap();
        assert_eq!(
            numeric_rank(&lie_matrix(&se2, &t).unwrap(), 1e-9)
                .unwrap()
                .rank,
            2
        );
    }

    #[test]
    fn exact_rank_examples() {
        let se2 = action("se2");
        let t = PointTuple::parse("0,0;1,0", Backend::Exact).unwrap();
        let r = exact_rank(&lie_matrix(&se2, &t).unwrap()).unwrap();
        assert_eq!(r.rank, 3);
        assert_eq!(r.gap_ratio, None);

        let zero = ActionSpec::from_strings("z", &["x"], &[vec!["0"]]).unwrap();
        let t = PointTuple::parse("0.5", Backend::Exact).unwrap();
        assert_eq!(exact_rank(&lie_matrix(&zero, &t).unwrap()).unwrap().rank, 0);

        let t = PointTuple::parse("0,0", Backend::Float).unwrap();
        assert!(matches!(
            exact_rank(&lie_matrix(&se2, &t).unwrap()),
            Err(Error::BackendMismatch(_))
        ));
    }

    #[test]
    fn gl3_four_generic_points_rank_eight() {
        let gl3 = action("gl3");
        let t = PointTuple::parse("1/3,2/7;-5/11,1/13;3/4,-2/3;-1/5,-7/9", Backend::Exact).unwrap();
        assert_eq!(exact_rank(&lie_matrix(&gl3, &t).unwrap()).unwrap().rank, 8);
    }

    #[test]
    fn gl3_single_constant_relation() {
        // Stack of the nine generators at r + 1 = 10 generic points has rank 8.
        let gl3 = action("gl3");
        let cfg = SampleCfg::with_seed(3);
        let t = sample_tuple(&gl3, 10, &cfg, 0).unwrap();
        let m = lie_matrix(&gl3, &t).unwrap();
        assert_eq!(exact_rank(&m).unwrap().rank, 8);
        let Entries::Exact(rows) = &m.entries else {
            unreachable!()
        };
        let cols = rows[0].len();
        let transposed: Vec<Vec<_>> = (0..cols)
            .map(|j| rows.iter().map(|r| r[j].clone()).collect())
            .collect();
        let ns = exact::nullspace(&transposed, rows.len());
        assert_eq!(ns.len(), 1);
        let rel = crate::rational::primitive_direction(&ns[0]);
        let expected: Vec<_> = [1, 0, 0, 0, 1, 0, 0, 0, 1]
            .iter()
            .map(|&k: &i64| num_rational::BigRational::from_integer(k.into()))
            .collect();
        assert_eq!(rel, expected);
    }

    #[test]
    fn generic_rank_examples() {
        let cfg = SampleCfg::default();
        let se2 = action("se2");
        assert_eq!(generic_rank(&se2, 1, &cfg).unwrap().rank, 2);
        let g = generic_rank(&se2, 2, &cfg).unwrap();
        assert_eq!(g.rank, 3);
        assert!(g.saturated());
        assert_eq!(g.trials_used, 1, "early exit at the bound");
        assert_eq!(tuple_rank(&se2, &g.witness, 1e-9).unwrap().rank, 3);

        let gl3 = action("gl3");
        assert_eq!(generic_rank(&gl3, 2, &cfg).unwrap().rank, 4);
        assert_eq!(generic_rank(&gl3, 3, &cfg).unwrap().rank, 6);
        let g5 = generic_rank(&gl3, 5, &cfg).unwrap();
        assert_eq!(g5.rank, 8);
        assert!(!g5.saturated());
        assert_eq!(g5.attained, cfg.trials);
    }

    #[test]
    fn all_failed_trials_are_reported() {
        let spec = ActionSpec::from_strings("s", &["x"], &[vec!["sqrt(x)"]]).unwrap();
        let cfg = SampleCfg::default()
            .with_region(crate::actionmodel::Region::new(vec![(-2.0, -1.0)]).unwrap());
        assert!(matches!(
            generic_rank(&spec, 1, &cfg),
            Err(Error::AllTrialsFailed { trials: 32, .. })
        ));
    }

    #[test]
    fn witness_is_lowest_attaining_trial() {
        let gl3 = action("gl3");
        let cfg = SampleCfg::with_seed(11);
        let all = generic_rank(&gl3, 5, &cfg).unwrap();
        let first = generic_rank_trials(&gl3, 5, &cfg, 0..1).unwrap();
        assert_eq!(all.witness, first.witness);
        let split = generic_rank_trials(&gl3, 5, &cfg, 0..10)
            .unwrap()
            .merge(generic_rank_trials(&gl3, 5, &cfg, 10..32).unwrap());
        assert_eq!(split.rank, all.rank);
        assert_eq!(split.attained, all.attained);
        assert_eq!(split.witness, all.witness);
    }

    proptest! {
        #[test]
        fn rank_is_non_increasing_in_tol(
            v in proptest::collection::vec(-1.0f64..1.0, 12),
            scale in proptest::collection::vec(-12i32..1, 4),
        ) {
            let mut m = dm(4, 3, &v);
            for (i, s) in scale.iter().enumerate() {
                m.row_mut(i).scale_mut(10f64.powi(*s));
            }
            let mut last = usize::MAX;
            for tol in [1e-14, 1e-12, 1e-9, 1e-6, 1e-3, 0.5] {
                let r = float_rank(&m, tol).unwrap().rank;
                prop_assert!(r <= last);
                prop_assert!(r <= 3);
                last = r;
            }
        }
    }
}

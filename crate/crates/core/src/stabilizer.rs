//! Orbit-dimension sequence, stabilization order and joint-invariant counts.
//!
//! The sequence `s_1, s_2, ...` is computed until two consecutive orders
//! agree. Equal consecutive values cannot be a temporary plateau for a
//! Cartesian action, so the first such `n` is the stabilization order `n0`.
//! Each `s_n` grows by at least one before that, which bounds
//! `n0 <= r - s_1 + 1`; hitting that bound means the sampled ranks are wrong.

use serde::Serialize;

use crate::actionmodel::{sample_tuple, ActionSpec, Backend, SampleCfg};
use crate::error::{Error, Result};
use crate::jointmatrix::{lie_matrix, PointTuple};
use crate::rankcore::{generic_rank_trials, rank, GenericRank};

/// Extra trial batches allowed when a non-saturated rank has a single witness.
pub const MAX_EXTENSIONS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Yes,
    No,
    Heuristic,
}

/// Per-order search statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderSummary {
    pub order: usize,
    pub rank: usize,
    pub bound: usize,
    pub attained: usize,
    pub trials_used: usize,
    pub failed_trials: usize,
    pub witness_trial: u64,
    #[serde(serialize_with = "crate::rational::serialize_ratio")]
    pub min_gap_ratio: Option<f64>,
}

impl From<&GenericRank> for OrderSummary {
    fn from(g: &GenericRank) -> Self {
        OrderSummary {
            order: g.order,
            rank: g.rank,
            bound: g.bound,
            attained: g.attained,
            trials_used: g.trials_used,
            failed_trials: g.failed_trials,
            witness_trial: g.witness_trial,
            min_gap_ratio: g.min_gap_ratio,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilizationReport {
    /// `s_1, ..., s_{n0}`.
    pub s: Vec<usize>,
    pub n0: usize,
    pub s_stab: usize,
    /// `n * m - s_n` for each `n` in `1..=n0`.
    pub invariant_counts: Vec<usize>,
    pub group_dim: usize,
    pub dim: usize,
    /// `r - s_1 + 1`.
    pub cap: usize,
    pub bound_ok: bool,
    pub effective_on_subsets_verdict: Verdict,
    /// Witness tuples for orders `1..=n0`.
    pub witnesses: Vec<PointTuple>,
    /// Witness at order `n0 + 1`, where `s_{n0 + 1} = s_{n0}` was observed.
    pub confirmation: PointTuple,
    pub orders: Vec<OrderSummary>,
    pub backend: Backend,
    pub heuristic: bool,
    pub warnings: Vec<String>,
}

/// Generic rank at order `n` under the confidence policy: a rank below the
/// bound must be attained by two trials, otherwise further trial batches are
/// searched. At least `min_trials` trials are always used.
pub fn confident_rank(
    spec: &ActionSpec,
    n: usize,
    cfg: &SampleCfg,
    min_trials: usize,
    warnings: &mut Vec<String>,
) -> Result<GenericRank> {
    let batch = cfg.trials as u64;
    let first = batch.max(min_trials as u64);
    let mut g = generic_rank_trials(spec, n, cfg, 0..first)?;
    let mut end = first;
    let mut extensions = 0;
    while !g.saturated() && g.attained < 2 && extensions < MAX_EXTENSIONS {
        g = g.merge(generic_rank_trials(spec, n, cfg, end..end + batch)?);
        end += batch;
        extensions += 1;
    }
    if !g.saturated() && g.attained < 2 {
        warnings.push(format!(
            "rank {} at order {n} was attained by a single tuple in {} trials",
            g.rank, g.trials_used
        ));
    }
    if g.failed_trials > 0 {
        warnings.push(format!(
            "{} of {} tuples at order {n} could not be evaluated",
            g.failed_trials, g.trials_used
        ));
    }
    Ok(g)
}

/// Computes `s_n` until it stabilizes.
pub fn stabilize(spec: &ActionSpec, cfg: &SampleCfg) -> Result<StabilizationReport> {
    cfg.validate()?;
    let r = spec.group_dim();
    let m = spec.dim();
    let mut warnings = Vec::new();
    let mut ranks: Vec<GenericRank> = vec![confident_rank(spec, 1, cfg, 0, &mut warnings)?];
    let cap = r - ranks[0].rank + 1;
    let mut n = 1;
    loop {
        let prev = &ranks[n - 1];
        // Same trials extend the same tuples, so s_{n+1} >= s_n unless
        // evaluation failed at an added point.
        let next = confident_rank(spec, n + 1, cfg, prev.trials_used, &mut warnings)?;
        if next.rank < prev.rank {
            return Err(Error::Inconsistent {
                order: n,
                prev: prev.rank,
                next: next.rank,
            });
        }
        let done = next.rank == prev.rank;
        ranks.push(next);
        if done {
            break;
        }
        if n >= cap {
            return Err(Error::CapBreach {
                cap,
                s: ranks.iter().map(|g| g.rank).collect(),
            });
        }
        n += 1;
    }
    let n0 = n;
    let s: Vec<usize> = ranks[..n0].iter().map(|g| g.rank).collect();
    let s_stab = s[n0 - 1];
    let backend = ranks[0].backend;
    let heuristic = !spec.is_polynomial();
    let verdict = if s_stab == r {
        Verdict::Yes
    } else if backend == Backend::Exact {
        Verdict::No
    } else {
        Verdict::Heuristic
    };
    let invariant_counts = s
        .iter()
        .enumerate()
        .map(|(i, &sn)| (i + 1) * m - sn)
        .collect();
    let orders = ranks.iter().map(OrderSummary::from).collect();
    let confirmation = ranks[n0].witness.clone();
    let witnesses = ranks.into_iter().take(n0).map(|g| g.witness).collect();
    Ok(StabilizationReport {
        s,
        n0,
        s_stab,
        invariant_counts,
        group_dim: r,
        dim: m,
        cap,
        bound_ok: n0 <= cap,
        effective_on_subsets_verdict: verdict,
        witnesses,
        confirmation,
        orders,
        backend,
        heuristic,
        warnings,
    })
}

/// `s_1, ..., s_max_order` without the stopping rule, for checking that a
/// detected plateau persists.
pub fn orbit_dimensions(
    spec: &ActionSpec,
    cfg: &SampleCfg,
    max_order: usize,
) -> Result<Vec<usize>> {
    let mut warnings = Vec::new();
    let mut out = Vec::with_capacity(max_order);
    let mut trials = 0;
    for n in 1..=max_order {
        let g = confident_rank(spec, n, cfg, trials, &mut warnings)?;
        trials = g.trials_used;
        out.push(g.rank);
    }
    Ok(out)
}

/// Number of functionally independent local joint invariants on `M^{x n}`.
pub fn invariant_count(spec: &ActionSpec, n: usize, cfg: &SampleCfg) -> Result<usize> {
    let g = confident_rank(spec, n, cfg, 0, &mut Vec::new())?;
    Ok(n * spec.dim() - g.rank)
}

/// Whether the orbit through `tuple` has the maximal dimension `s_n`.
pub fn is_max_orbit(spec: &ActionSpec, tuple: &PointTuple, cfg: &SampleCfg) -> Result<bool> {
    tuple.check_dim(spec.dim())?;
    let s_n = confident_rank(spec, tuple.order(), cfg, 0, &mut Vec::new())?.rank;
    Ok(rank(&lie_matrix(spec, tuple)?, cfg.tol)?.rank == s_n)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Completion {
    pub tuple: PointTuple,
    pub rank: usize,
    pub target: usize,
    pub attempts: usize,
}

/// Extends the single point `z1` by `n0` sampled points to a tuple of rank
/// `s_{n0}`.
pub fn complete_tuple(
    spec: &ActionSpec,
    z1: &PointTuple,
    report: &StabilizationReport,
    cfg: &SampleCfg,
) -> Result<Completion> {
    if z1.order() != 1 {
        return Err(Error::Points(format!(
            "expected one base point, got {}",
            z1.order()
        )));
    }
    z1.check_dim(spec.dim())?;
    let backend = cfg.resolve_backend(spec.is_polynomial())?;
    let base = z1.to_backend(backend);
    let target = report.s_stab;
    for trial in 0..cfg.trials as u64 {
        let tail = sample_tuple(spec, report.n0, cfg, trial)?;
        let tuple = base.concat(&tail);
        let Ok(mat) = lie_matrix(spec, &tuple) else {
            continue;
        };
        if rank(&mat, cfg.tol)?.rank != target {
            continue;
        }
        let recheck = rank(&lie_matrix(spec, &tuple)?, cfg.tol)?.rank;
        if recheck == target {
            return Ok(Completion {
                tuple,
                rank: recheck,
                target,
                attempts: trial as usize + 1,
            });
        }
    }
    Err(Error::BudgetExhausted { budget: cfg.trials })
}

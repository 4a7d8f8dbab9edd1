//! Effectiveness and local freeness, and the flow-based invariance checks
//! for rank strata and for the zero set of the Lie determinant.

mod flow;

use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::actionmodel::{sample_tuple, ActionSpec, Backend, Region, SampleCfg};
use crate::error::{Error, Result};
use crate::jointmatrix::{lie_matrix, Entries, PointTuple};
use crate::rankcore::{exact, float_rank, generic_rank_trials, rank};

pub use flow::{flow, flow_tuple, FlowSpec, DEFAULT_STEPS};

/// Rank tolerance after integrating a flow.
pub const FLOW_TOL: f64 = 1e-6;
/// Largest coefficient norm of a sampled flow.
pub const FLOW_NORM: f64 = 0.5;
/// `|det|` below this counts as zero after a flow.
pub const DET_ZERO: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Effectiveness {
    Effective,
    NotEffective,
    HeuristicNotEffective,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffectivenessReport {
    pub region: Region,
    pub order: usize,
    pub max_rank_found: usize,
    pub required: usize,
    pub verdict: Effectiveness,
    pub witness: PointTuple,
    pub witness_trial: u64,
    pub trials_used: usize,
    pub failed_trials: usize,
    pub backend: Backend,
}

/// Local effectiveness on `region`: some `(r + 1)`-tuple of points in the
/// region must reach rank `r`.
pub fn effectiveness_on_region(
    spec: &ActionSpec,
    region: &Region,
    cfg: &SampleCfg,
) -> Result<EffectivenessReport> {
    if region.dim() != spec.dim() {
        return Err(Error::Config(format!(
            "region has dimension {}, the chart has {}",
            region.dim(),
            spec.dim()
        )));
    }
    let r = spec.group_dim();
    let cfg = cfg.with_region(region.clone());
    let g = generic_rank_trials(spec, r + 1, &cfg, 0..cfg.trials as u64)?;
    let verdict = if g.rank == r {
        Effectiveness::Effective
    } else if g.backend == Backend::Exact {
        Effectiveness::NotEffective
    } else {
        Effectiveness::HeuristicNotEffective
    };
    Ok(EffectivenessReport {
        region: region.clone(),
        order: r + 1,
        max_rank_found: g.rank,
        required: r,
        verdict,
        witness: g.witness,
        witness_trial: g.witness_trial,
        trials_used: g.trials_used,
        failed_trials: g.failed_trials,
        backend: g.backend,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankMismatch {
    pub tuple: usize,
    pub flow: FlowSpec,
    pub before: usize,
    pub after: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub order: usize,
    pub tuples: usize,
    pub flows_per_tuple: usize,
    pub checks: usize,
    pub skipped: usize,
    pub tol: f64,
    pub mismatches: Vec<RankMismatch>,
    /// Ranks seen before flowing, with multiplicity.
    pub ranks: Vec<usize>,
    #[serde(serialize_with = "crate::rational::serialize_ratio")]
    pub min_gap_ratio: Option<f64>,
    pub log: Vec<String>,
    pub pass: bool,
}

fn sampled_flows(
    r: usize,
    seed: u64,
    tuple: usize,
    flows: usize,
) -> impl Iterator<Item = FlowSpec> {
    (0..flows).map(move |j| FlowSpec::sample(r, FLOW_NORM, seed, (tuple * flows + j) as u64))
}

fn min_gap(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    }
}

/// Checks that each tuple keeps its Lie-matrix rank under `flows` sampled
/// group elements applied to all of its points at once.
pub fn rank_invariance_on(
    spec: &ActionSpec,
    tuples: &[PointTuple],
    cfg: &SampleCfg,
    flows: usize,
) -> Result<InvarianceReport> {
    let r = spec.group_dim();
    let order = tuples.first().map_or(0, PointTuple::order);
    let mut rep = InvarianceReport {
        order,
        tuples: tuples.len(),
        flows_per_tuple: flows,
        checks: 0,
        skipped: 0,
        tol: FLOW_TOL,
        mismatches: Vec::new(),
        ranks: Vec::new(),
        min_gap_ratio: None,
        log: Vec::new(),
        pass: true,
    };
    for (t, tuple) in tuples.iter().enumerate() {
        let points = tuple.to_float();
        let float = PointTuple::Float(points.clone());
        let before = match lie_matrix(spec, &float) {
            Ok(m) => float_rank(&m.to_float(), FLOW_TOL)?,
            Err(e @ Error::Eval { .. }) => {
                rep.skipped += flows;
                rep.log.push(format!("tuple {t}: {e}"));
                continue;
            }
            Err(e) => return Err(e),
        };
        rep.ranks.push(before.rank);
        rep.min_gap_ratio = min_gap(rep.min_gap_ratio, before.gap_ratio);
        for fs in sampled_flows(r, cfg.seed, t, flows) {
            let moved = match flow_tuple(spec, &fs, &points) {
                Ok(p) => p,
                Err(e @ Error::DomainExit { .. }) => {
                    rep.skipped += 1;
                    rep.log.push(format!("tuple {t}: {e}"));
                    continue;
                }
                Err(e) => return Err(e),
            };
            let after = match lie_matrix(spec, &PointTuple::Float(moved)) {
                Ok(m) => float_rank(&m.to_float(), FLOW_TOL)?,
                Err(e @ Error::Eval { .. }) => {
                    rep.skipped += 1;
                    rep.log.push(format!("tuple {t}: {e}"));
                    continue;
                }
                Err(e) => return Err(e),
            };
            rep.checks += 1;
            rep.min_gap_ratio = min_gap(rep.min_gap_ratio, after.gap_ratio);
            if after.rank != before.rank {
                rep.mismatches.push(RankMismatch {
                    tuple: t,
                    flow: fs,
                    before: before.rank,
                    after: after.rank,
                });
            }
        }
    }
    rep.pass = rep.mismatches.is_empty();
    Ok(rep)
}

/// Rank-stratum invariance on `cfg.trials` sampled `n`-tuples.
pub fn check_rank_invariance(
    spec: &ActionSpec,
    n: usize,
    cfg: &SampleCfg,
    flows: usize,
) -> Result<InvarianceReport> {
    cfg.validate()?;
    let tuples = (0..cfg.trials as u64)
        .map(|t| sample_tuple(spec, n, cfg, t))
        .collect::<Result<Vec<_>>>()?;
    rank_invariance_on(spec, &tuples, cfg, flows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum DetValue {
    Exact(#[serde(serialize_with = "crate::rational::serialize_rational")] BigRational),
    Float(f64),
}

impl DetValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            DetValue::Exact(q) => crate::rational::to_f64(q),
            DetValue::Float(x) => *x,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            DetValue::Exact(q) => q.is_zero(),
            DetValue::Float(x) => *x == 0.0,
        }
    }
}

/// Determinant of a square Lie matrix, exact when the tuple is.
pub fn lie_determinant(spec: &ActionSpec, tuple: &PointTuple) -> Result<DetValue> {
    let rows = spec.group_dim();
    let cols = tuple.order() * spec.dim();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    match lie_matrix(spec, tuple)?.entries {
        Entries::Exact(m) => Ok(DetValue::Exact(exact::determinant(&m))),
        Entries::Float(m) => Ok(DetValue::Float(float_det(&m))),
    }
}

fn float_det(m: &DMatrix<f64>) -> f64 {
    m.clone().lu().determinant()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetSample {
    pub tuple: usize,
    pub before: DetValue,
    /// `|det|` after each flow that stayed in the domain.
    pub after: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetInvarianceReport {
    pub applicable: bool,
    pub message: String,
    pub order: usize,
    pub flows_per_tuple: usize,
    /// Tuples with two coincident points, where the determinant vanishes.
    pub on_variety: Vec<DetSample>,
    pub on_variety_pass: bool,
    /// Generic tuples. The bounded-change test here is a numerical sanity
    /// check, not an invariance statement.
    pub off_variety: Vec<DetSample>,
    pub off_variety_sanity: bool,
    pub skipped: usize,
    pub log: Vec<String>,
    pub pass: bool,
}

impl DetInvarianceReport {
    fn skipped(message: String) -> DetInvarianceReport {
        DetInvarianceReport {
            applicable: false,
            message,
            order: 0,
            flows_per_tuple: 0,
            on_variety: Vec::new(),
            on_variety_pass: true,
            off_variety: Vec::new(),
            off_variety_sanity: true,
            skipped: 0,
            log: Vec::new(),
            pass: true,
        }
    }
}

#[derive(Default)]
struct Tally {
    skipped: usize,
    log: Vec<String>,
}

fn det_sample(
    spec: &ActionSpec,
    tuple: &PointTuple,
    index: usize,
    flows: impl Iterator<Item = FlowSpec>,
    tally: &mut Tally,
) -> Result<DetSample> {
    let before = lie_determinant(spec, tuple)?;
    let points = tuple.to_float();
    let mut after = Vec::with_capacity(flows.size_hint().0);
    for fs in flows {
        match flow_tuple(spec, &fs, &points)
            .and_then(|p| lie_determinant(spec, &PointTuple::Float(p)))
        {
            Ok(d) => after.push(d.to_f64().abs()),
            Err(e @ (Error::DomainExit { .. } | Error::Eval { .. })) => {
                tally.skipped += 1;
                tally.log.push(format!("tuple {index}: {e}"));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(DetSample {
        tuple: index,
        before,
        after,
    })
}

/// Checks that flows keep coincident-point tuples on `det = 0` and keep
/// generic tuples away from it.
pub fn check_det_invariance(
    spec: &ActionSpec,
    cfg: &SampleCfg,
    flows: usize,
) -> Result<DetInvarianceReport> {
    cfg.validate()?;
    let (r, m) = (spec.group_dim(), spec.dim());
    if r % m != 0 {
        return Ok(DetInvarianceReport::skipped(format!(
            "no order n gives a square Lie matrix: r = {r} is not a multiple of m = {m}"
        )));
    }
    let n = r / m;
    let mut tally = Tally::default();
    let mut on_variety = Vec::new();
    let mut message = format!("square Lie matrix at order {n}");
    if n >= 2 {
        for t in 0..cfg.trials {
            let tail = sample_tuple(spec, n - 1, cfg, t as u64)?;
            let tuple = tail.prefix(1).concat(&tail);
            on_variety.push(det_sample(
                spec,
                &tuple,
                t,
                sampled_flows(r, cfg.seed, t, flows),
                &mut tally,
            )?);
        }
    } else {
        message.push_str(
            "; a single point has no coincident-point variety, only generic tuples are checked",
        );
    }
    let mut off_variety = Vec::new();
    let salt = cfg.trials;
    for t in 0..cfg.trials {
        // a trial stream distinct from the on-variety tails
        let tuple = sample_tuple(spec, n, cfg, (salt + t) as u64)?;
        off_variety.push(det_sample(
            spec,
            &tuple,
            t,
            sampled_flows(r, cfg.seed, salt + t, flows),
            &mut tally,
        )?);
    }
    let on_variety_pass = on_variety.iter().all(|s| {
        let start_ok = match &s.before {
            DetValue::Exact(q) => q.is_zero(),
            DetValue::Float(x) => x.abs() <= DET_ZERO,
        };
        start_ok && s.after.iter().all(|&d| d <= DET_ZERO)
    });
    let off_variety_sanity = off_variety.iter().all(|s| {
        let base = s.before.to_f64().abs();
        base > 0.0 && s.after.iter().all(|&d| d > base / 10.0 && d < base * 10.0)
    });
    Ok(DetInvarianceReport {
        applicable: true,
        message,
        order: n,
        flows_per_tuple: flows,
        on_variety,
        on_variety_pass,
        off_variety,
        off_variety_sanity,
        skipped: tally.skipped,
        log: tally.log,
        pass: on_variety_pass && off_variety_sanity,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Freeness {
    LocallyFree,
    NotLocallyFreeHere,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FreenessReport {
    pub rank: usize,
    pub required: usize,
    pub verdict: Freeness,
    pub caveat: String,
}

pub const FREENESS_CAVEAT: &str = "full rank gives a discrete isotropy group; \
    whether that group is trivial cannot be read off the generators";

/// Local freeness at `tuple`: the generators span an `r`-dimensional space.
pub fn local_freeness_check(
    spec: &ActionSpec,
    tuple: &PointTuple,
    tol: f64,
) -> Result<FreenessReport> {
    let rank = rank(&lie_matrix(spec, tuple)?, tol)?.rank;
    let r = spec.group_dim();
    Ok(FreenessReport {
        rank,
        required: r,
        verdict: if rank == r {
            Freeness::LocallyFree
        } else {
            Freeness::NotLocallyFreeHere
        },
        caveat: FREENESS_CAVEAT.into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actionmodel::builtin_fixture;

    fn action(name: &str) -> ActionSpec {
        builtin_fixture(name).unwrap().into_action().unwrap()
    }

    #[test]
    fn bump_effectiveness_depends_on_region() {
        let bump = action("bump");
        let cfg = SampleCfg::default();
        let pos = effectiveness_on_region(&bump, bump.region("pos").unwrap(), &cfg).unwrap();
        assert_eq!(pos.max_rank_found, 1);
        assert_eq!(pos.verdict, Effectiveness::HeuristicNotEffective);
        let sym = effectiveness_on_region(&bump, bump.region("sym").unwrap(), &cfg).unwrap();
        assert_eq!(sym.max_rank_found, 2);
        assert_eq!(sym.verdict, Effectiveness::Effective);
        let re = rank(&lie_matrix(&bump, &sym.witness).unwrap(), cfg.tol).unwrap();
        assert_eq!(re.rank, 2);
    }

    #[test]
    fn gl3_is_not_effective() {
        let gl3 = action("gl3");
        let rep = effectiveness_on_region(&gl3, &Region::unit(2), &SampleCfg::default()).unwrap();
        assert_eq!((rep.max_rank_found, rep.required), (8, 9));
        assert_eq!(rep.verdict, Effectiveness::NotEffective);
    }

    #[test]
    fn se2_rank_strata_are_invariant() {
        let se2 = action("se2");
        let cfg = SampleCfg {
            trials: 8,
            ..SampleCfg::default()
        };
        let rep = check_rank_invariance(&se2, 2, &cfg, 5).unwrap();
        assert!(rep.pass, "{:?}", rep.mismatches);
        assert!(rep.ranks.iter().all(|&r| r == 3));
        assert_eq!(rep.checks, 40);

        let diag = PointTuple::parse("1,2;1,2", Backend::Float).unwrap();
        let rep = rank_invariance_on(&se2, &[diag], &cfg, 5).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.ranks, vec![2]);
    }

    #[test]
    fn sim2_determinant() {
        let sim2 = action("sim2");
        let t = PointTuple::parse("0,0;1,0", Backend::Exact).unwrap();
        assert_eq!(
            lie_determinant(&sim2, &t).unwrap(),
            DetValue::Exact(BigRational::from_integer(1.into()))
        );
        let d = PointTuple::parse("1/3,2/5;1/3,2/5", Backend::Exact).unwrap();
        assert!(lie_determinant(&sim2, &d).unwrap().is_zero());
        let f = PointTuple::parse("0.25,-0.5;0.75,0.5", Backend::Float).unwrap();
        // (d - b)^2 + (a - c)^2
        assert!((lie_determinant(&sim2, &f).unwrap().to_f64() - 1.25).abs() < 1e-12);
        let se2 = action("se2");
        assert!(matches!(
            lie_determinant(&se2, &t),
            Err(Error::NotSquare { rows: 3, cols: 4 })
        ));
    }

    #[test]
    fn sim2_det_zero_set_is_invariant() {
        let cfg = SampleCfg {
            trials: 6,
            ..SampleCfg::default()
        };
        let rep = check_det_invariance(&action("sim2"), &cfg, 4).unwrap();
        assert!(rep.applicable);
        assert!(rep.on_variety_pass && rep.off_variety_sanity, "{rep:?}");
        assert_eq!(rep.on_variety.len(), 6);
    }

    #[test]
    fn det_invariance_skips_non_square() {
        let rep = check_det_invariance(&action("se2"), &SampleCfg::default(), 2).unwrap();
        assert!(!rep.applicable && rep.pass);
        assert!(rep.message.contains("not a multiple"));
    }

    #[test]
    fn freeness_examples() {
        let tol = 1e-9;
        let se2 = action("se2");
        let f = |s: &str| PointTuple::parse(s, Backend::Float).unwrap();
        assert_eq!(
            local_freeness_check(&se2, &f("0,0;1,0"), tol)
                .unwrap()
                .verdict,
            Freeness::LocallyFree
        );
        assert_eq!(
            local_freeness_check(&se2, &f("1,2;1,2"), tol)
                .unwrap()
                .verdict,
            Freeness::NotLocallyFreeHere
        );
        let polar = local_freeness_check(&action("polar"), &f("1,0;2,0"), tol).unwrap();
        assert_eq!(polar.verdict, Freeness::LocallyFree);
        assert!(!polar.caveat.is_empty());
    }
}

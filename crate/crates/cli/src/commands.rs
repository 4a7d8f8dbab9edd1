use std::fmt::Write;
use std::path::Path;

use jointorbit::actionmodel::{fixture_source, sample_tuple};
use jointorbit::diagnostics::{self, Effectiveness};
use jointorbit::independence::{self, Independence, Relation};
use jointorbit::jointmatrix::{lie_matrix, wronskian_matrix, JointMatrix, PointTuple};
use jointorbit::rankcore::{self, RankReport};
use jointorbit::stabilizer::{self, Verdict};
use jointorbit::{ActionSpec, Document, Error, FunctionFamily, Region, Result, SampleCfg};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub struct Input {
    pub digest: String,
    pub doc: Document,
}

impl Input {
    /// Reads a spec file. A missing `fixtures/NAME` path falls back to the
    /// built-in fixture of that name.
    pub fn load(path: &str) -> Result<Input> {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                let name = path
                    .strip_prefix("fixtures/")
                    .map(|n| n.strip_suffix(".json").unwrap_or(n));
                match name.and_then(fixture_source) {
                    Some(src) if !Path::new(path).exists() => src.to_string(),
                    _ => return Err(Error::Config(format!("cannot read `{path}`: {e}"))),
                }
            }
        };
        let doc = jointorbit::load_document(&text)?;
        let digest = format!("sha256:{:x}", Sha256::digest(text.as_bytes()));
        Ok(Input { digest, doc })
    }

    fn action(&self) -> Result<&ActionSpec> {
        match &self.doc {
            Document::Action(a) => Ok(a),
            Document::Functions(_) => Err(Error::Spec("expected a spec of kind \"action\"".into())),
        }
    }

    fn family(&self) -> Result<&FunctionFamily> {
        match &self.doc {
            Document::Functions(f) => Ok(f),
            Document::Action(_) => Err(Error::Spec("expected a spec of kind \"functions\"".into())),
        }
    }
}

pub struct Outcome {
    pub result: Value,
    pub summary: String,
    pub warnings: Vec<String>,
    /// A check ran to completion and did not hold.
    pub failed: bool,
}

impl Outcome {
    fn new<T: Serialize>(result: &T, summary: String) -> Outcome {
        Outcome {
            result: serde_json::to_value(result).expect("reports serialize"),
            summary,
            warnings: Vec::new(),
            failed: false,
        }
    }
}

fn tuple_list(v: &[usize]) -> String {
    let parts: Vec<String> = v.iter().map(usize::to_string).collect();
    format!("({})", parts.join(", "))
}

pub fn stabilize(input: &Input, cfg: &SampleCfg) -> Result<Outcome> {
    let spec = input.action()?;
    let rep = stabilizer::stabilize(spec, cfg)?;
    let verdict = match rep.effective_on_subsets_verdict {
        Verdict::Yes => "yes".to_string(),
        Verdict::No => format!("no ({} < {})", rep.s_stab, rep.group_dim),
        Verdict::Heuristic => format!("heuristic no ({} < {})", rep.s_stab, rep.group_dim),
    };
    let mut summary = String::new();
    writeln!(summary, "s = {}", tuple_list(&rep.s)).unwrap();
    writeln!(summary, "stabilization order n0 = {}", rep.n0).unwrap();
    writeln!(summary, "stabilization dimension = {}", rep.s_stab).unwrap();
    writeln!(
        summary,
        "invariant counts = {}",
        tuple_list(&rep.invariant_counts)
    )
    .unwrap();
    write!(summary, "effective on subsets: {verdict}").unwrap();
    if rep.heuristic {
        summary.push_str("\n(non-polynomial generators: sampled ranks are heuristic)");
    }
    let mut out = Outcome::new(&rep, summary);
    out.warnings = rep.warnings.clone();
    Ok(out)
}

fn rank_payload(mat: &JointMatrix, report: &RankReport, dump: bool) -> Value {
    let mut v = json!({
        "order": mat.order(),
        "rows": mat.nrows(),
        "cols": mat.ncols(),
        "rank": report.rank,
        "report": report,
        "tuple": mat.tuple,
    });
    if dump {
        v["matrix"] = json!(mat.entry_strings());
    }
    v
}

pub fn rank(
    input: &Input,
    cfg: &SampleCfg,
    order: Option<usize>,
    points: Option<&str>,
    dump: bool,
) -> Result<Outcome> {
    let (polynomial, dim) = match &input.doc {
        Document::Action(a) => (a.is_polynomial(), a.dim()),
        Document::Functions(f) => (f.is_polynomial(), f.xdim()),
    };
    let build = |tuple: &PointTuple| match &input.doc {
        Document::Action(a) => lie_matrix(a, tuple),
        Document::Functions(f) => wronskian_matrix(f, tuple),
    };
    if let Some(text) = points {
        let tuple = PointTuple::parse(text, cfg.resolve_backend(polynomial)?)?;
        tuple.check_dim(dim)?;
        if let Some(n) = order {
            if n != tuple.order() {
                return Err(Error::Points(format!(
                    "--order {n} but {} point(s) given",
                    tuple.order()
                )));
            }
        }
        let mat = build(&tuple)?;
        let report = rankcore::rank(&mat, cfg.tol)?;
        let summary = format!("rank = {} ({} x {})", report.rank, mat.nrows(), mat.ncols());
        return Ok(Outcome::new(&rank_payload(&mat, &report, dump), summary));
    }
    let n = order.unwrap_or(1);
    let g = match &input.doc {
        Document::Action(a) => rankcore::generic_rank(a, n, cfg)?,
        Document::Functions(f) => {
            let region = cfg.region_for(f.xdim())?;
            independence::generic_wronskian_rank(f, n, &region, cfg)?
        }
    };
    let mat = build(&g.witness)?;
    let report = rankcore::rank(&mat, cfg.tol)?;
    let mut v = rank_payload(&mat, &report, dump);
    v["generic"] = json!(g);
    let summary = format!(
        "generic rank = {} at order {n} ({} of {} sampled tuples attain it)",
        g.rank, g.attained, g.trials_used
    );
    Ok(Outcome::new(&v, summary))
}

fn resolve_region(
    named: Option<&ActionSpec>,
    text: Option<&str>,
    cfg: &SampleCfg,
    dim: usize,
) -> Result<Region> {
    match text {
        None => cfg.region_for(dim),
        Some(t) => {
            if let Some(r) = named.and_then(|s| s.region(t)) {
                return Ok(r.clone());
            }
            if t.contains(',') {
                Region::parse(t)
            } else {
                Err(Error::Config(format!("unknown region `{t}`")))
            }
        }
    }
}

pub fn effective(input: &Input, cfg: &SampleCfg, region: Option<&str>) -> Result<Outcome> {
    let spec = input.action()?;
    let region = resolve_region(Some(spec), region, cfg, spec.dim())?;
    let rep = diagnostics::effectiveness_on_region(spec, &region, cfg)?;
    let verdict = match rep.verdict {
        Effectiveness::Effective => "effective".to_string(),
        Effectiveness::NotEffective => {
            format!("not effective ({} < {})", rep.max_rank_found, rep.required)
        }
        Effectiveness::HeuristicNotEffective => format!(
            "not effective ({} < {}; heuristic, generators are not polynomial)",
            rep.max_rank_found, rep.required
        ),
    };
    let summary = format!(
        "max rank = {} of {}\n{verdict}",
        rep.max_rank_found, rep.required
    );
    Ok(Outcome::new(&rep, summary))
}

pub fn independent(input: &Input, cfg: &SampleCfg, region: Option<&str>) -> Result<Outcome> {
    let family = input.family()?;
    let region = resolve_region(None, region, cfg, family.xdim())?;
    let rep = independence::independence_on_region(family, &region, cfg)?;
    let mut summary = format!(
        "max Wronskian rank = {} of {}\n",
        rep.max_wronskian_rank, rep.r
    );
    summary.push_str(match rep.verdict {
        Independence::Independent => "independent",
        Independence::DependentOnRegion => "dependent on region",
        Independence::HeuristicDependent => "dependent on region (heuristic)",
    });
    if let Some(rel) = &rep.relation {
        let parts: Vec<String> = match rel {
            Relation::Exact(v) => v
                .iter()
                .map(jointorbit::rational::format_rational)
                .collect(),
            Relation::Float(v) => v.iter().map(|x| x.to_string()).collect(),
        };
        write!(summary, "\nrelation c = ({})", parts.join(", ")).unwrap();
    }
    let mut out = Outcome::new(&rep, summary);
    out.warnings = rep.warnings.clone();
    Ok(out)
}

pub fn invariants(input: &Input, cfg: &SampleCfg, order: usize) -> Result<Outcome> {
    let spec = input.action()?;
    let mut warnings = Vec::new();
    let g = stabilizer::confident_rank(spec, order, cfg, 0, &mut warnings)?;
    let count = order * spec.dim() - g.rank;
    let v = json!({
        "order": order,
        "dim": order * spec.dim(),
        "orbit_dim": g.rank,
        "invariants": count,
        "witness": g.witness,
    });
    let mut out = Outcome::new(&v, format!("{count}"));
    out.warnings = warnings;
    Ok(out)
}

pub fn check_invariance(
    input: &Input,
    cfg: &SampleCfg,
    order: Option<usize>,
    flows: usize,
) -> Result<Outcome> {
    let spec = input.action()?;
    let n = match order {
        Some(n) => n,
        None => stabilizer::stabilize(spec, cfg)?.n0,
    };
    let ranks = diagnostics::check_rank_invariance(spec, n, cfg, flows)?;
    let det = diagnostics::check_det_invariance(spec, cfg, flows)?;
    let mut summary = format!(
        "rank strata at order {n}: {} ({} checks, {} skipped, {} mismatches)",
        if ranks.pass {
            "invariant"
        } else {
            "NOT invariant"
        },
        ranks.checks,
        ranks.skipped,
        ranks.mismatches.len()
    );
    if det.applicable {
        write!(
            summary,
            "\nLie determinant zero set at order {}: {}\noff-zero-set sanity check: {}",
            det.order,
            if det.on_variety_pass {
                "invariant"
            } else {
                "NOT invariant"
            },
            if det.off_variety_sanity {
                "ok"
            } else {
                "failed"
            },
        )
        .unwrap();
    } else {
        write!(summary, "\nLie determinant check skipped: {}", det.message).unwrap();
    }
    let failed = !ranks.pass || !det.pass;
    let mut warnings: Vec<String> = ranks.log.clone();
    warnings.extend(det.log.iter().cloned());
    let v = json!({ "rank_invariance": ranks, "det_invariance": det });
    let mut out = Outcome::new(&v, summary);
    out.warnings = warnings;
    out.failed = failed;
    Ok(out)
}

pub fn lie_det(input: &Input, cfg: &SampleCfg, points: Option<&str>) -> Result<Outcome> {
    let spec = input.action()?;
    let tuple = match points {
        Some(text) => {
            let t = PointTuple::parse(text, cfg.resolve_backend(spec.is_polynomial())?)?;
            t.check_dim(spec.dim())?;
            t
        }
        None => {
            let (r, m) = (spec.group_dim(), spec.dim());
            if r % m != 0 {
                return Err(Error::NotSquare {
                    rows: r,
                    cols: m * (r / m + 1),
                });
            }
            sample_tuple(spec, r / m, cfg, 0)?
        }
    };
    let det = diagnostics::lie_determinant(spec, &tuple)?;
    let shown = match &det {
        diagnostics::DetValue::Exact(q) => jointorbit::rational::format_rational(q),
        diagnostics::DetValue::Float(x) => x.to_string(),
    };
    let v = json!({ "det": det, "tuple": tuple });
    Ok(Outcome::new(&v, shown))
}

pub fn complete_tuple(input: &Input, cfg: &SampleCfg, point: &str) -> Result<Outcome> {
    let spec = input.action()?;
    let z1 = PointTuple::parse(point, cfg.resolve_backend(spec.is_polynomial())?)?;
    let rep = stabilizer::stabilize(spec, cfg)?;
    let c = stabilizer::complete_tuple(spec, &z1, &rep, cfg)?;
    let summary = format!(
        "rank {} = s_{} at order {} after {} attempt(s)",
        c.rank,
        rep.n0,
        c.tuple.order(),
        c.attempts
    );
    let v = json!({ "completion": c, "n0": rep.n0, "s_stab": rep.s_stab });
    let mut out = Outcome::new(&v, summary);
    out.warnings = rep.warnings;
    Ok(out)
}

//! Action specifications, function families, regions and sampling settings.
//!
//! A manifold here is a single coordinate chart, an open subset of `R^m`.
//! An action is given by `r` infinitesimal generators, each a vector field
//! with `m` coefficient expressions over the chart coordinates.

mod fixtures;
mod io;
mod sampling;

use std::collections::BTreeMap;

use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exprlang::{Coefficient, EvalError};

pub use fixtures::{builtin_fixture, bump_family, fixture_source, Fixture, FIXTURE_NAMES};
pub use io::{family_to_json, load_document, load_family, load_spec, spec_to_json, Document};
pub(crate) use sampling::trial_rng;
pub use sampling::{sample_points, sample_tuple, EXACT_GRID};

/// One infinitesimal generator `sum_i xi^i(x) d/dx^i`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub coefficients: Vec<Coefficient>,
}

impl VectorField {
    pub fn eval_float(&self, point: &[f64]) -> Result<Vec<f64>, EvalError> {
        self.coefficients
            .iter()
            .map(|c| c.eval_float(point))
            .collect()
    }

    pub fn eval_exact(&self, point: &[BigRational]) -> Result<Vec<BigRational>, EvalError> {
        self.coefficients
            .iter()
            .map(|c| c.eval_exact(point))
            .collect()
    }

    pub fn is_polynomial(&self) -> bool {
        self.coefficients.iter().all(Coefficient::is_polynomial)
    }
}

/// A Lie algebra basis acting on an `m`-dimensional chart.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionSpec {
    pub name: String,
    pub coords: Vec<String>,
    pub generators: Vec<VectorField>,
    pub regions: BTreeMap<String, Region>,
    pub analytic_hint: bool,
}

impl ActionSpec {
    /// Builds a spec from coefficient strings, validating arity and names.
    pub fn from_strings<C: AsRef<str>, S: AsRef<str>>(
        name: &str,
        coords: &[C],
        generators: &[Vec<S>],
    ) -> Result<ActionSpec> {
        let coords: Vec<String> = coords.iter().map(|c| c.as_ref().to_string()).collect();
        crate::exprlang::validate_coords(&coords).map_err(Error::Spec)?;
        if generators.is_empty() {
            return Err(Error::Spec("at least one generator is required".into()));
        }
        let m = coords.len();
        let mut fields = Vec::with_capacity(generators.len());
        for (k, g) in generators.iter().enumerate() {
            if g.len() != m {
                return Err(Error::Spec(format!(
                    "generator {} has {} coefficients, expected {m}",
                    k + 1,
                    g.len()
                )));
            }
            let coefficients = g
                .iter()
                .enumerate()
                .map(|(i, text)| {
                    Coefficient::parse(text.as_ref(), &coords).map_err(|source| Error::Parse {
                        context: format!("generator {}, component {}", k + 1, i + 1),
                        source,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            fields.push(VectorField { coefficients });
        }
        Ok(ActionSpec {
            name: name.to_string(),
            coords,
            generators: fields,
            regions: BTreeMap::new(),
            analytic_hint: false,
        })
    }

    pub fn with_region(mut self, name: &str, region: Region) -> Result<ActionSpec> {
        if region.dim() != self.dim() {
            return Err(Error::Spec(format!(
                "region `{name}` has dimension {}, expected {}",
                region.dim(),
                self.dim()
            )));
        }
        self.regions.insert(name.to_string(), region);
        Ok(self)
    }

    /// Manifold dimension `m`.
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Number of generators `r`.
    pub fn group_dim(&self) -> usize {
        self.generators.len()
    }

    pub fn is_polynomial(&self) -> bool {
        self.generators.iter().all(VectorField::is_polynomial)
    }

    pub fn region(&self, name: &str) -> Option<&Region> {
        self.regions.get(name)
    }
}

/// `r` vector-valued functions `X -> R^q` on a `p`-dimensional chart.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionFamily {
    pub name: String,
    pub xcoords: Vec<String>,
    pub qdim: usize,
    pub functions: Vec<Vec<Coefficient>>,
}

impl FunctionFamily {
    pub fn from_strings<C: AsRef<str>, S: AsRef<str>>(
        name: &str,
        xcoords: &[C],
        qdim: usize,
        functions: &[Vec<S>],
    ) -> Result<FunctionFamily> {
        let xcoords: Vec<String> = xcoords.iter().map(|c| c.as_ref().to_string()).collect();
        crate::exprlang::validate_coords(&xcoords).map_err(Error::Spec)?;
        if qdim == 0 {
            return Err(Error::Spec("target dimension must be positive".into()));
        }
        if functions.is_empty() {
            return Err(Error::Spec("at least one function is required".into()));
        }
        let mut out = Vec::with_capacity(functions.len());
        for (k, f) in functions.iter().enumerate() {
            if f.len() != qdim {
                return Err(Error::Spec(format!(
                    "function {} has {} components, expected {qdim}",
                    k + 1,
                    f.len()
                )));
            }
            let comps = f
                .iter()
                .enumerate()
                .map(|(l, text)| {
                    Coefficient::parse(text.as_ref(), &xcoords).map_err(|source| Error::Parse {
                        context: format!("function {}, component {}", k + 1, l + 1),
                        source,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            out.push(comps);
        }
        Ok(FunctionFamily {
            name: name.to_string(),
            xcoords,
            qdim,
            functions: out,
        })
    }

    /// Dimension `p` of the source chart.
    pub fn xdim(&self) -> usize {
        self.xcoords.len()
    }

    /// Number of functions `r`.
    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn is_polynomial(&self) -> bool {
        self.functions
            .iter()
            .all(|f| f.iter().all(Coefficient::is_polynomial))
    }
}

/// An open axis-aligned box.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Region {
    bounds: Vec<(f64, f64)>,
}

impl Region {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Region> {
        if bounds.is_empty() {
            return Err(Error::Spec("region needs at least one interval".into()));
        }
        for (i, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Spec(format!(
                    "interval {} ({lo}, {hi}) must be finite with lo < hi",
                    i + 1
                )));
            }
        }
        Ok(Region { bounds })
    }

    /// The default sampling box `(-1, 1)^dim`.
    pub fn unit(dim: usize) -> Region {
        Region {
            bounds: vec![(-1.0, 1.0); dim],
        }
    }

    /// Parses `"lo,hi;lo,hi;..."`.
    pub fn parse(text: &str) -> Result<Region> {
        let bounds = text
            .split(';')
            .map(|part| {
                let mut it = part.split(',').map(|s| s.trim().parse::<f64>());
                match (it.next(), it.next(), it.next()) {
                    (Some(Ok(lo)), Some(Ok(hi)), None) => Ok((lo, hi)),
                    _ => Err(Error::Config(format!(
                        "bad interval `{part}`, expected lo,hi"
                    ))),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Region::new(bounds).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dim()
            && point
                .iter()
                .zip(&self.bounds)
                .all(|(x, (lo, hi))| lo < x && x < hi)
    }

    /// `self x other`, used to thicken a base region by fiber directions.
    pub fn product(&self, other: &Region) -> Region {
        let mut bounds = self.bounds.clone();
        bounds.extend_from_slice(&other.bounds);
        Region { bounds }
    }

    /// Bounds as exact rationals (shortest decimal of each endpoint).
    pub fn exact_bounds(&self) -> Vec<(BigRational, BigRational)> {
        self.bounds
            .iter()
            .map(|&(lo, hi)| {
                (
                    crate::rational::rational_from_f64(lo).expect("finite bound"),
                    crate::rational::rational_from_f64(hi).expect("finite bound"),
                )
            })
            .collect()
    }
}

/// Which arithmetic a computation runs in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Float,
    Exact,
}

/// User preference; `Auto` picks exact arithmetic for polynomial data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendChoice {
    #[default]
    Auto,
    Exact,
    Float,
}

/// Sampling settings shared by every randomized operation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleCfg {
    pub trials: usize,
    pub seed: u64,
    /// Sampling box; `None` means `(-1, 1)^m`.
    #[serde(rename = "box")]
    pub region: Option<Region>,
    pub tol: f64,
    pub backend: BackendChoice,
}

impl Default for SampleCfg {
    fn default() -> Self {
        SampleCfg {
            trials: 32,
            seed: 42,
            region: None,
            tol: 1e-9,
            backend: BackendChoice::Auto,
        }
    }
}

impl SampleCfg {
    pub fn with_seed(seed: u64) -> Self {
        SampleCfg {
            seed,
            ..SampleCfg::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::Config(format!(
                "tol {} must lie in (0, 1)",
                self.tol
            )));
        }
        Ok(())
    }

    /// The sampling box for a chart of dimension `dim`.
    pub fn region_for(&self, dim: usize) -> Result<Region> {
        match &self.region {
            None => Ok(Region::unit(dim)),
            Some(r) if r.dim() == dim => Ok(r.clone()),
            Some(r) => Err(Error::Config(format!(
                "box has dimension {}, expected {dim}",
                r.dim()
            ))),
        }
    }

    pub fn with_region(&self, region: Region) -> SampleCfg {
        SampleCfg {
            region: Some(region),
            ..self.clone()
        }
    }

    pub fn resolve_backend(&self, polynomial: bool) -> Result<Backend> {
        match (self.backend, polynomial) {
            (BackendChoice::Float, _) => Ok(Backend::Float),
            (BackendChoice::Auto, true) | (BackendChoice::Exact, true) => Ok(Backend::Exact),
            (BackendChoice::Auto, false) => Ok(Backend::Float),
            (BackendChoice::Exact, false) => Err(Error::ExactUnavailable(
                "some coefficient is not polynomial".into(),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arity_mismatch_is_rejected() {
        let err = ActionSpec::from_strings("bad", &["x", "y"], &[vec!["1"]]).unwrap_err();
        assert!(matches!(err, Error::Spec(ref m) if m.contains("1 coefficients, expected 2")));
    }

    #[test]
    fn duplicate_coordinates_are_rejected() {
        let err = ActionSpec::from_strings("bad", &["x", "x"], &[vec!["1", "0"]]).unwrap_err();
        assert!(matches!(err, Error::Spec(ref m) if m.contains("duplicate")));
    }

    #[test]
    fn parse_errors_carry_location() {
        let err = ActionSpec::from_strings("bad", &["x", "y"], &[vec!["1", "x +"]]).unwrap_err();
        match err {
            Error::Parse { context, source } => {
                assert_eq!(context, "generator 1, component 2");
                assert_eq!(source.offset, 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn region_validation_and_parsing() {
        assert!(Region::new(vec![(1.0, 1.0)]).is_err());
        assert!(Region::new(vec![(0.0, f64::INFINITY)]).is_err());
        let r = Region::parse("0.1,1; -1,1").unwrap();
        assert_eq!(r.bounds(), &[(0.1, 1.0), (-1.0, 1.0)]);
        assert!(r.contains(&[0.5, 0.0]));
        assert!(!r.contains(&[0.1, 0.0]));
        assert!(Region::parse("0,1,2").is_err());
        let q = r.exact_bounds();
        assert_eq!(q[0].0, BigRational::new(1.into(), 10.into()));
    }

    #[test]
    fn cfg_validation() {
        assert!(SampleCfg::default().validate().is_ok());
        let bad = SampleCfg {
            tol: 1.0,
            ..SampleCfg::default()
        };
        assert!(bad.validate().is_err());
        let bad = SampleCfg {
            trials: 0,
            ..SampleCfg::default()
        };
        assert!(bad.validate().is_err());
        let cfg = SampleCfg::default().with_region(Region::unit(3));
        assert!(cfg.region_for(2).is_err());
    }

    #[test]
    fn backend_resolution() {
        let mut cfg = SampleCfg::default();
        assert_eq!(cfg.resolve_backend(true).unwrap(), Backend::Exact);
        assert_eq!(cfg.resolve_backend(false).unwrap(), Backend::Float);
        cfg.backend = BackendChoice::Exact;
        assert!(matches!(
            cfg.resolve_backend(false),
            Err(Error::ExactUnavailable(_))
        ));
        cfg.backend = BackendChoice::Float;
        assert_eq!(cfg.resolve_backend(true).unwrap(), Backend::Float);
    }
}

//! Group elements near the identity, realized as time-`t` flows of Lie
//! algebra elements `sum_k a_k v_k`.

use rand::Rng;
use serde::Serialize;

use crate::actionmodel::{trial_rng, ActionSpec};
use crate::error::{Error, Result};

/// A Lie algebra element together with its integration parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowSpec {
    pub coeffs: Vec<f64>,
    pub time: f64,
    pub steps: usize,
}

pub const DEFAULT_STEPS: usize = 1024;

/// Salt separating flow randomness from tuple randomness under one seed.
const FLOW_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

impl FlowSpec {
    pub fn new(coeffs: Vec<f64>, time: f64) -> FlowSpec {
        FlowSpec {
            coeffs,
            time,
            steps: DEFAULT_STEPS,
        }
    }

    pub fn with_steps(mut self, steps: usize) -> FlowSpec {
        self.steps = steps;
        self
    }

    pub fn validate(&self, r: usize) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::Config("flow needs at least one step".into()));
        }
        if self.coeffs.len() != r {
            return Err(Error::Config(format!(
                "flow has {} coefficients, the action has {r} generators",
                self.coeffs.len()
            )));
        }
        if !self.time.is_finite() || self.coeffs.iter().any(|a| !a.is_finite()) {
            return Err(Error::Config("flow parameters must be finite".into()));
        }
        Ok(())
    }

    /// A random element with `|a| <= max_norm` and unit time, drawn
    /// deterministically from `(seed, index)`.
    pub fn sample(r: usize, max_norm: f64, seed: u64, index: u64) -> FlowSpec {
        let mut rng = trial_rng(seed ^ FLOW_SALT, index);
        let dir: Vec<f64> = (0..r).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = dir.iter().map(|a| a * a).sum::<f64>().sqrt();
        let len: f64 = max_norm * rng.random::<f64>();
        let coeffs = if norm == 0.0 {
            vec![0.0; r]
        } else {
            dir.iter().map(|a| a / norm * len).collect()
        };
        FlowSpec::new(coeffs, 1.0)
    }
}

fn velocity(spec: &ActionSpec, fs: &FlowSpec, z: &[f64], step: usize) -> Result<Vec<f64>> {
    let mut out = vec![0.0; z.len()];
    for (a, field) in fs.coeffs.iter().zip(&spec.generators) {
        if *a == 0.0 {
            continue;
        }
        let v = field.eval_float(z).map_err(|e| Error::DomainExit {
            step,
            message: e.render(&spec.coords),
        })?;
        for (o, vi) in out.iter_mut().zip(v) {
            *o += a * vi;
        }
    }
    Ok(out)
}

fn axpy(z: &[f64], h: f64, k: &[f64]) -> Vec<f64> {
    z.iter().zip(k).map(|(a, b)| a + h * b).collect()
}

/// Classical fourth-order Runge-Kutta with `fs.steps` equal steps; the global
/// error is `O(steps^-4)`.
pub fn flow(spec: &ActionSpec, fs: &FlowSpec, z: &[f64]) -> Result<Vec<f64>> {
    fs.validate(spec.group_dim())?;
    if z.len() != spec.dim() {
        return Err(Error::Points(format!(
            "point has {} coordinates, expected {}",
            z.len(),
            spec.dim()
        )));
    }
    let h = fs.time / fs.steps as f64;
    let mut z = z.to_vec();
    for step in 0..fs.steps {
        let k1 = velocity(spec, fs, &z, step)?;
        let k2 = velocity(spec, fs, &axpy(&z, h / 2.0, &k1), step)?;
        let k3 = velocity(spec, fs, &axpy(&z, h / 2.0, &k2), step)?;
        let k4 = velocity(spec, fs, &axpy(&z, h, &k3), step)?;
        for i in 0..z.len() {
            z[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if z.iter().any(|x| !x.is_finite()) {
            return Err(Error::DomainExit {
                step,
                message: "trajectory diverged".into(),
            });
        }
    }
    Ok(z)
}

/// Applies the same group element to every point of a tuple.
pub fn flow_tuple(spec: &ActionSpec, fs: &FlowSpec, tuple: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    tuple.iter().map(|z| flow(spec, fs, z)).collect()
}

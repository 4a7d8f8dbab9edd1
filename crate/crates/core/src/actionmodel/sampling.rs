use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ActionSpec, Backend, Region, SampleCfg};
use crate::error::Result;
use crate::jointmatrix::PointTuple;

/// Resolution of the exact sampling grid: each coordinate is
/// `lo + (hi - lo) * k / EXACT_GRID` with `k` uniform in `1..EXACT_GRID`.
/// On the unit box this is `(k - 10^6) / 10^6`, a numerator uniform over
/// `(-10^6, 10^6)` with denominator `10^6`.
pub const EXACT_GRID: u64 = 2_000_000;

/// Deterministic generator for trial `trial` under `seed`.
///
/// Each trial owns a ChaCha stream, so trials are reproducible in any order
/// and a tuple of order `n + 1` extends the order-`n` tuple of the same trial.
pub(crate) fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn open_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    loop {
        let u: f64 = rng.random();
        let x = lo + (hi - lo) * u;
        if lo < x && x < hi {
            return x;
        }
    }
}

/// `n` points drawn uniformly from `region`.
pub fn sample_points(
    region: &Region,
    n: usize,
    backend: Backend,
    seed: u64,
    trial: u64,
) -> PointTuple {
    let mut rng = trial_rng(seed, trial);
    match backend {
        Backend::Float => PointTuple::Float(
            (0..n)
                .map(|_| {
                    region
                        .bounds()
                        .iter()
                        .map(|&(lo, hi)| open_uniform(&mut rng, lo, hi))
                        .collect()
                })
                .collect(),
        ),
        Backend::Exact => {
            let bounds = region.exact_bounds();
            let grid = BigRational::from_integer(BigInt::from(EXACT_GRID));
            PointTuple::Exact(
                (0..n)
                    .map(|_| {
                        bounds
                            .iter()
                            .map(|(lo, hi)| {
                                let k = rng.random_range(1..EXACT_GRID);
                                let t = BigRational::from_integer(BigInt::from(k)) / &grid;
                                lo + (hi - lo) * t
                            })
                            .collect()
                    })
                    .collect(),
            )
        }
    }
}

/// Samples an `n`-point tuple for `spec` from the configured box.
pub fn sample_tuple(
    spec: &ActionSpec,
    n: usize,
    cfg: &SampleCfg,
    trial: u64,
) -> Result<PointTuple> {
    let backend = cfg.resolve_backend(spec.is_polynomial())?;
    let region = cfg.region_for(spec.dim())?;
    Ok(sample_points(&region, n, backend, cfg.seed, trial))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actionmodel::builtin_fixture;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    fn se2() -> ActionSpec {
        builtin_fixture("se2").unwrap().into_action().unwrap()
    }

    #[test]
    fn same_seed_and_trial_is_deterministic() {
        let cfg = SampleCfg::with_seed(1);
        let a = sample_tuple(&se2(), 3, &cfg, 0).unwrap();
        let b = sample_tuple(&se2(), 3, &cfg, 0).unwrap();
        assert_eq!(a, b);
        let c = sample_tuple(&se2(), 3, &cfg, 1).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn exact_samples_are_grid_rationals_inside_the_box() {
        let cfg = SampleCfg::with_seed(1);
        let t = sample_tuple(&se2(), 4, &cfg, 0).unwrap();
        let PointTuple::Exact(points) = t else {
            panic!("polynomial spec samples exactly");
        };
        let one = BigRational::from_integer(1.into());
        for p in &points {
            for x in p {
                assert!(*x > -one.clone() && *x < one);
                assert!((BigInt::from(1_000_000u32) % x.denom()) == BigInt::from(0));
            }
        }
    }

    #[test]
    fn float_samples_stay_strictly_inside() {
        let region = Region::new(vec![(0.1, 0.1000001), (-1.0, 1.0)]).unwrap();
        for trial in 0..200 {
            let t = sample_points(&region, 3, Backend::Float, 9, trial);
            for p in t.to_float() {
                assert!(region.contains(&p));
            }
        }
    }

    #[test]
    fn longer_tuples_extend_shorter_ones() {
        let cfg = SampleCfg::with_seed(5);
        let short = sample_tuple(&se2(), 2, &cfg, 3).unwrap().to_float();
        let long = sample_tuple(&se2(), 4, &cfg, 3).unwrap().to_float();
        assert_eq!(short[..], long[..2]);
    }

    #[test]
    fn trial_streams_are_independent() {
        // Contingency table of (first coordinate in trial t, first coordinate
        // in trial t + 1) over a 10 x 10 grid.
        let region = Region::unit(1);
        let n_trials = 5000u64;
        let firsts: Vec<f64> = (0..=n_trials)
            .map(|t| sample_points(&region, 1, Backend::Float, 77, t).to_float()[0][0])
            .collect();
        let bin = |x: f64| (((x + 1.0) / 2.0 * 10.0) as usize).min(9);
        let mut table = [[0f64; 10]; 10];
        for w in firsts.windows(2) {
            table[bin(w[0])][bin(w[1])] += 1.0;
        }
        let total: f64 = table.iter().flatten().sum();
        let rows: Vec<f64> = table.iter().map(|r| r.iter().sum()).collect();
        let cols: Vec<f64> = (0..10).map(|j| table.iter().map(|r| r[j]).sum()).collect();
        let mut chi2 = 0.0;
        for i in 0..10 {
            for j in 0..10 {
                let expected = rows[i] * cols[j] / total;
                chi2 += (table[i][j] - expected).powi(2) / expected;
            }
        }
        let p = 1.0 - ChiSquared::new(81.0).unwrap().cdf(chi2);
        assert!(p > 0.001, "chi2 = {chi2}, p = {p}");
    }
}

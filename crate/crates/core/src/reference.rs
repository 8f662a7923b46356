//! Fixed and randomized measurement configurations shared by tests, the CLI
//! and the benchmarks.

use nalgebra::{Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::density::{polar_params, rotation, DensityError, PolarParams, PredictedMeasurement};

/// A predicted measurement together with an observed range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Example {
    pub predicted: PredictedMeasurement,
    pub range: f64,
}

impl Example {
    pub fn params(&self) -> Result<PolarParams, DensityError> {
        polar_params(&self.predicted)
    }
}

/// Mean `(-11, 20)`, covariance `[[50, -10], [-10, 50]]`; the range is the
/// norm of the mean plus isotropic noise of variance 4 drawn from `seed`.
pub fn small_scale_example(seed: u64) -> Example {
    let mean = Vector2::new(-11.0, 20.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Vector2::<f64>::from_fn(|_, _| {
        let z: f64 = StandardNormal.sample(&mut rng);
        2.0 * z
    });
    Example {
        predicted: PredictedMeasurement::new(mean, Matrix2::new(50.0, -10.0, -10.0, 50.0)),
        range: (mean + noise).norm(),
    }
}

/// Mean `(-50, 20)` with covariance `spread * 1000 * [[7, 2], [2, 1]]`,
/// observed at the range of the mean. Small `spread` gives a bimodal
/// azimuth density.
pub fn crescent_example(spread: f64) -> Example {
    let mean = Vector2::new(-50.0, 20.0);
    Example {
        predicted: PredictedMeasurement::new(mean, spread * 1e3 * Matrix2::new(7.0, 2.0, 2.0, 1.0)),
        range: mean.norm(),
    }
}

/// Spread values of [`crescent_example`] used in the sampler comparisons.
pub const CRESCENT_SPREADS: [f64; 3] = [0.25, 0.75, 3.0];

/// Random configuration: mean uniform in `[-100, 100]^2`, covariance with a
/// random orientation, smaller eigenvalue `|mean|^2 * U(0.6, 2)` and
/// condition number `U(1, 50)`, range uniform in `[1, 3 |mean|]`.
pub fn random_example(rng: &mut impl Rng) -> Example {
    let mean = Vector2::new(rng.random_range(-100.0..100.0), rng.random_range(-100.0..100.0));
    let scale = mean.norm_squared() * rng.random_range(0.6..2.0);
    let ratio: f64 = rng.random_range(1.0..50.0);
    let rot = rotation(rng.random_range(0.0..std::f64::consts::TAU));
    let cov = rot * Matrix2::new(scale, 0.0, 0.0, scale * ratio) * rot.transpose();
    Example {
        predicted: PredictedMeasurement::new(mean, 0.5 * (cov + cov.transpose())),
        range: rng.random_range(1.0..3.0 * mean.norm()),
    }
}

//! Polar form of the predicted position density.
//!
//! A Gaussian `N(y; y_hat, V)` written in polar coordinates `(theta, r)` has
//! the exponent
//!
//! ```text
//! r |p, q| cos(theta - phi1) + A3 r^2 cos(2 theta + phi2)
//! ```
//!
//! up to a factor that does not depend on `theta`. [`PolarParams`] holds all
//! derived constants of that form for one predicted measurement.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use serde::Serialize;
use thiserror::Error;

use crate::series::BesselSeries;
use crate::special::bessel_i0_scaled;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DensityError {
    #[error("predicted measurement covariance is not symmetric positive definite: {0}")]
    NotPositiveDefinite(String),
    #[error("range must be positive, got {0}")]
    NonPositiveRange(f64),
    #[error("truncated azimuth normalizer is not positive ({0:e}); add series terms")]
    NonPositiveNormalizer(f64),
}

/// Predicted position `y_hat` and its covariance `V = H P H^T + R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictedMeasurement {
    pub mean: Vector2<f64>,
    pub cov: Matrix2<f64>,
}

impl PredictedMeasurement {
    pub fn new(mean: Vector2<f64>, cov: Matrix2<f64>) -> Self {
        Self { mean, cov }
    }

    /// Rotate the mean by `angle` and the covariance by `R V R^T`.
    pub fn rotated(&self, angle: f64) -> Self {
        let rot = rotation(angle);
        Self {
            mean: rot * self.mean,
            cov: rot * self.cov * rot.transpose(),
        }
    }
}

pub(crate) fn rotation(angle: f64) -> Matrix2<f64> {
    let (s, c) = angle.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// Derived constants of the polar density.
///
/// Classical notation in brackets: `[a b; b c] = V^-1`, `(p, q) = V^-1 y_hat`,
/// `phi1`, `A3`, `phi2`, `A1`, `A2`, `D`, `psi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolarParams {
    /// `a`
    pub info_xx: f64,
    /// `b`
    pub info_xy: f64,
    /// `c`
    pub info_yy: f64,
    /// `p`
    pub info_mean_x: f64,
    /// `q`
    pub info_mean_y: f64,
    /// `phi1 = atan2(q, p)`
    pub linear_phase: f64,
    /// `A3 = |(c - a)/4, b/2|`
    pub quadratic_gain: f64,
    /// `phi2 = atan2(b/2, (c - a)/4)`
    pub quadratic_phase: f64,
    /// `A1 = |p, q| cos(phi2/2 + phi1)`
    pub rotated_cos: f64,
    /// `A2 = |p, q| sin(phi2/2 + phi1)`
    pub rotated_sin: f64,
    /// `D = |A1, A2|`, equal to `|p, q|`.
    pub rotated_gain: f64,
    /// `psi = atan2(A2, A1)`
    pub rotated_phase: f64,
    /// `ln |2 pi V|`
    pub log_det_2pi_cov: f64,
    /// `y_hat^T V^-1 y_hat`
    pub mean_mahalanobis: f64,
}

/// Reduce an angle to `(-pi, pi]`.
pub fn wrap_pi(angle: f64) -> f64 {
    let mut a = angle.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    a
}

fn phase(y: f64, x: f64) -> f64 {
    if x == 0.0 && y == 0.0 {
        0.0
    } else {
        wrap_pi(y.atan2(x))
    }
}

pub fn polar_params(pm: &PredictedMeasurement) -> Result<PolarParams, DensityError> {
    let v = pm.cov;
    if !v.iter().all(|x| x.is_finite()) || !pm.mean.iter().all(|x| x.is_finite()) {
        return Err(DensityError::NotPositiveDefinite("non-finite entries".into()));
    }
    let asym = (v[(0, 1)] - v[(1, 0)]).abs();
    if asym > 1e-12 * v.abs().max() {
        return Err(DensityError::NotPositiveDefinite(format!(
            "off-diagonal entries differ by {asym:e}"
        )));
    }
    let v = 0.5 * (v + v.transpose());
    let det = v.determinant();
    if !(v[(0, 0)] > 0.0 && v[(1, 1)] > 0.0 && det > 0.0) {
        return Err(DensityError::NotPositiveDefinite(format!(
            "diagonal ({}, {}), determinant {det:e}",
            v[(0, 0)],
            v[(1, 1)]
        )));
    }
    let info = Matrix2::new(v[(1, 1)], -v[(0, 1)], -v[(1, 0)], v[(0, 0)]) / det;
    let (a, b, c) = (info[(0, 0)], info[(0, 1)], info[(1, 1)]);
    let info_mean = info * pm.mean;
    let (p, q) = (info_mean.x, info_mean.y);

    let linear_norm = p.hypot(q);
    let linear_phase = phase(q, p);
    let quadratic_gain = (0.25 * (c - a)).hypot(0.5 * b);
    let quadratic_phase = phase(0.5 * b, 0.25 * (c - a));
    let shifted = 0.5 * quadratic_phase + linear_phase;
    let rotated_cos = linear_norm * shifted.cos();
    let rotated_sin = linear_norm * shifted.sin();

    Ok(PolarParams {
        info_xx: a,
        info_xy: b,
        info_yy: c,
        info_mean_x: p,
        info_mean_y: q,
        linear_phase,
        quadratic_gain,
        quadratic_phase,
        rotated_cos,
        rotated_sin,
        rotated_gain: rotated_cos.hypot(rotated_sin),
        rotated_phase: phase(rotated_sin, rotated_cos),
        log_det_2pi_cov: (4.0 * PI * PI * det).ln(),
        mean_mahalanobis: pm.mean.dot(&info_mean),
    })
}

impl PolarParams {
    /// `|p, q|`
    pub fn linear_gain(&self) -> f64 {
        self.info_mean_x.hypot(self.info_mean_y)
    }

    /// Azimuth-dependent part of the log joint density.
    pub fn exponent(&self, theta: f64, range: f64) -> f64 {
        range * self.linear_gain() * (theta - self.linear_phase).cos()
            + self.quadratic_gain * range * range * (2.0 * theta + self.quadratic_phase).cos()
    }

    /// `ln kappa(r)`: the azimuth-independent factor of the joint density.
    pub fn log_kappa(&self, range: f64) -> f64 {
        range.ln()
            - 0.5 * self.log_det_2pi_cov
            - 0.5 * (0.5 * range * range * (self.info_xx + self.info_yy) + self.mean_mahalanobis)
    }
}

/// Joint density `p(theta, r)`, i.e. the Cartesian Gaussian times the Jacobian `r`.
pub fn joint_polar_density(theta: f64, range: f64, pp: &PolarParams) -> f64 {
    if range <= 0.0 {
        return 0.0;
    }
    (pp.log_kappa(range) + pp.exponent(theta, range)).exp()
}

/// `ln` of the azimuth normalizer `Delta(r)` truncated at `n_terms`.
pub fn log_azimuth_normalizer(
    pp: &PolarParams,
    range: f64,
    n_terms: usize,
) -> Result<f64, DensityError> {
    let series = BesselSeries::new(pp, range, n_terms, 0, None);
    series
        .log_normalizer()
        .ok_or(DensityError::NonPositiveNormalizer(series.normalizer()))
}

/// Marginal density of the true range from the Bessel-product series.
pub fn range_density(range: f64, pp: &PolarParams, n_terms: usize) -> Result<f64, DensityError> {
    if range < 0.0 {
        return Err(DensityError::NonPositiveRange(range));
    }
    if range == 0.0 {
        return Ok(0.0);
    }
    Ok((pp.log_kappa(range) + log_azimuth_normalizer(pp, range, n_terms)?).exp())
}

/// Azimuth density conditioned on range.
pub fn conditional_azimuth_density(
    theta: f64,
    range: f64,
    pp: &PolarParams,
    n_terms: usize,
) -> Result<f64, DensityError> {
    if !(range > 0.0) {
        return Err(DensityError::NonPositiveRange(range));
    }
    let log_norm = log_azimuth_normalizer(pp, range, n_terms)?;
    Ok((pp.exponent(theta, range) - log_norm).exp())
}

/// Rice density of `|y|` for `y ~ N(position, sigma^2 I)` with `|position| = true_range`.
pub fn rice_range_density(range: f64, true_range: f64, sigma_r: f64) -> f64 {
    if range <= 0.0 {
        return 0.0;
    }
    let var = sigma_r * sigma_r;
    let diff = range - true_range;
    range / var * (-diff * diff / (2.0 * var)).exp() * bessel_i0_scaled(range * true_range / var)
}

/// Probability that an additive-Gaussian range measurement is negative.
pub fn negative_range_probability(true_range: f64, sigma_r: f64) -> f64 {
    0.5 * libm::erfc(true_range / (sigma_r * std::f64::consts::SQRT_2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fig2() -> PredictedMeasurement {
        PredictedMeasurement::new(
            Vector2::new(-11.0, 20.0),
            Matrix2::new(50.0, -10.0, -10.0, 50.0),
        )
    }

    /// Composite Simpson rule, enough for smooth densities in these checks.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let n = n + n % 2;
        let h = (b - a) / n as f64;
        let mut sum = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * f(a + i as f64 * h);
        }
        sum * h / 3.0
    }

    #[test]
    fn isotropic_zero_mean_has_no_anisotropy() {
        let pm = PredictedMeasurement::new(Vector2::zeros(), Matrix2::identity() * 9.0);
        let pp = polar_params(&pm).unwrap();
        assert_eq!(pp.info_mean_x, 0.0);
        assert_eq!(pp.info_mean_y, 0.0);
        assert_eq!(pp.quadratic_gain, 0.0);
        assert_eq!(pp.rotated_gain, 0.0);
        assert_eq!(pp.linear_phase, 0.0);
        assert_eq!(pp.quadratic_phase, 0.0);
        for theta in [0.0, 1.0, 2.5, 5.0] {
            let d = conditional_azimuth_density(theta, 3.0, &pp, 5).unwrap();
            assert_relative_eq!(d, 1.0 / (2.0 * PI), max_relative = 1e-14);
            assert_relative_eq!(
                joint_polar_density(theta, 3.0, &pp),
                joint_polar_density(0.0, 3.0, &pp),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn params_from_hand_inversion() {
        let pp = polar_params(&fig2()).unwrap();
        // det = 2400; V^-1 = [50 10; 10 50] / 2400
        let a = 50.0 / 2400.0;
        let b = 10.0 / 2400.0;
        assert_relative_eq!(pp.info_xx, a, max_relative = 1e-14);
        assert_relative_eq!(pp.info_yy, a, max_relative = 1e-14);
        assert_relative_eq!(pp.info_xy, b, max_relative = 1e-14);
        assert_relative_eq!(pp.info_mean_x, (-11.0 * 50.0 + 20.0 * 10.0) / 2400.0, max_relative = 1e-14);
        assert_relative_eq!(pp.info_mean_y, (-11.0 * 10.0 + 20.0 * 50.0) / 2400.0, max_relative = 1e-14);
        assert_relative_eq!(pp.quadratic_gain, b / 2.0, max_relative = 1e-14);
        assert_relative_eq!(pp.quadratic_phase, PI / 2.0, max_relative = 1e-14);
        assert_relative_eq!(pp.rotated_gain, pp.linear_gain(), max_relative = 1e-14);
    }

    #[test]
    fn invariants_hold_on_sampling_configs() {
        for q in [0.25, 0.75, 3.0] {
            let pm = PredictedMeasurement::new(
                Vector2::new(-50.0, 20.0),
                Matrix2::new(7.0, 2.0, 2.0, 1.0) * (q * 1e3),
            );
            let pp = polar_params(&pm).unwrap();
            let det = pp.info_xx * pp.info_yy - pp.info_xy * pp.info_xy;
            assert!(pp.info_xx > 0.0 && pp.info_yy > 0.0 && det > 0.0);
            let d2 = pp.rotated_cos.powi(2) + pp.rotated_sin.powi(2);
            assert_relative_eq!(pp.rotated_gain.powi(2), d2, max_relative = 1e-12);
            assert!(pp.quadratic_gain >= 0.0);
            assert!((pp.rotated_phase.tan() * pp.rotated_cos - pp.rotated_sin).abs() < 1e-10);
            for angle in [pp.linear_phase, pp.quadratic_phase, pp.rotated_phase] {
                assert!(angle > -PI && angle <= PI);
            }
        }
    }

    #[test]
    fn rejects_bad_covariance() {
        let singular = PredictedMeasurement::new(Vector2::zeros(), Matrix2::new(1.0, 1.0, 1.0, 1.0));
        assert!(matches!(polar_params(&singular), Err(DensityError::NotPositiveDefinite(_))));
        let indefinite = PredictedMeasurement::new(Vector2::zeros(), Matrix2::new(1.0, 0.0, 0.0, -2.0));
        assert!(polar_params(&indefinite).is_err());
        let asym = PredictedMeasurement::new(Vector2::zeros(), Matrix2::new(2.0, 0.5, 0.1, 2.0));
        assert!(polar_params(&asym).is_err());
    }

    #[test]
    fn joint_density_matches_cartesian_gaussian() {
        let pm = fig2();
        let pp = polar_params(&pm).unwrap();
        assert_eq!(joint_polar_density(1.3, 0.0, &pp), 0.0);
        let (theta, r) = (0.3_f64, 25.0_f64);
        let y = Vector2::new(r * theta.cos(), r * theta.sin());
        let diff = y - pm.mean;
        let inv = pm.cov.try_inverse().unwrap();
        let gauss = (-0.5 * diff.dot(&(inv * diff))).exp()
            / (2.0 * PI * pm.cov.determinant().sqrt());
        assert_relative_eq!(joint_polar_density(theta, r, &pp), r * gauss, max_relative = 1e-10);
    }

    #[test]
    fn range_density_matches_azimuth_integral() {
        let pp = polar_params(&fig2()).unwrap();
        for r in [5.0, 18.0, 23.0, 40.0] {
            let direct = simpson(|t| joint_polar_density(t, r, &pp), 0.0, 2.0 * PI, 4000);
            let series = range_density(r, &pp, 20).unwrap();
            assert_relative_eq!(series, direct, max_relative = 1e-9);
        }
    }

    #[test]
    fn range_density_normalizes() {
        let pp = polar_params(&fig2()).unwrap();
        // sigma ~ 7.7, |y_hat| ~ 22.8: 8 sigma past the mean is ~85 m.
        let total = simpson(|r| range_density(r, &pp, 20).unwrap(), 0.0, 90.0, 6000);
        assert!((total - 1.0).abs() < 1e-6, "total {total}");
    }

    #[test]
    fn isotropic_covariance_reduces_to_single_bessel() {
        let pm = PredictedMeasurement::new(Vector2::new(3.0, -4.0), Matrix2::identity() * 4.0);
        let pp = polar_params(&pm).unwrap();
        assert_eq!(pp.quadratic_gain, 0.0);
        let r = 6.0;
        let expected = pp.log_kappa(r).exp()
            * 2.0
            * PI
            * crate::special::bessel_i(0, r * pp.rotated_gain).unwrap();
        assert_relative_eq!(range_density(r, &pp, 5).unwrap(), expected, max_relative = 1e-13);
    }

    #[test]
    fn conditional_density_integrates_to_one_and_is_periodic() {
        for q in [0.25, 0.75, 3.0] {
            let pm = PredictedMeasurement::new(
                Vector2::new(-50.0, 20.0),
                Matrix2::new(7.0, 2.0, 2.0, 1.0) * (q * 1e3),
            );
            let pp = polar_params(&pm).unwrap();
            let r = pm.mean.norm();
            let f = |t: f64| conditional_azimuth_density(t, r, &pp, 30).unwrap();
            let total = simpson(f, 0.0, 2.0 * PI, 4000);
            assert!((total - 1.0).abs() < 1e-8, "q {q}: {total}");
            for t in [0.1, 2.0, 4.4] {
                assert_relative_eq!(f(t), f(t + 2.0 * PI), max_relative = 1e-12);
                assert!(f(t) >= 0.0);
            }
        }
    }

    #[test]
    fn reflection_symmetry() {
        let pm = PredictedMeasurement::new(Vector2::new(12.0, 0.0), Matrix2::new(30.0, 0.0, 0.0, 80.0));
        let pp = polar_params(&pm).unwrap();
        for t in [0.2, 1.0, 2.9] {
            let a = conditional_azimuth_density(t, 11.0, &pp, 10).unwrap();
            let b = conditional_azimuth_density(-t, 11.0, &pp, 10).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-10);
        }
    }

    #[test]
    fn truncation_error_decreases() {
        let pp = polar_params(&fig2()).unwrap();
        let r = 22.5;
        let values: Vec<f64> = (1..=11).map(|n| range_density(r, &pp, n).unwrap()).collect();
        let diffs: Vec<f64> = values.windows(2).map(|w| ((w[0] - w[1]) / w[1]).abs()).collect();
        for pair in diffs.windows(2) {
            assert!(pair[1] <= pair[0], "{diffs:?}");
        }
    }

    #[test]
    fn rice_density() {
        let sigma: f64 = 3.0;
        for r in [0.5, 2.0, 7.0] {
            let rayleigh = r / (sigma * sigma) * (-r * r / (2.0 * sigma * sigma)).exp();
            assert_relative_eq!(rice_range_density(r, 0.0, sigma), rayleigh, max_relative = 1e-14);
        }
        for rho in [0.0, 5.0, 40.0] {
            let top = rho + 12.0 * sigma;
            let total = simpson(|r| rice_range_density(r, rho, sigma), 0.0, top, 20000);
            assert!((total - 1.0).abs() < 1e-8, "rho {rho}: {total}");
        }
    }

    #[test]
    fn rice_density_matches_norm_of_gaussian() {
        // |y| for y ~ N((rho, 0), sigma^2 I): integrate the 2D Gaussian over azimuth.
        let (r, rho, sigma) = (100.0_f64, 100.0_f64, 4.0_f64);
        let var = sigma * sigma;
        let polar = |t: f64| {
            let dx = r * t.cos() - rho;
            let dy = r * t.sin();
            // Subtract the peak exponent (at t = 0) to keep the integrand representable.
            let expo = -(dx * dx + dy * dy) / (2.0 * var) + (r - rho).powi(2) / (2.0 * var);
            r * expo.exp() / (2.0 * PI * var)
        };
        let scaled = simpson(polar, -PI, PI, 40000);
        let expected = scaled * (-(r - rho).powi(2) / (2.0 * var)).exp();
        assert_relative_eq!(rice_range_density(r, rho, sigma), expected, max_relative = 1e-9);
    }

    #[test]
    fn negative_range_probability_values() {
        assert_eq!(negative_range_probability(0.0, 4.0), 0.5);
        // Phi(-1) = 0.15865525393145707
        assert_relative_eq!(negative_range_probability(4.0, 4.0), 0.15865525393145707, max_relative = 1e-14);
        assert!(negative_range_probability(200.0, 4.0) < 1e-300);
        let mut last = 0.5;
        for i in 1..40 {
            let p = negative_range_probability(i as f64 * 0.5, 4.0);
            assert!(p < last && p > 0.0);
            last = p;
        }
    }
}

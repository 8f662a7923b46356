use nalgebra::{Matrix1x4, Matrix2, Matrix4, SMatrix, SVector, Vector2, Vector4};

use super::{kalman_gain, position_selector, FilterError, GaussianState};

/// Linear Kalman update with a direct position measurement `y`.
pub fn linear_position_update(
    pred: &GaussianState,
    y: &Vector2<f64>,
    noise: &Matrix2<f64>,
) -> Result<GaussianState, FilterError> {
    let h = position_selector();
    let (gain, _) = kalman_gain(pred, &h, noise)?;
    let ikh = Matrix4::identity() - gain * h;
    let mean = pred.mean + gain * (y - h * pred.mean);
    let cov = ikh * pred.cov * ikh.transpose() + gain * noise * gain.transpose();
    GaussianState::new(mean, cov)
}

/// Extended Kalman update with a scalar range, Joseph-form covariance.
pub fn ekf_update(pred: &GaussianState, range: f64, sigma_r: f64) -> Result<GaussianState, FilterError> {
    let pos = pred.position();
    let rho = pos.norm();
    if !(rho > 0.0) {
        return Err(FilterError::DegenerateGeometry);
    }
    let jac = Matrix1x4::new(pos.x / rho, pos.y / rho, 0.0, 0.0);
    let var = sigma_r * sigma_r;
    let innov = (jac * pred.cov * jac.transpose())[(0, 0)] + var;
    if !(innov > 0.0) {
        return Err(FilterError::SingularInnovation);
    }
    let gain: Vector4<f64> = pred.cov * jac.transpose() / innov;
    let mean = pred.mean + gain * (range - rho);
    let ikh = Matrix4::identity() - gain * jac;
    let cov = ikh * pred.cov * ikh.transpose() + var * gain * gain.transpose();
    GaussianState::new(mean, cov)
}

/// Scaled unscented transform parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UkfParams {
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
}

impl Default for UkfParams {
    fn default() -> Self {
        Self {
            alpha: 1e-3,
            beta: 2.0,
            kappa: 0.0,
        }
    }
}

/// Predicted measurement mean, its covariance (without measurement noise)
/// and the state-measurement cross covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnscentedMoments<const D: usize> {
    pub mean: SVector<f64, D>,
    pub cov: SMatrix<f64, D, D>,
    pub cross: SMatrix<f64, 4, D>,
}

fn sigma_spread(cov: &Matrix4<f64>, scale: f64) -> Result<Matrix4<f64>, FilterError> {
    let scaled = scale * cov;
    if let Some(chol) = scaled.cholesky() {
        return Ok(chol.l());
    }
    let jittered = scaled + Matrix4::identity() * 1e-9;
    jittered.cholesky().map(|c| c.l()).ok_or(FilterError::SigmaPoints)
}

/// Push `2n + 1` sigma points of `state` through `measure`.
pub fn unscented_transform<const D: usize>(
    state: &GaussianState,
    params: &UkfParams,
    measure: impl Fn(&Vector4<f64>) -> SVector<f64, D>,
) -> Result<UnscentedMoments<D>, FilterError> {
    let n = 4.0;
    let lambda = params.alpha * params.alpha * (n + params.kappa) - n;
    let spread = sigma_spread(&state.cov, n + lambda)?;
    let w0_mean = lambda / (n + lambda);
    let w0_cov = w0_mean + 1.0 - params.alpha * params.alpha + params.beta;
    let wi = 1.0 / (2.0 * (n + lambda));

    let mut points = Vec::with_capacity(9);
    points.push(state.mean);
    for i in 0..4 {
        let col = spread.column(i).into_owned();
        points.push(state.mean + col);
        points.push(state.mean - col);
    }
    let images: Vec<SVector<f64, D>> = points.iter().map(&measure).collect();
    let weight_mean = |i: usize| if i == 0 { w0_mean } else { wi };
    let weight_cov = |i: usize| if i == 0 { w0_cov } else { wi };

    let mean: SVector<f64, D> = images.iter().enumerate().map(|(i, y)| weight_mean(i) * y).sum();
    let mut cov = SMatrix::<f64, D, D>::zeros();
    let mut cross = SMatrix::<f64, 4, D>::zeros();
    for (i, (x, y)) in points.iter().zip(&images).enumerate() {
        let dy = y - mean;
        let dx = x - state.mean;
        cov += weight_cov(i) * dy * dy.transpose();
        cross += weight_cov(i) * dx * dy.transpose();
    }
    Ok(UnscentedMoments { mean, cov, cross })
}

/// Unscented Kalman update with a scalar range.
pub fn ukf_update(
    pred: &GaussianState,
    range: f64,
    sigma_r: f64,
    params: &UkfParams,
) -> Result<GaussianState, FilterError> {
    let ut = unscented_transform::<1>(pred, params, |x| SVector::<f64, 1>::new(x[0].hypot(x[1])))?;
    let innov = ut.cov[(0, 0)] + sigma_r * sigma_r;
    if !(innov > 0.0) {
        return Err(FilterError::SingularInnovation);
    }
    let gain: Vector4<f64> = ut.cross.column(0) / innov;
    let mean = pred.mean + gain * (range - ut.mean[0]);
    let cov = pred.cov - innov * gain * gain.transpose();
    GaussianState::new(mean, cov)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn pred() -> GaussianState {
        let mut cov = Matrix4::identity();
        cov[(0, 0)] = 400.0;
        cov[(1, 1)] = 900.0;
        cov[(0, 1)] = 120.0;
        cov[(1, 0)] = 120.0;
        cov[(2, 2)] = 4.0;
        cov[(3, 3)] = 4.0;
        cov[(0, 2)] = 10.0;
        cov[(2, 0)] = 10.0;
        GaussianState::new(Vector4::new(300.0, 400.0, 1.0, -2.0), cov).unwrap()
    }

    #[test]
    fn ekf_zero_innovation_keeps_mean() {
        let p = pred();
        let post = ekf_update(&p, 500.0, 5.0).unwrap();
        assert!((post.mean - p.mean).norm() < 1e-12);
    }

    #[test]
    fn ekf_contracts_along_range() {
        let p = pred();
        let post = ekf_update(&p, 510.0, 5.0).unwrap();
        let u = Vector4::new(0.6, 0.8, 0.0, 0.0);
        assert!(u.dot(&(post.cov * u)) <= u.dot(&(p.cov * u)));
    }

    #[test]
    fn ekf_matches_hand_algebra() {
        // Axis-aligned: x = (3, 4), range Jacobian (0.6, 0.8).
        let cov = Matrix4::from_diagonal(&Vector4::new(25.0, 25.0, 1.0, 1.0));
        let p = GaussianState::new(Vector4::new(3.0, 4.0, 0.0, 0.0), cov).unwrap();
        let post = ekf_update(&p, 6.0, 5.0).unwrap();
        // S = 25 + 25 = 50, K = (15, 20, 0, 0) / 50, innovation 1.
        assert_relative_eq!(post.mean[0], 3.3, max_relative = 1e-14);
        assert_relative_eq!(post.mean[1], 4.4, max_relative = 1e-14);
        // Posterior variance along x: 25 - 15^2/50 = 20.5.
        assert_relative_eq!(post.cov[(0, 0)], 20.5, max_relative = 1e-12);
        assert_relative_eq!(post.cov[(0, 1)], -6.0, max_relative = 1e-12);
    }

    #[test]
    fn ekf_rejects_origin() {
        let p = GaussianState::new(Vector4::zeros(), Matrix4::identity()).unwrap();
        assert_eq!(ekf_update(&p, 1.0, 1.0), Err(FilterError::DegenerateGeometry));
    }

    #[test]
    fn unscented_linear_map_is_exact() {
        let p = pred();
        let h = position_selector();
        let noise = Matrix2::new(9.0, 1.0, 1.0, 4.0);
        let ut = unscented_transform::<2>(&p, &UkfParams::default(), |x| h * x).unwrap();
        let innov = ut.cov + noise;
        let gain = ut.cross * innov.try_inverse().unwrap();
        let y = Vector2::new(310.0, 380.0);
        let mean = p.mean + gain * (y - ut.mean);
        let cov = p.cov - gain * innov * gain.transpose();
        let linear = linear_position_update(&p, &y, &noise).unwrap();
        assert!((mean - linear.mean).abs().max() < 1e-6);
        assert!((cov - linear.cov).abs().max() < 1e-6 * p.cov.abs().max());
    }

    #[test]
    fn symmetric_prior_range_is_sigma_point_mean() {
        let cov = Matrix4::from_diagonal(&Vector4::new(4.0, 4.0, 1.0, 1.0));
        let p = GaussianState::new(Vector4::zeros(), cov).unwrap();
        let params = UkfParams {
            alpha: 1.0,
            beta: 0.0,
            kappa: 0.0,
        };
        let ut = unscented_transform::<1>(&p, &params, |x| SVector::<f64, 1>::new(x[0].hypot(x[1]))).unwrap();
        // lambda = 0: centre weight 0, the four position points sit at range 4.
        let expected = (4.0 * 4.0 + 4.0 * 0.0) / 8.0;
        assert_relative_eq!(ut.mean[0], expected, max_relative = 1e-12);
    }

    #[test]
    fn unscented_range_moments_match_monte_carlo() {
        let p = pred();
        let params = UkfParams {
            alpha: 1.0,
            beta: 2.0,
            kappa: 0.0,
        };
        let ut = unscented_transform::<1>(&p, &params, |x| SVector::<f64, 1>::new(x[0].hypot(x[1]))).unwrap();
        let chol = p.cov.cholesky().unwrap().l();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 1_000_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let z = Vector4::from_fn(|_, _| StandardNormal.sample(&mut rng));
            let x = p.mean + chol * z;
            let r = x[0].hypot(x[1]);
            sum += r;
            sum_sq += r * r;
        }
        let mean = sum / n as f64;
        let var = sum_sq / n as f64 - mean * mean;
        let se_mean = (var / n as f64).sqrt();
        assert!((ut.mean[0] - mean).abs() < 3.0 * se_mean + 0.05, "{} vs {mean}", ut.mean[0]);
        assert!((ut.cov[(0, 0)] - var).abs() < 0.02 * var, "{} vs {var}", ut.cov[(0, 0)]);
    }

    #[test]
    fn ukf_update_is_finite_and_contracts() {
        let p = pred();
        let post = ukf_update(&p, 505.0, 5.0, &UkfParams::default()).unwrap();
        assert!(post.mean.iter().all(|v| v.is_finite()));
        assert!(post.cov.trace() < p.cov.trace());
    }

    #[test]
    fn sigma_spread_jitters_singular_covariance() {
        let mut cov = Matrix4::identity();
        cov[(3, 3)] = 0.0;
        let l = sigma_spread(&cov, 1.0).unwrap();
        assert!(l.iter().all(|v| v.is_finite()));
    }
}

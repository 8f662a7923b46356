//! Range-only measurement updates on a relative NCV state `(x, y, vx, vy)`.

mod baselines;
mod crlb;
mod proposed;

use nalgebra::{Matrix2, Matrix2x4, Matrix4, Matrix4x2, SymmetricEigen, Vector4};
use thiserror::Error;

pub use baselines::{
    ekf_update, linear_position_update, ukf_update, unscented_transform, UkfParams, UnscentedMoments,
};
pub use crlb::{crlb_bounds, crlb_recursion};
pub use proposed::{proposed_update, update_with_dirac, ProposedConfig, ProposedUpdate, SamplerSource};

use crate::density::DensityError;
use crate::moments::MomentError;
use crate::sampling::SamplingError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FilterError {
    #[error("covariance is not positive semidefinite (smallest eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("covariance has non-finite entries")]
    NonFinite,
    #[error("mixture weights must be non-negative and sum to 1 (sum {0})")]
    MixtureWeights(f64),
    #[error("mixture has no components")]
    EmptyMixture,
    #[error("innovation covariance is singular")]
    SingularInnovation,
    #[error("predicted position is at the origin; range Jacobian undefined")]
    DegenerateGeometry,
    #[error("range must be positive, got {0}")]
    NonPositiveRange(f64),
    #[error("invalid motion model: {0}")]
    InvalidModel(&'static str),
    #[error("sigma point spread failed: covariance not factorizable even with jitter")]
    SigmaPoints,
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Moments(#[from] MomentError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
}

/// Relative target state and its covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianState {
    pub mean: Vector4<f64>,
    pub cov: Matrix4<f64>,
}

impl GaussianState {
    /// Symmetrizes `cov` and clamps eigenvalues to zero. Eigenvalues below
    /// `-1e-9 * trace` are rejected.
    pub fn new(mean: Vector4<f64>, cov: Matrix4<f64>) -> Result<Self, FilterError> {
        if !mean.iter().chain(cov.iter()).all(|v| v.is_finite()) {
            return Err(FilterError::NonFinite);
        }
        let sym = 0.5 * (cov + cov.transpose());
        let eig = SymmetricEigen::new(sym);
        let smallest = eig.eigenvalues.min();
        if smallest >= 0.0 {
            return Ok(Self { mean, cov: sym });
        }
        let scale = sym.trace().abs().max(f64::MIN_POSITIVE);
        if smallest < -1e-9 * scale {
            return Err(FilterError::NotPsd(smallest));
        }
        let clamped = eig.eigenvalues.map(|v| v.max(0.0));
        let cov = eig.eigenvectors * Matrix4::from_diagonal(&clamped) * eig.eigenvectors.transpose();
        Ok(Self {
            mean,
            cov: 0.5 * (cov + cov.transpose()),
        })
    }

    pub fn position(&self) -> nalgebra::Vector2<f64> {
        self.mean.fixed_rows::<2>(0).into_owned()
    }

    /// `e^T P^-1 e` for `e = truth - mean`; pseudo-inverse when singular.
    pub fn nees(&self, truth: &Vector4<f64>) -> f64 {
        let err = truth - self.mean;
        let inv = self
            .cov
            .cholesky()
            .map(|c| c.inverse())
            .unwrap_or_else(|| self.cov.pseudo_inverse(1e-12).unwrap_or_else(|_| Matrix4::zeros()));
        err.dot(&(inv * err))
    }
}

/// Weighted Gaussian components.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureState {
    components: Vec<(f64, GaussianState)>,
}

impl MixtureState {
    pub fn new(components: Vec<(f64, GaussianState)>) -> Result<Self, FilterError> {
        if components.is_empty() {
            return Err(FilterError::EmptyMixture);
        }
        let total: f64 = components.iter().map(|c| c.0).sum();
        if components.iter().any(|c| !(c.0 >= 0.0)) || (total - 1.0).abs() > 1e-12 {
            return Err(FilterError::MixtureWeights(total));
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[(f64, GaussianState)] {
        &self.components
    }

    /// Mixture mean and covariance, including the spread of the means.
    pub fn collapse(&self) -> Result<GaussianState, FilterError> {
        let mean: Vector4<f64> = self.components.iter().map(|(w, s)| *w * s.mean).sum();
        let cov: Matrix4<f64> = self
            .components
            .iter()
            .map(|(w, s)| {
                let d = s.mean - mean;
                *w * (s.cov + d * d.transpose())
            })
            .sum();
        GaussianState::new(mean, cov)
    }

    /// Weighted average of component covariances, without the spread term.
    pub fn within_covariance(&self) -> Matrix4<f64> {
        self.components.iter().map(|(w, s)| *w * s.cov).sum()
    }
}

/// Nearly-constant-velocity model with white acceleration of intensity `q_tilde`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionModel {
    pub transition: Matrix4<f64>,
    pub process_noise: Matrix4<f64>,
    pub period: f64,
    pub q_tilde: f64,
}

impl MotionModel {
    pub fn ncv(period: f64, q_tilde: f64) -> Result<Self, FilterError> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(FilterError::InvalidModel("period must be positive"));
        }
        if !(q_tilde >= 0.0 && q_tilde.is_finite()) {
            return Err(FilterError::InvalidModel("q_tilde must be non-negative"));
        }
        let mut transition = Matrix4::identity();
        transition[(0, 2)] = period;
        transition[(1, 3)] = period;
        let t2 = period * period;
        let (pos, cross, vel) = (t2 * period / 3.0 * q_tilde, t2 / 2.0 * q_tilde, period * q_tilde);
        #[rustfmt::skip]
        let process_noise = Matrix4::new(
            pos, 0.0, cross, 0.0,
            0.0, pos, 0.0, cross,
            cross, 0.0, vel, 0.0,
            0.0, cross, 0.0, vel,
        );
        Ok(Self {
            transition,
            process_noise,
            period,
            q_tilde,
        })
    }
}

/// Propagate the relative state across one period while the observer moves
/// from `observer_prev` to `observer_now`.
pub fn predict(
    prior: &GaussianState,
    model: &MotionModel,
    observer_prev: &Vector4<f64>,
    observer_now: &Vector4<f64>,
) -> Result<GaussianState, FilterError> {
    let f = &model.transition;
    let mean = f * prior.mean + f * observer_prev - observer_now;
    let cov = f * prior.cov * f.transpose() + model.process_noise;
    GaussianState::new(mean, cov)
}

/// Selects position from the state.
pub fn position_selector() -> Matrix2x4<f64> {
    Matrix2x4::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0)
}

/// Gain `P H^T V^-1` and innovation covariance `V = H P H^T + R`.
pub fn kalman_gain(
    pred: &GaussianState,
    selector: &Matrix2x4<f64>,
    noise: &Matrix2<f64>,
) -> Result<(Matrix4x2<f64>, Matrix2<f64>), FilterError> {
    let innov = selector * pred.cov * selector.transpose() + noise;
    let innov = 0.5 * (innov + innov.transpose());
    let inv = innov.cholesky().ok_or(FilterError::SingularInnovation)?.inverse();
    Ok((pred.cov * selector.transpose() * inv, innov))
}

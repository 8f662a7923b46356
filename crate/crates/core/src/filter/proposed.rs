use nalgebra::{Matrix2, Matrix4, Vector2};
use serde::Serialize;

use super::{kalman_gain, position_selector, FilterError, GaussianState, MixtureState};
use crate::density::{polar_params, PredictedMeasurement};
use crate::moments::{conditional_moments, CircularMoments, MomentSettings, MomentSource};
use crate::sampling::{fit_wrapped_dirac, symmetric_sampling_baseline, FitConfig, FitReport, WrappedDirac};

/// Settings of the Gaussian-mixture range update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProposedConfig {
    pub sigma_r: f64,
    /// Series terms, highest moment order and the fallback policy.
    pub moments: MomentSettings,
    /// Dirac components per update.
    pub components: usize,
    pub fit: FitConfig,
    /// Moment residual below which an unfinished fit is still used.
    pub accept_residual: f64,
}

impl Default for ProposedConfig {
    fn default() -> Self {
        Self {
            sigma_r: 10.0,
            moments: MomentSettings::default(),
            components: 8,
            fit: FitConfig::default(),
            accept_residual: 1e-6,
        }
    }
}

/// Which sampler produced the Dirac points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerSource {
    Fit,
    SymmetricBaseline,
}

#[derive(Debug, Clone)]
pub struct ProposedUpdate {
    pub mixture: MixtureState,
    pub collapsed: GaussianState,
    pub moments: CircularMoments,
    pub moment_source: MomentSource,
    pub dirac: WrappedDirac,
    pub sampler: SamplerSource,
    pub fit_report: FitReport,
}

/// One Gaussian component per Dirac point, all sharing the covariance
/// `(I - K H) P + r^2 K P_b K^T`.
pub fn update_with_dirac(
    pred: &GaussianState,
    range: f64,
    sigma_r: f64,
    dirac: &WrappedDirac,
    bearing_cov: &Matrix2<f64>,
) -> Result<MixtureState, FilterError> {
    if !(range > 0.0) {
        return Err(FilterError::NonPositiveRange(range));
    }
    let h = position_selector();
    let (gain, _) = kalman_gain(pred, &h, &(sigma_r * sigma_r * Matrix2::identity()))?;
    let ikh = Matrix4::identity() - gain * h;
    let base_mean = ikh * pred.mean;
    let cov = ikh * pred.cov + range * range * gain * bearing_cov * gain.transpose();
    let components = dirac
        .iter()
        .map(|(w, angle)| {
            let bearing = Vector2::new(angle.cos(), angle.sin());
            GaussianState::new(base_mean + range * gain * bearing, cov).map(|s| (w, s))
        })
        .collect::<Result<Vec<_>, _>>()?;
    MixtureState::new(components)
}

/// Gaussian-mixture update of a Gaussian prediction with one range.
///
/// Circular moments of the azimuth given the range come from the stabilized
/// series (or quadrature, per policy); a wrapped Dirac fitted to them places
/// the mixture components. A fit that neither converges nor gets within
/// `accept_residual` is replaced by the symmetric two-moment sampler.
pub fn proposed_update(
    pred: &GaussianState,
    range: f64,
    cfg: &ProposedConfig,
) -> Result<ProposedUpdate, FilterError> {
    if !(range > 0.0) {
        return Err(FilterError::NonPositiveRange(range));
    }
    let h = position_selector();
    let noise = cfg.sigma_r * cfg.sigma_r * Matrix2::identity();
    let (_, innov) = kalman_gain(pred, &h, &noise)?;
    let pp = polar_params(&PredictedMeasurement::new(h * pred.mean, innov))?;
    let (moments, moment_source) = conditional_moments(&pp, range, &cfg.moments)?;

    let (fitted, fit_report) = fit_wrapped_dirac(&moments, cfg.components, &cfg.fit)?;
    let (dirac, sampler) = if fit_report.converged || fit_report.residual_norm <= cfg.accept_residual {
        (fitted, SamplerSource::Fit)
    } else {
        log::debug!("wrapped Dirac fit did not converge ({fit_report:?}); using the symmetric sampler");
        (symmetric_sampling_baseline(&moments, cfg.components)?, SamplerSource::SymmetricBaseline)
    };

    let bearing_cov = moments.bearing_covariance()?;
    let mixture = update_with_dirac(pred, range, cfg.sigma_r, &dirac, &bearing_cov)?;
    let collapsed = mixture.collapse()?;
    Ok(ProposedUpdate {
        mixture,
        collapsed,
        moments,
        moment_source,
        dirac,
        sampler,
        fit_report,
    })
}

//! Circular moments `E[cos m theta | r]`, `E[sin m theta | r]` of the
//! range-conditioned azimuth density, evaluated from the Bessel-product series.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::density::PolarParams;
use crate::oracle::{quad_moments, OracleError, QuadratureSpec};
use crate::series::BesselSeries;
use crate::special::BesselRegime;

/// Slack allowed on `c^2 + s^2 <= 1` for rounding.
const RESULTANT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MomentError {
    #[error("range must be positive, got {0}")]
    NonPositiveRange(f64),
    #[error("truncated normalizer is not positive ({0:e})")]
    NonPositiveNormalizer(f64),
    #[error("order {order} has resultant length {length} > 1")]
    Infeasible { order: usize, length: f64 },
    #[error("power moments are supported for powers 2, 3 and 4, got {0}")]
    UnsupportedPower(u32),
    #[error("moment order {order} exceeds the highest available order {available}")]
    OrderOutOfRange { order: usize, available: usize },
    #[error("series moments failed health checks: {0}")]
    Unreliable(SeriesHealth),
    #[error(transparent)]
    Quadrature(#[from] OracleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrigKind {
    Cos,
    Sin,
}

/// Conditional circular moments for orders `1..=max_order` at one range.
#[derive(Debug, Clone, PartialEq)]
pub struct CircularMoments {
    pub range: f64,
    /// Series terms used, or `None` for quadrature values.
    pub n_terms: Option<usize>,
    pairs: Vec<(f64, f64)>,
}

impl CircularMoments {
    /// Validates `c_m^2 + s_m^2 <= 1` for each pair.
    pub fn from_pairs(
        range: f64,
        n_terms: Option<usize>,
        pairs: Vec<(f64, f64)>,
    ) -> Result<Self, MomentError> {
        for (i, &(c, s)) in pairs.iter().enumerate() {
            let length = c.hypot(s);
            if !(length <= 1.0 + RESULTANT_SLACK) {
                return Err(MomentError::Infeasible { order: i + 1, length });
            }
        }
        Ok(Self { range, n_terms, pairs })
    }

    pub fn max_order(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    /// `(c_m, s_m)`; order 0 is `(1, 0)`.
    pub fn order(&self, m: usize) -> Result<(f64, f64), MomentError> {
        match m {
            0 => Ok((1.0, 0.0)),
            _ => self.pairs.get(m - 1).copied().ok_or(MomentError::OrderOutOfRange {
                order: m,
                available: self.pairs.len(),
            }),
        }
    }

    /// Keep only orders `1..=max_order`.
    pub fn truncated(&self, max_order: usize) -> Self {
        Self {
            range: self.range,
            n_terms: self.n_terms,
            pairs: self.pairs[..max_order.min(self.pairs.len())].to_vec(),
        }
    }

    pub fn bearing_mean(&self) -> Result<Vector2<f64>, MomentError> {
        let (c, s) = self.order(1)?;
        Ok(Vector2::new(c, s))
    }

    pub fn bearing_covariance(&self) -> Result<Matrix2<f64>, MomentError> {
        let (c1, s1) = self.order(1)?;
        let (c2, s2) = self.order(2)?;
        Ok(covariance_from(c1, s1, c2, s2))
    }
}

fn covariance_from(c1: f64, s1: f64, c2: f64, s2: f64) -> Matrix2<f64> {
    let cos_sq = 0.5 + 0.5 * c2;
    let sin_sq = 0.5 - 0.5 * c2;
    let cross = 0.5 * s2;
    Matrix2::new(cos_sq - c1 * c1, cross - c1 * s1, cross - c1 * s1, sin_sq - s1 * s1)
}

fn check_range(range: f64) -> Result<(), MomentError> {
    if range > 0.0 && range.is_finite() {
        Ok(())
    } else {
        Err(MomentError::NonPositiveRange(range))
    }
}

/// Unnormalized diagonal-case cosine integral of order `m`.
///
/// This is the integral over the azimuth of `cos(m u) exp(D r cos(u - psi) + A3 r^2 cos 2u)`.
/// It overflows to infinity once the Bessel arguments are large; use
/// [`MomentSeries`] for normalized values.
pub fn diag_cos(m: usize, pp: &PolarParams, range: f64, n_terms: usize) -> f64 {
    let series = BesselSeries::new(pp, range, n_terms, m, None);
    2.0 * PI * series.log_scale().exp() * series.diag(m).0
}

/// Sine counterpart of [`diag_cos`].
pub fn diag_sin(m: usize, pp: &PolarParams, range: f64, n_terms: usize) -> f64 {
    let series = BesselSeries::new(pp, range, n_terms, m, None);
    2.0 * PI * series.log_scale().exp() * series.diag(m).1
}

fn gen_pair(
    m: usize,
    pp: &PolarParams,
    range: f64,
    n_terms: usize,
    regime: Option<&BesselRegime>,
) -> Result<(f64, f64), MomentError> {
    check_range(range)?;
    if m == 0 {
        return Ok((1.0, 0.0));
    }
    let series = BesselSeries::new(pp, range, n_terms, m, regime);
    let norm = series.normalizer();
    if !(norm > 0.0) {
        return Err(MomentError::NonPositiveNormalizer(norm));
    }
    let (c, s) = series.rotated(m);
    Ok((c / norm, s / norm))
}

/// `E[cos m theta | r]` from the series truncated at `n_terms`.
pub fn gen_cos(m: usize, pp: &PolarParams, range: f64, n_terms: usize) -> Result<f64, MomentError> {
    gen_pair(m, pp, range, n_terms, None).map(|p| p.0)
}

/// `E[sin m theta | r]` from the series truncated at `n_terms`.
pub fn gen_sin(m: usize, pp: &PolarParams, range: f64, n_terms: usize) -> Result<f64, MomentError> {
    gen_pair(m, pp, range, n_terms, None).map(|p| p.1)
}

/// `(E[cos m theta | r], E[sin m theta | r])` with large-argument Bessel
/// ratios replaced by `exp(-n^2 / 2x)` where `regime` allows it.
pub fn stabilized_gen_moments(
    m: usize,
    pp: &PolarParams,
    range: f64,
    n_terms: usize,
    regime: &BesselRegime,
) -> Result<(f64, f64), MomentError> {
    gen_pair(m, pp, range, n_terms, Some(regime))
}

/// `E[(cos theta, sin theta) | r]`.
pub fn bearing_mean(pp: &PolarParams, range: f64, n_terms: usize) -> Result<Vector2<f64>, MomentError> {
    let (c, s) = gen_pair(1, pp, range, n_terms, None)?;
    Ok(Vector2::new(c, s))
}

/// Covariance of the unit bearing vector given the range.
pub fn bearing_covariance(
    pp: &PolarParams,
    range: f64,
    n_terms: usize,
) -> Result<Matrix2<f64>, MomentError> {
    let (c1, s1) = gen_pair(1, pp, range, n_terms, None)?;
    let (c2, s2) = gen_pair(2, pp, range, n_terms, None)?;
    Ok(covariance_from(c1, s1, c2, s2))
}

/// `E[cos^power theta | r]` or `E[sin^power theta | r]` for powers 2 to 4.
pub fn power_moment(
    power: u32,
    kind: TrigKind,
    pp: &PolarParams,
    range: f64,
    n_terms: usize,
) -> Result<f64, MomentError> {
    if !(2..=4).contains(&power) {
        return Err(MomentError::UnsupportedPower(power));
    }
    let moments = MomentSeries::new(pp, range, n_terms, power as usize, None)?.moments()?;
    power_from_moments(power, kind, &moments)
}

/// Power moments from precomputed circular moments.
pub fn power_from_moments(
    power: u32,
    kind: TrigKind,
    moments: &CircularMoments,
) -> Result<f64, MomentError> {
    let c = |m| moments.order(m).map(|p| p.0);
    let s = |m| moments.order(m).map(|p| p.1);
    match (power, kind) {
        (2, TrigKind::Cos) => Ok(0.5 + 0.5 * c(2)?),
        (2, TrigKind::Sin) => Ok(0.5 - 0.5 * c(2)?),
        (3, TrigKind::Cos) => Ok((3.0 * c(1)? + c(3)?) / 4.0),
        (3, TrigKind::Sin) => Ok((3.0 * s(1)? - s(3)?) / 4.0),
        (4, TrigKind::Cos) => Ok((3.0 + 4.0 * c(2)? + c(4)?) / 8.0),
        (4, TrigKind::Sin) => Ok((3.0 - 4.0 * c(2)? + c(4)?) / 8.0),
        _ => Err(MomentError::UnsupportedPower(power)),
    }
}

/// Diagnostics for a truncated series evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesHealth {
    /// Normalized `Delta` (the `j = 0` term is 1).
    pub normalizer: f64,
    /// Sum of absolute normalizer terms divided by the normalizer.
    pub conditioning: f64,
    /// Largest first-omitted term relative to the normalizer.
    pub truncation: f64,
    /// Largest `|c_m, s_m|` over the requested orders.
    pub max_resultant: f64,
}

impl SeriesHealth {
    pub const MAX_CONDITIONING: f64 = 1e6;
    pub const MAX_TRUNCATION: f64 = 1e-6;

    pub fn is_reliable(&self) -> bool {
        self.normalizer > 0.0
            && self.conditioning < Self::MAX_CONDITIONING
            && self.truncation < Self::MAX_TRUNCATION
            && self.max_resultant <= 1.0 + RESULTANT_SLACK
    }
}

impl std::fmt::Display for SeriesHealth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "normalizer {:e}, conditioning {:e}, truncation {:e}, max resultant {}",
            self.normalizer, self.conditioning, self.truncation, self.max_resultant
        )
    }
}

/// One series evaluation serving all orders up to `max_order`.
#[derive(Debug, Clone)]
pub struct MomentSeries {
    range: f64,
    max_order: usize,
    series: BesselSeries,
}

impl MomentSeries {
    pub fn new(
        pp: &PolarParams,
        range: f64,
        n_terms: usize,
        max_order: usize,
        regime: Option<&BesselRegime>,
    ) -> Result<Self, MomentError> {
        check_range(range)?;
        Ok(Self {
            range,
            max_order,
            series: BesselSeries::new(pp, range, n_terms, max_order, regime),
        })
    }

    fn raw_pairs(&self) -> (f64, Vec<(f64, f64)>) {
        let norm = self.series.normalizer();
        let pairs = (1..=self.max_order)
            .map(|m| {
                let (c, s) = self.series.rotated(m);
                (c / norm, s / norm)
            })
            .collect();
        (norm, pairs)
    }

    pub fn health(&self) -> SeriesHealth {
        let (norm, pairs) = self.raw_pairs();
        let max_resultant = pairs.iter().map(|(c, s)| c.hypot(*s)).fold(0.0, f64::max);
        SeriesHealth {
            normalizer: norm,
            conditioning: self.series.normalizer_abs_sum() / norm.abs(),
            truncation: self.series.first_omitted(self.max_order) / norm.abs(),
            max_resultant: if max_resultant.is_nan() { f64::INFINITY } else { max_resultant },
        }
    }

    pub fn is_reliable(&self) -> bool {
        self.health().is_reliable()
    }

    /// Normalized moments; fails only when the normalizer is not positive or
    /// a resultant exceeds 1.
    pub fn moments(&self) -> Result<CircularMoments, MomentError> {
        let (norm, pairs) = self.raw_pairs();
        if !(norm > 0.0) {
            return Err(MomentError::NonPositiveNormalizer(norm));
        }
        CircularMoments::from_pairs(self.range, Some(self.series.n_terms()), pairs)
    }

    /// `ln Delta`, when the truncated normalizer is positive.
    pub fn log_normalizer(&self) -> Option<f64> {
        self.series.log_normalizer()
    }
}

/// How the filter obtains circular moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentPolicy {
    /// Series only; unhealthy evaluations are errors.
    SeriesOnly,
    /// Series when healthy, adaptive quadrature otherwise.
    #[default]
    SeriesWithQuadratureFallback,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentSource {
    Series,
    Quadrature,
}

/// Settings for [`conditional_moments`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSettings {
    pub n_terms: usize,
    pub max_order: usize,
    pub regime: BesselRegime,
    pub policy: MomentPolicy,
    pub quadrature: QuadratureSpec,
}

impl Default for MomentSettings {
    fn default() -> Self {
        Self {
            n_terms: 5,
            max_order: 10,
            regime: BesselRegime::default(),
            policy: MomentPolicy::default(),
            quadrature: QuadratureSpec::default(),
        }
    }
}

/// Stabilized series moments, falling back to quadrature per the policy.
pub fn conditional_moments(
    pp: &PolarParams,
    range: f64,
    settings: &MomentSettings,
) -> Result<(CircularMoments, MomentSource), MomentError> {
    let series = MomentSeries::new(pp, range, settings.n_terms, settings.max_order, Some(&settings.regime))?;
    let health = series.health();
    if health.is_reliable() {
        return Ok((series.moments()?, MomentSource::Series));
    }
    match settings.policy {
        MomentPolicy::SeriesOnly => Err(MomentError::Unreliable(health)),
        MomentPolicy::SeriesWithQuadratureFallback => {
            log::debug!("series moments at r = {range} unreliable ({health}); using quadrature");
            let moments = quad_moments(pp, range, settings.max_order, &settings.quadrature)?;
            Ok((moments, MomentSource::Quadrature))
        }
    }
}

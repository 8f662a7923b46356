//! Range-only target tracking with exact circular moments.
//!
//! For a Gaussian predicted position, the azimuth conditioned on a measured
//! range follows a generalized von Mises density. [`moments`] evaluates its
//! circular moments of any order from a Bessel-product series,
//! [`sampling`] turns them into a wrapped Dirac mixture, and [`filter`] builds
//! a Gaussian-mixture measurement update from that mixture. [`oracle`] holds
//! the quadrature reference used to check the series, and [`simulation`] runs
//! the Monte-Carlo tracking study.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod density;
pub mod filter;
pub mod moments;
pub mod oracle;
pub mod reference;
pub mod sampling;
mod series;
pub mod simulation;
pub mod special;

pub use density::{polar_params, PolarParams, PredictedMeasurement};
pub use filter::{GaussianState, MixtureState, MotionModel};
pub use moments::{CircularMoments, MomentPolicy, MomentSeries, MomentSource, TrigKind};
pub use oracle::QuadratureSpec;
pub use sampling::{FitConfig, FitReport, WrappedDirac};
pub use simulation::{RunMetrics, ScenarioConfig};
pub use special::BesselRegime;

pub use nalgebra;

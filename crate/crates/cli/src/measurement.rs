use anyhow::{ensure, Context};
use clap::Args;
use rotrack_core::nalgebra::{Matrix2, Vector2};
use rotrack_core::{polar_params, PolarParams, PredictedMeasurement};

/// Predicted position, its covariance and the observed range.
#[derive(Debug, Clone, Args)]
pub struct MeasurementArgs {
    /// Predicted position `x,y`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub yhat: Vec<f64>,
    /// Covariance of the predicted position, row-major `v11,v12,v21,v22`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub cov: Vec<f64>,
    /// Observed range.
    #[arg(long)]
    pub range: f64,
}

impl MeasurementArgs {
    pub fn predicted(&self) -> anyhow::Result<PredictedMeasurement> {
        ensure!(self.yhat.len() == 2, "--yhat takes 2 values, got {}", self.yhat.len());
        ensure!(self.cov.len() == 4, "--cov takes 4 values, got {}", self.cov.len());
        let c = &self.cov;
        ensure!(
            (c[1] - c[2]).abs() <= 1e-12 * c[1].abs().max(c[2].abs()).max(1.0),
            "--cov must be symmetric"
        );
        Ok(PredictedMeasurement::new(
            Vector2::new(self.yhat[0], self.yhat[1]),
            Matrix2::new(c[0], c[1], c[2], c[3]),
        ))
    }

    pub fn params(&self) -> anyhow::Result<PolarParams> {
        ensure!(self.range > 0.0 && self.range.is_finite(), "--range must be positive");
        polar_params(&self.predicted()?).context("invalid predicted measurement")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(cov: [f64; 4], range: f64) -> MeasurementArgs {
        MeasurementArgs {
            yhat: vec![3.0, 4.0],
            cov: cov.to_vec(),
            range,
        }
    }

    #[test]
    fn builds_row_major_covariance() {
        let pm = args([4.0, 1.0, 1.0, 9.0], 5.0).predicted().unwrap();
        assert_eq!(pm.cov[(0, 1)], 1.0);
        assert_eq!(pm.cov[(1, 1)], 9.0);
        assert_eq!(pm.mean.y, 4.0);
    }

    #[test]
    fn rejects_asymmetric_or_wrong_length() {
        assert!(args([4.0, 1.0, 2.0, 9.0], 5.0).predicted().is_err());
        let mut short = args([4.0, 0.0, 0.0, 9.0], 5.0);
        short.cov.pop();
        assert!(short.predicted().is_err());
        assert!(args([4.0, 0.0, 0.0, 9.0], 0.0).params().is_err());
    }
}

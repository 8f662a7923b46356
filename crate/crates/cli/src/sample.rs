use std::f64::consts::PI;
use std::path::PathBuf;

use anyhow::Context;
use rotrack_core::density::log_azimuth_normalizer;
use rotrack_core::moments::{conditional_moments, MomentSettings};
use rotrack_core::oracle::quad_log_normalizer;
use rotrack_core::sampling::fit_wrapped_dirac;
use rotrack_core::{FitConfig, MomentSource};
use serde::Serialize;

use crate::measurement::MeasurementArgs;
use crate::output::{csv_writer, file_in};

#[derive(Debug, clap::Args)]
pub struct Args {
    #[command(flatten)]
    pub measurement: MeasurementArgs,
    /// Number of Dirac components.
    #[arg(long, default_value_t = 8)]
    pub components: usize,
    /// Number of moment orders to match.
    #[arg(long, default_value_t = 10)]
    pub moments: usize,
    /// Seed for the random restarts of the fit.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub terms: usize,
    /// Points of the density curve over one period.
    #[arg(long, default_value_t = 720)]
    pub grid: usize,
    /// Directory receiving dirac.csv and density.csv.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Serialize)]
struct DiracRow {
    l: usize,
    gamma_l: f64,
    theta_l: f64,
}

#[derive(Debug, Serialize)]
struct DensityRow {
    theta: f64,
    p: f64,
}

pub fn run(args: &Args) -> anyhow::Result<()> {
    anyhow::ensure!(args.grid >= 2, "--grid must be at least 2");
    let pp = args.measurement.params()?;
    let range = args.measurement.range;
    let settings = MomentSettings {
        n_terms: args.terms,
        max_order: args.moments,
        ..MomentSettings::default()
    };
    let (target, source) = conditional_moments(&pp, range, &settings).context("conditional moments")?;
    log::info!("moments from {source:?}");
    let fit_cfg = FitConfig {
        seed: args.seed,
        ..FitConfig::default()
    };
    let (dirac, report) = fit_wrapped_dirac(&target, args.components, &fit_cfg)?;
    log::info!(
        "fit residual {:.3e} after {} iterations (converged: {})",
        report.residual_norm,
        report.iterations,
        report.converged
    );

    let mut w = csv_writer(Some(&file_in(&args.out, "dirac.csv")?))?;
    for (l, (gamma, theta)) in dirac.iter().enumerate() {
        w.serialize(DiracRow {
            l: l + 1,
            gamma_l: gamma,
            theta_l: theta,
        })?;
    }
    w.flush()?;

    // Normalize the curve the same way the moments were obtained.
    let log_norm = match source {
        MomentSource::Series => log_azimuth_normalizer(&pp, range, args.terms)?,
        MomentSource::Quadrature => quad_log_normalizer(&pp, range, &settings.quadrature)?,
    };
    let mut w = csv_writer(Some(&file_in(&args.out, "density.csv")?))?;
    for i in 0..args.grid {
        let theta = -PI + 2.0 * PI * i as f64 / args.grid as f64;
        let p = (pp.exponent(theta, range) - log_norm).exp();
        w.serialize(DensityRow { theta, p })?;
    }
    w.flush()?;
    Ok(())
}

use std::path::PathBuf;

use anyhow::Context;
use rotrack_core::oracle::quad_moments;
use rotrack_core::{MomentSeries, QuadratureSpec};
use serde::Serialize;

use crate::measurement::MeasurementArgs;
use crate::output::csv_writer;

#[derive(Debug, clap::Args)]
pub struct Args {
    #[command(flatten)]
    pub measurement: MeasurementArgs,
    /// Highest moment order.
    #[arg(long, default_value_t = 10)]
    pub order: usize,
    /// Series truncation; 0 keeps only the leading term.
    #[arg(long, default_value_t = 5)]
    pub terms: usize,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the derived polar parameters as a one-row CSV.
    #[arg(long)]
    pub dump_params: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct Row {
    m: usize,
    c_m: f64,
    s_m: f64,
    oracle_c_m: f64,
    oracle_s_m: f64,
    abs_err: f64,
}

pub fn run(args: &Args) -> anyhow::Result<()> {
    anyhow::ensure!(args.order >= 1, "--order must be at least 1");
    let pp = args.measurement.params()?;
    let range = args.measurement.range;
    if let Some(path) = &args.dump_params {
        let mut w = csv_writer(Some(path))?;
        w.serialize(pp)?;
        w.flush()?;
    }
    let series = MomentSeries::new(&pp, range, args.terms, args.order, None)?;
    if !series.is_reliable() {
        log::warn!("series at r = {range} is numerically unreliable: {}", series.health());
    }
    let approx = series.moments().context("series moments")?;
    let reference = quad_moments(&pp, range, args.order, &QuadratureSpec::default()).context("quadrature moments")?;

    let mut w = csv_writer(args.out.as_deref())?;
    for (i, (&(c, s), &(oc, os))) in approx.pairs().iter().zip(reference.pairs()).enumerate() {
        w.serialize(Row {
            m: i + 1,
            c_m: c,
            s_m: s,
            oracle_c_m: oc,
            oracle_s_m: os,
            abs_err: (c - oc).abs().max((s - os).abs()),
        })?;
    }
    w.flush()?;
    Ok(())
}

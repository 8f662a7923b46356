use std::path::PathBuf;
use std::time::{Duration, Instant};

use rotrack_core::oracle::quad_moments;
use rotrack_core::reference::small_scale_example;
use rotrack_core::{MomentSeries, QuadratureSpec};
use serde::Serialize;

use crate::output::{csv_writer, file_in};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Seed of the noisy range in the benchmark configuration.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest number of series terms.
    #[arg(long, default_value_t = 20)]
    pub max_terms: usize,
    /// Minimum wall time spent timing each evaluation.
    #[arg(long, default_value_t = 100)]
    pub budget_ms: u64,
    /// Absolute and relative tolerance of the timed quadrature.
    #[arg(long, default_value_t = 1e-8)]
    pub quad_tol: f64,
    /// Directory receiving bench.csv.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Serialize)]
struct Row {
    n_terms: usize,
    series_ns: f64,
    quad_ns: f64,
    abs_err_cos: f64,
    abs_err_sin: f64,
}

fn nanos_per_call(mut f: impl FnMut(), budget: Duration) -> f64 {
    f();
    let start = Instant::now();
    let mut calls = 0u64;
    while calls == 0 || start.elapsed() < budget {
        f();
        calls += 1;
    }
    start.elapsed().as_nanos() as f64 / calls as f64
}

pub fn run(args: &Args) -> anyhow::Result<()> {
    let ex = small_scale_example(args.seed);
    let pp = ex.params()?;
    let range = ex.range;
    let budget = Duration::from_millis(args.budget_ms);
    let timed_spec = QuadratureSpec::new(args.quad_tol, args.quad_tol, 2000)?;
    let (ref_c, ref_s) = quad_moments(&pp, range, 1, &QuadratureSpec::default())?.order(1)?;
    let quad_ns = nanos_per_call(
        || {
            std::hint::black_box(quad_moments(std::hint::black_box(&pp), range, 1, &timed_spec).ok());
        },
        budget,
    );

    let mut w = csv_writer(Some(&file_in(&args.out, "bench.csv")?))?;
    for n in 1..=args.max_terms {
        let (c, s) = MomentSeries::new(&pp, range, n, 1, None)?.moments()?.order(1)?;
        let series_ns = nanos_per_call(
            || {
                let series = MomentSeries::new(std::hint::black_box(&pp), range, n, 1, None);
                std::hint::black_box(series.and_then(|s| s.moments()).ok());
            },
            budget,
        );
        w.serialize(Row {
            n_terms: n,
            series_ns,
            quad_ns,
            abs_err_cos: (c - ref_c).abs(),
            abs_err_sin: (s - ref_s).abs(),
        })?;
    }
    w.flush()?;
    Ok(())
}

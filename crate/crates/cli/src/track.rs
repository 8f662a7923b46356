use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use rotrack_core::simulation::{run_monte_carlo, FilterKind, StudyResults};
use rotrack_core::ScenarioConfig;

use crate::output::{csv_writer, file_in};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Scenario file, TOML or JSON by extension. Missing keys take defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override the number of Monte-Carlo runs.
    #[arg(long)]
    pub runs: Option<usize>,
    /// Override the master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory receiving the per-step CSV files.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

pub fn load_config(path: &Path) -> anyhow::Result<ScenarioConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    let cfg = match ext {
        "json" => serde_json::from_str(&text).with_context(|| format!("invalid JSON in {}", path.display()))?,
        "toml" => toml::from_str(&text).with_context(|| format!("invalid TOML in {}", path.display()))?,
        other => bail!("unknown config extension {other:?}; use .toml or .json"),
    };
    Ok(cfg)
}

fn write_per_filter(path: &Path, study: &StudyResults, pick: fn(&rotrack_core::RunMetrics) -> &Vec<f64>) -> anyhow::Result<()> {
    let mut w = csv_writer(Some(path))?;
    let mut header = vec!["step".to_owned()];
    header.extend(study.filters.iter().map(|m| m.filter.to_string()));
    w.write_record(&header)?;
    let steps = study.filters.first().map_or(0, |m| pick(m).len());
    for k in 0..steps {
        let mut row = vec![k.to_string()];
        row.extend(study.filters.iter().map(|m| pick(m)[k].to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_study(dir: &Path, study: &StudyResults) -> anyhow::Result<()> {
    write_per_filter(&file_in(dir, "pos_rmse.csv")?, study, |m| &m.pos_rmse)?;
    write_per_filter(&file_in(dir, "vel_rmse.csv")?, study, |m| &m.vel_rmse)?;
    write_per_filter(&file_in(dir, "nees.csv")?, study, |m| &m.nees)?;

    let mut w = csv_writer(Some(&file_in(dir, "crlb.csv")?))?;
    w.write_record(["step", "pos", "vel"])?;
    for (k, (p, v)) in study.crlb_pos.iter().zip(&study.crlb_vel).enumerate() {
        w.write_record([k.to_string(), p.to_string(), v.to_string()])?;
    }
    w.flush()?;

    let mut w = csv_writer(Some(&file_in(dir, "trajectory.csv")?))?;
    for point in &study.trajectory {
        w.serialize(point)?;
    }
    w.flush()?;
    Ok(())
}

pub fn run(args: &Args) -> anyhow::Result<()> {
    let mut cfg = match &args.config {
        Some(path) => load_config(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(runs) = args.runs {
        cfg.runs = runs;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let study = run_monte_carlo(&cfg)?;
    write_study(&args.out, &study)?;
    for kind in FilterKind::ALL {
        if let Some(m) = study.metrics(kind) {
            let last = m.pos_rmse.last().copied().unwrap_or(f64::NAN);
            log::info!("{kind}: final position RMSE {last:.1} m, {} failed runs", m.failed_runs);
        }
    }
    log::info!("update counts: {:?}", study.counts);
    Ok(())
}

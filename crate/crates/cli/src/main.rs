//! `rotrack`: circular moments, wrapped Dirac sampling and range-only
//! tracking studies from the command line. Every subcommand writes CSV.

mod bench;
mod measurement;
mod moments;
mod output;
mod sample;
mod track;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "rotrack", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Series moments of the range-conditioned azimuth next to the quadrature reference.
    Moments(moments::Args),
    /// Fit a wrapped Dirac mixture to the conditional azimuth moments.
    Sample(sample::Args),
    /// Monte-Carlo tracking study of the mixture filter, EKF and UKF.
    Track(track::Args),
    /// Time the series against quadrature for 1 to 20 terms.
    Bench(bench::Args),
}

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Moments(args) => moments::run(&args),
        Command::Sample(args) => sample::run(&args),
        Command::Track(args) => track::run(&args),
        Command::Bench(args) => bench::run(&args),
    }
}

//! `maxplus`: command-line front end for the max-plus Martin boundary toolkit.
//!
//! Every command prints one JSON report (or a flat table) and exits 0
//! only when all of its verdicts pass; 1 means a verdict failed, 2 an
//! input or runtime error.

mod corpus;
mod geodesic;
mod input;
mod martin;
mod metric;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "maxplus", version, about = "Max-plus Martin boundaries, representing measures and horofunctions")]
struct Cli {
    #[command(flatten)]
    config: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    /// Numerical tolerance for every comparison.
    #[arg(long, global = true, default_value_t = 1e-9, value_parser = positive)]
    pub tol: f64,
    /// Distance from the window boundary below which equalities are not judged.
    #[arg(long, global = true, default_value_t = 0)]
    pub window_margin: u32,
    /// Step budget for constructed paths.
    #[arg(long, global = true, default_value_t = 100)]
    pub horizon: usize,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Table,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(_) => Err("must be a positive number".into()),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Kleene star and plus of a kernel.
    Star(martin::StarArgs),
    /// Martin kernel normalized at the basepoint.
    Martin(martin::KernelArgs),
    /// Diagonal of the minimal-space kernel and the minimal points.
    MinimalSpace(martin::FamilyArgs),
    /// Maximum and minimum representing measures of a superharmonic vector.
    Measures(martin::MeasuresArgs),
    /// Checks that a measure represents a vector.
    Represent(martin::RepresentArgs),
    /// Almost-geodesic certificates.
    #[command(subcommand)]
    Geodesic(geodesic::GeodesicCommand),
    /// Metric boundary: distance-like functions and Busemann points.
    #[command(subcommand)]
    Metric(metric::MetricCommand),
    /// Built-in instances.
    #[command(subcommand)]
    Corpus(corpus::CorpusCommand),
}

/// A report with its overall verdict.
pub struct Outcome {
    pub report: serde_json::Value,
    pub pass: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = cli.config;
    let outcome = match cli.command {
        Command::Star(a) => martin::star(&a, &cfg),
        Command::Martin(a) => martin::martin(&a, &cfg),
        Command::MinimalSpace(a) => martin::minimal_space(&a, &cfg),
        Command::Measures(a) => martin::measures(&a, &cfg),
        Command::Represent(a) => martin::represent(&a, &cfg),
        Command::Geodesic(c) => geodesic::run(&c, &cfg),
        Command::Metric(c) => metric::run(&c, &cfg),
        Command::Corpus(c) => corpus::run(&c, &cfg),
    };
    let result = outcome.and_then(|o| output::emit(&o.report, &cfg).map(|()| o.pass));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

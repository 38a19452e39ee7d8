use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use smoothed_clo::{Covering, PivotKind};
use smoothed_clo_harness::experiment::{run_experiment, write_outputs, ExperimentSpec, InstanceSource, Mode};
use smoothed_clo_harness::generate::{generate, GenFamily, GenParams};
use smoothed_clo_harness::instance::InstanceFile;
use smoothed_clo_harness::report::{bound_report, certify_report, oracle_verify, reduce, run_report, Reduction};

#[derive(Parser)]
#[command(name = "clolab", version, about = "Smoothed local search experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Pivot {
    First,
    Best,
    Random,
}

impl From<Pivot> for PivotKind {
    fn from(p: Pivot) -> Self {
        match p {
            Pivot::First => PivotKind::First,
            Pivot::Best => PivotKind::Best,
            Pivot::Random => PivotKind::Random,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated instance file.
    Gen {
        #[arg(long, value_enum)]
        family: GenFamily,
        /// Players, vertices, variables or ground elements.
        #[arg(long, default_value_t = 4)]
        size: usize,
        /// Neighborhood or block parameter; the family default when omitted.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Shared phi written to the smoothing block.
        #[arg(long, default_value_t = 1.0)]
        phi: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// One local search run; smoothed costs when --phi is given, nominal otherwise.
    Run {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "first")]
        pivot: Pivot,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        phi: Option<f64>,
        #[arg(long, default_value_t = 1_000_000)]
        max_iters: u64,
    },
    /// Monte Carlo replicas over smoothed costs, written as CSV.
    Experiment {
        /// JSON experiment spec; the flags below are ignored when given.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, conflicts_with = "family")]
        instance: Option<PathBuf>,
        #[arg(long, value_enum)]
        family: Option<GenFamily>,
        /// Generator sizes to sweep (with --family).
        #[arg(long, value_delimiter = ',')]
        size: Vec<usize>,
        #[arg(long)]
        k: Option<usize>,
        /// Phi values to sweep; the instance's smoothing block when omitted.
        #[arg(long, value_delimiter = ',')]
        phi: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        replicas: usize,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "first")]
        pivot: Vec<Pivot>,
        #[arg(long, value_enum, default_value = "engine")]
        mode: Mode,
        #[arg(long, default_value = "experiment.csv")]
        out: PathBuf,
    },
    /// Certify the prescribed covering, or an attached one, and print its parameters.
    Certify {
        #[arg(long)]
        instance: PathBuf,
        /// Covering JSON to check instead of the prescribed one.
        #[arg(long)]
        covering: Option<PathBuf>,
    },
    /// Print the iteration bounds for an instance.
    Bound {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        phi: Option<f64>,
    },
    /// Apply a reduction and write the produced instance.
    Reduce {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum)]
        reduction: Reduction,
        /// Block count for max-k-cut.
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross-check sinks, local optima, the longest improving path and the engine.
    OracleVerify {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        phi: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// `Ok(false)` means a check failed.
fn execute(command: Command) -> Result<bool> {
    match command {
        Command::Gen { family, size, k, seed, phi, out } => {
            let file = generate(&GenParams::new(family, size, k, seed), phi)?;
            file.save(&out)?;
            println!("wrote {} ({})", out.display(), file.problem.family());
            Ok(true)
        }
        Command::Run { instance, pivot, seed, phi, max_iters } => {
            let file = InstanceFile::load(&instance)?;
            println!("{}", run_report(&file, pivot.into(), seed, phi, max_iters)?);
            Ok(true)
        }
        Command::Experiment { spec, instance, family, size, k, phi, seed, replicas, pivot, mode, out } => {
            let spec = match spec {
                Some(path) => ExperimentSpec::load(&path)?,
                None => {
                    let source = match (instance, family) {
                        (Some(path), _) => InstanceSource::File(path),
                        (None, Some(family)) => {
                            InstanceSource::Generate(GenParams::new(family, size.first().copied().unwrap_or(4), k, seed))
                        }
                        (None, None) => bail!("give --spec, --instance or --family"),
                    };
                    ExperimentSpec {
                        source,
                        phi,
                        sizes: if size.len() > 1 { size } else { Vec::new() },
                        pivots: pivot.into_iter().map(Into::into).collect(),
                        replicas,
                        seed,
                        mode,
                        out,
                    }
                }
            };
            let results = run_experiment(&spec)?;
            for r in &results {
                let pivot = r.pivot.map_or("oracle".to_string(), |p| format!("{p:?}").to_lowercase());
                let size = r.size.map(|n| format!(" n={n}")).unwrap_or_default();
                let bound = r.bound.map_or("none".to_string(), |b| format!("{b:.4e}"));
                println!(
                    "{} {pivot} phi={}{size}: mean {:.3} +- {:.3} over {} replicas, bound {bound}: {}",
                    r.family,
                    r.phi,
                    r.mean,
                    r.stderr,
                    r.rows.len(),
                    if r.pass { "pass" } else { "FAIL" }
                );
            }
            for path in write_outputs(&spec, &results)? {
                println!("wrote {}", path.display());
            }
            Ok(results.iter().all(|r| r.pass))
        }
        Command::Certify { instance, covering } => {
            let file = InstanceFile::load(&instance)?;
            let covering = match covering {
                Some(path) => {
                    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                    Some(serde_json::from_str::<Covering>(&text).with_context(|| format!("parsing {}", path.display()))?)
                }
                None => None,
            };
            println!("{}", certify_report(&file, covering)?);
            Ok(true)
        }
        Command::Bound { instance, phi } => {
            let file = InstanceFile::load(&instance)?;
            println!("{}", bound_report(&file, phi)?);
            Ok(true)
        }
        Command::Reduce { instance, reduction, k, out } => {
            let file = InstanceFile::load(&instance)?;
            let outcome = reduce(&file, reduction, k)?;
            outcome.file.save(&out)?;
            println!(
                "wrote {} ({}, size {} <= {})",
                out.display(),
                outcome.file.problem.family(),
                outcome.size.target,
                outcome.size.bound
            );
            Ok(true)
        }
        Command::OracleVerify { instance, phi, seed } => {
            let file = InstanceFile::load(&instance)?;
            let report = oracle_verify(&file, phi, seed)?;
            println!("{report}");
            Ok(report.pass())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

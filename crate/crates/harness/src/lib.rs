//! Experiment harness: instance files, generators, Monte Carlo runs over
//! smoothed costs, CSV and SVG output, and the single-instance reports behind
//! the `clolab` command line.

pub mod experiment;
pub mod generate;
pub mod instance;
pub mod plot;
pub mod report;

pub use experiment::{run_experiment, write_outputs, ExperimentResult, ExperimentSpec, InstanceSource, Mode, ReplicaRow};
pub use generate::{generate, GenFamily, GenParams};
pub use instance::{InstanceFile, Problem, Smoothing};

//! Experiment driver: configuration, runs, sweeps and CSV output.

mod config;
mod run;
mod sim;

pub use config::{time_index, MeshConfig, OutputConfig, ProblemConfig, RunConfig, SweepConfig};
pub use run::{run, sweep_gamma1, RunSummary, SweepRow, SweepSummary};
pub use sim::Simulation;

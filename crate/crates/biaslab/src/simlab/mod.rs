//! Monte Carlo harness: scenario configs, paired with/without-bias sweeps
//! and their CSV/JSON outputs.

pub mod config;
pub mod experiment;
pub mod output;

pub use config::{BeliefSource, BiasTemplate, Experiment, NetworkSource, QSource, Scale, ScenarioConfig, SCHEMA_VERSION, SET2_Q};
pub use experiment::{paired_t_test, run_experiment, summarize, ArmRecord, ArmSummary, ExperimentOutput, PairedTest, RunRecord, Summary, ARMS};
pub use output::{write_outputs, write_polarization, write_runs, write_shocks, RUNS_COLUMNS};

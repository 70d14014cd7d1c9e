//! Experiment driver: runs one configured optimizer, records a metrics row
//! per epoch, sweeps constant stepsizes and writes CSV.

pub mod config;
pub mod metrics;
pub mod runner;
pub mod sweep;

pub use config::{DatasetSource, EtaChoice, ExperimentConfig, Mode};
pub use metrics::{render_csv, write_csv, MetricsRow, CSV_HEADER};
pub use runner::{load_problem, run_experiment, run_with_eta, RunReport};
pub use sweep::{default_grid, stepsize_sweep, SweepOutcome, SweepPoint};

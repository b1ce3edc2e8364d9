//! Batch experiments: config ingestion, A/sigma sweeps and CSV reports.

pub mod config;
mod report;
mod sweep;

pub use config::{
    load_config, ConfigError, DbConvention, ExperimentConfig, Method, ModulationConfig, NoiseConfig,
    PhotometryConfig, RoomConfig,
};
pub use report::{pmf_report, read_pmf_report, PmfReport, UserPmfSummary, ACTIVE_THRESHOLD};
pub use sweep::{
    point_label, point_seed, run_point, run_sweep, sweep_points, write_sweep, PointFailure, PointOutcome,
    PointTrace, SweepResult,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Solver(#[from] crate::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("no result for A/sigma = {0} dB")]
    MissingPoint(f64),
    #[error("malformed report file {path}: {reason}")]
    Malformed { path: String, reason: String },
}

//! Library behind the `sigedge` binary: run configuration, experiment
//! drivers, detection metrics, and bundle output. Kept as a library so
//! integration tests can drive full experiments in-process.

pub mod config;
pub mod experiment;
pub mod metrics;
pub mod output;

use thiserror::Error;

pub use config::{kernel_name, parse_kernel, parse_tail_mode, ExperimentConfig, NoiseModel};
pub use experiment::{run_experiment, run_preset, ExperimentOutput, Preset};
pub use metrics::{detection_metrics, DetectionMetrics};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] sigedge::Error),
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Exit code classes: 2 for configuration/input problems, 3 for numerical
/// degeneracy detected while computing laws or thresholds.
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_DEGENERATE: u8 = 3;

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(sigedge::Error::DegenerateLaw(_)) => EXIT_DEGENERATE,
            _ => EXIT_CONFIG,
        }
    }
}

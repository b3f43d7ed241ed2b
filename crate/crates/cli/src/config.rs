//! Run configuration shared by the subcommands and the canned experiments.

use serde::Serialize;
use sigedge::phantom::PhantomSpec;
use sigedge::{KernelKind, TailMode};

use crate::CliError;

/// Which noise model calibrates the thresholds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseModel {
    /// i.i.d. Gaussian noise added to the image itself.
    White,
    /// i.i.d. Gaussian noise on the radiograph, correlated by reconstruction.
    Tomo,
}

impl NoiseModel {
    pub fn name(&self) -> &'static str {
        match self {
            NoiseModel::White => "white",
            NoiseModel::Tomo => "tomo",
        }
    }
}

impl std::str::FromStr for NoiseModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "white" => Ok(NoiseModel::White),
            "tomo" => Ok(NoiseModel::Tomo),
            other => Err(format!("unknown noise model {other:?} (expected white|tomo)")),
        }
    }
}

/// Parses `single:R` or `diff:R1:R2`.
pub fn parse_kernel(s: &str) -> Result<KernelKind, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let radius = |t: &str| -> Result<u32, String> {
        t.parse().map_err(|_| format!("bad kernel radius {t:?}"))
    };
    let kind = match parts.as_slice() {
        ["single", r] => KernelKind::Single { r: radius(r)? },
        ["diff", r1, r2] => KernelKind::Diff { r1: radius(r1)?, r2: radius(r2)? },
        _ => return Err(format!("unknown kernel {s:?} (expected single:R or diff:R1:R2)")),
    };
    kind.validate().map_err(|e| e.to_string())?;
    Ok(kind)
}

/// Inverse of [`parse_kernel`], used in manifests and file names.
pub fn kernel_name(kind: KernelKind) -> String {
    match kind {
        KernelKind::Single { r } => format!("single:{r}"),
        KernelKind::Diff { r1, r2 } => format!("diff:{r1}:{r2}"),
    }
}

pub fn parse_tail_mode(s: &str) -> Result<TailMode, String> {
    match s {
        "exact" => Ok(TailMode::Exact),
        "approx" => Ok(TailMode::Approx),
        other => Err(format!("unknown tail mode {other:?} (expected exact|approx)")),
    }
}

/// One full detection run.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub name: String,
    pub phantom: PhantomSpec,
    pub noise: NoiseModel,
    pub sigma: f64,
    pub kernel: KernelKind,
    pub epsilon: f64,
    pub tail_mode: TailMode,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        self.phantom.validate()?;
        self.kernel.validate()?;
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(CliError::Config(format!("sigma must be positive, got {}", self.sigma)));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(CliError::Config(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Manifest echo of a config, serialized into every output bundle.
#[derive(Serialize)]
pub struct ConfigEcho {
    pub name: String,
    pub noise: String,
    pub sigma: f64,
    pub kernel: String,
    pub epsilon: f64,
    pub tail_mode: String,
    pub seed: u64,
}

impl From<&ExperimentConfig> for ConfigEcho {
    fn from(c: &ExperimentConfig) -> Self {
        ConfigEcho {
            name: c.name.clone(),
            noise: c.noise.name().to_string(),
            sigma: c.sigma,
            kernel: kernel_name(c.kernel),
            epsilon: c.epsilon,
            tail_mode: c.tail_mode.name().to_string(),
            seed: c.seed,
        }
    }
}

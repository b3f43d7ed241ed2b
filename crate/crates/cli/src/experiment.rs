//! End-to-end detection runs and the canned experiment presets.

use std::path::Path;

use serde::Serialize;
use sigedge::phantom::{ground_truth_edges, render, PhantomSpec};
use sigedge::tomo::{threshold_profile, ColumnCovariance, ThresholdProfile};
use sigedge::white::{sample_white_field, white_threshold_for_kernel, WhiteNoiseSpec};
use sigedge::{
    contrast_field, radiograph, reconstruct, significant_edges, zero_crossings, AbelOperator,
    ContrastKernel, EdgeMap, Image, KernelKind, Mask, TailMode, ThresholdRule,
};

use crate::config::{ConfigEcho, ExperimentConfig, NoiseModel};
use crate::metrics::{detection_metrics, DetectionMetrics};
use crate::output::Bundle;
use crate::CliError;

/// Border band excluded from tomographic metrics: reconstruction is biased
/// near the outer truncation of the slice, independent of the kernel radius.
pub const TOMO_BORDER_EXCLUSION: usize = 40;

/// Everything a run produces besides its files.
pub struct ExperimentOutput {
    pub metrics: DetectionMetrics,
    pub edge_map: EdgeMap<f64>,
    pub truth: Mask,
}

/// Runs one detection experiment and writes its bundle into `dir`.
pub fn run_experiment(config: &ExperimentConfig, dir: &Path) -> Result<ExperimentOutput, CliError> {
    config.validate()?;
    let mut bundle = Bundle::create(dir)?;

    let phantom: Image = render(&config.phantom)?;
    let truth = ground_truth_edges(&config.phantom)?;
    bundle.write_field("phantom", &phantom)?;
    bundle.write_mask("truth", &truth)?;

    let kernel = ContrastKernel::<f64>::new(config.kernel)?;
    let margin = config.kernel.support_radius() as usize;

    let noise_spec = WhiteNoiseSpec {
        rows: phantom.rows(),
        cols: phantom.cols(),
        sigma: config.sigma,
        seed: config.seed,
    };

    let (observed, rule_data) = match config.noise {
        NoiseModel::White => {
            let noise: Image = sample_white_field(&noise_spec)?;
            let noisy = phantom.zip_map(&noise, |a, b| a + b)?;
            bundle.write_field("noisy", &noisy)?;
            let threshold =
                white_threshold_for_kernel(config.epsilon, config.sigma, config.kernel)?;
            (noisy, RuleData::Scalar(threshold))
        }
        NoiseModel::Tomo => {
            let op = AbelOperator::<f64>::new(phantom.cols() / 2)?;
            let clean = radiograph(&phantom, &op)?;
            bundle.write_field("radiograph", &clean)?;
            let noise: Image = sample_white_field(&noise_spec)?;
            let noisy = clean.zip_map(&noise, |a, b| a + b)?;
            bundle.write_field("radiograph_noisy", &noisy)?;
            let recon = reconstruct(&noisy, &op)?;
            bundle.write_field("reconstruction", &recon)?;
            let cov = ColumnCovariance::from_operator(&op, config.sigma)?;
            let profile =
                threshold_profile(&cov, config.kernel, config.epsilon, config.tail_mode)?;
            let mut csv = Vec::new();
            profile.write_csv(&mut csv)?;
            bundle.write_text("thresholds.csv", std::str::from_utf8(&csv).unwrap())?;
            (recon, RuleData::Profile(profile))
        }
    };

    let field = contrast_field(&observed, &kernel)?;
    let crossings = zero_crossings(&field.lap, margin);
    let rule = match &rule_data {
        RuleData::Scalar(s) => ThresholdRule::Scalar(*s),
        RuleData::Profile(p) => ThresholdRule::Profile(p),
    };
    let edge_map = significant_edges(&crossings, &field.c, margin, rule)?;

    bundle.write_field("contrast", &edge_map.contrast_at_crossing)?;
    bundle.write_mask("crossings", &edge_map.crossings)?;
    bundle.write_mask("significant", &edge_map.significant)?;

    let border = match config.noise {
        NoiseModel::White => margin,
        NoiseModel::Tomo => margin.max(TOMO_BORDER_EXCLUSION),
    };
    let metrics = detection_metrics(&truth, &edge_map, border);
    bundle.write_toml("metrics.toml", &metrics)?;
    bundle.finish(&ConfigEcho::from(config), &config.phantom, Some(&metrics))?;

    Ok(ExperimentOutput { metrics, edge_map, truth })
}

enum RuleData {
    Scalar(f64),
    Profile(ThresholdProfile),
}

/// The canned experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    /// White noise, moderate deviation: near-complete, well-localized edges.
    WhiteBase,
    /// White noise, doubled deviation: calibrated thresholds drop weak edges
    /// rather than hallucinate.
    WhiteDouble,
    /// Reconstructed noise: detection thins out near the axis where the
    /// inverse amplifies noise most.
    TomoBase,
    /// Radius sweep under reconstructed noise: localization accuracy versus
    /// coverage.
    RadiusSweep,
    /// Slowly drifting background: the single-radius contrast false-alarms,
    /// the two-radius difference contrast stays calibrated.
    Drift,
}

impl std::str::FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "white-base" => Ok(Preset::WhiteBase),
            "white-double" => Ok(Preset::WhiteDouble),
            "tomo-base" => Ok(Preset::TomoBase),
            "radius-sweep" => Ok(Preset::RadiusSweep),
            "drift" => Ok(Preset::Drift),
            other => Err(format!(
                "unknown preset {other:?} \
                 (expected white-base|white-double|tomo-base|radius-sweep|drift)"
            )),
        }
    }
}

/// Detection threshold deviation for the white presets.
pub const WHITE_SIGMA_BASE: f64 = 0.2;
/// Radiograph noise deviation for the tomographic presets.
pub const TOMO_SIGMA: f64 = 4.0;
/// Radiograph noise deviation for the drifting-background preset; small
/// enough that the background drift dominates the single-radius contrast.
pub const SLOPE_SIGMA: f64 = 0.125;
/// Background drift of the sloped phantom, per pixel of distance from the
/// axis.
pub const SLOPE_RATE: f64 = 0.002;
/// Per-candidate false-alarm probability used by every preset.
pub const PRESET_EPSILON: f64 = 1e-5;

fn base_config(name: &str, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        name: name.to_string(),
        phantom: PhantomSpec::default(),
        noise: NoiseModel::White,
        sigma: WHITE_SIGMA_BASE,
        kernel: KernelKind::Single { r: 12 },
        epsilon: PRESET_EPSILON,
        tail_mode: TailMode::Exact,
        seed,
    }
}

/// Per-run label and metrics, serialized next to multi-run presets.
#[derive(Serialize)]
pub struct SweepEntry {
    pub label: String,
    pub metrics: DetectionMetrics,
}

#[derive(Serialize)]
struct SweepSummary<'a> {
    runs: &'a [SweepEntry],
}

/// Runs a preset into `dir`. Multi-run presets write one subdirectory per
/// run plus a summary file; single runs write their bundle directly.
pub fn run_preset(preset: Preset, seed: u64, dir: &Path) -> Result<Vec<SweepEntry>, CliError> {
    let entries = match preset {
        Preset::WhiteBase => {
            let config = base_config("white-base", seed);
            vec![labeled(run_experiment(&config, dir)?, "white-0.2")]
        }
        Preset::WhiteDouble => {
            let mut config = base_config("white-double", seed);
            config.sigma = 2.0 * WHITE_SIGMA_BASE;
            vec![labeled(run_experiment(&config, dir)?, "white-0.4")]
        }
        Preset::TomoBase => {
            let mut config = base_config("tomo-base", seed);
            config.noise = NoiseModel::Tomo;
            config.sigma = TOMO_SIGMA;
            vec![labeled(run_experiment(&config, dir)?, "tomo-4.0")]
        }
        Preset::RadiusSweep => {
            let mut entries = Vec::new();
            for r in [6u32, 12, 20] {
                let mut config = base_config("radius-sweep", seed);
                config.noise = NoiseModel::Tomo;
                config.sigma = TOMO_SIGMA;
                config.kernel = KernelKind::Single { r };
                let out = run_experiment(&config, &dir.join(format!("r{r:02}")))?;
                entries.push(labeled(out, &format!("r{r:02}")));
            }
            entries
        }
        Preset::Drift => {
            let mut entries = Vec::new();
            for (label, kernel) in [
                ("c1", KernelKind::Single { r: 12 }),
                ("c2", KernelKind::Diff { r1: 6, r2: 12 }),
            ] {
                let mut config = base_config("drift", seed);
                config.phantom.slope_rate = Some(SLOPE_RATE);
                config.noise = NoiseModel::Tomo;
                config.sigma = SLOPE_SIGMA;
                config.kernel = kernel;
                let out = run_experiment(&config, &dir.join(label))?;
                entries.push(labeled(out, label));
            }
            entries
        }
    };
    if entries.len() > 1 {
        let summary = SweepSummary { runs: &entries };
        let text = toml::to_string_pretty(&summary)
            .map_err(|e| CliError::Config(format!("serializing sweep summary: {e}")))?;
        crate::output::atomic_write(&dir.join("summary.toml"), text.as_bytes())?;
    }
    Ok(entries)
}

fn labeled(out: ExperimentOutput, label: &str) -> SweepEntry {
    SweepEntry { label: label.to_string(), metrics: out.metrics }
}

/// Builds the threshold profile a `detect`/`thresholds` invocation needs.
pub fn build_profile(
    width: usize,
    sigma: f64,
    kernel: KernelKind,
    epsilon: f64,
    noise: NoiseModel,
    tail_mode: TailMode,
) -> Result<ThresholdProfile, CliError> {
    if width % 2 != 0 {
        return Err(CliError::Config(format!(
            "width {width} is odd; the symmetry axis must fall between two columns"
        )));
    }
    let cov = match noise {
        NoiseModel::White => ColumnCovariance::white(width, sigma)?,
        NoiseModel::Tomo => {
            let op = AbelOperator::<f64>::new(width / 2)?;
            ColumnCovariance::from_operator(&op, sigma)?
        }
    };
    Ok(threshold_profile(&cov, kernel, epsilon, tail_mode)?)
}

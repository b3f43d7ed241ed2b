use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sigedge::phantom::{ground_truth_edges, load_spec, render, spec_to_toml, PhantomSpec};
use sigedge::white::{sample_white_field, white_threshold_for_kernel, WhiteNoiseSpec};
use sigedge::{
    contrast_field, radiograph, reconstruct, significant_edges, zero_crossings, AbelOperator,
    ContrastKernel, Image, KernelKind, TailMode, ThresholdRule,
};
use sigedge_cli::config::{parse_kernel, parse_tail_mode};
use sigedge_cli::experiment::{build_profile, run_preset, Preset};
use sigedge_cli::output::{atomic_write, Bundle};
use sigedge_cli::{CliError, NoiseModel};

/// Statistically calibrated edge detection: phantoms, projections,
/// thresholds, detection, and reproducible experiments.
#[derive(Parser)]
#[command(name = "sigedge", version, about, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a phantom slice: density grid, visualization, ground-truth
    /// edges, and the config actually used.
    Phantom {
        /// TOML phantom description; built-in default when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the density slope (per pixel of distance from the axis).
        #[arg(long)]
        slope: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Project a slice image into its line-of-sight radiograph.
    Radiograph {
        /// Input grid (`.grd`) or PGM image.
        #[arg(long)]
        input: PathBuf,
        /// Optional white noise deviation added to the projection.
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Invert a radiograph row by row.
    Reconstruct {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-column detection thresholds as CSV.
    Thresholds {
        /// Full image width in pixels (even).
        #[arg(long)]
        width: usize,
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        epsilon: f64,
        /// `single:R` or `diff:R1:R2`.
        #[arg(long, value_parser = parse_kernel)]
        kernel: KernelKind,
        /// `white` or `tomo`.
        #[arg(long, default_value = "tomo")]
        noise: NoiseModel,
        /// `exact` or `approx`.
        #[arg(long, default_value = "exact", value_parser = parse_tail_mode)]
        tail: TailMode,
        #[arg(long)]
        out: PathBuf,
    },
    /// Detect significant edges in an existing image.
    Detect {
        /// Input grid (`.grd`) or PGM image.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = parse_kernel)]
        kernel: KernelKind,
        #[arg(long)]
        epsilon: f64,
        /// Noise model the thresholds are calibrated against.
        #[arg(long)]
        noise: NoiseModel,
        /// Noise deviation: of the image itself (`white`) or of the
        /// radiograph the image was reconstructed from (`tomo`).
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value = "exact", value_parser = parse_tail_mode)]
        tail: TailMode,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a canned, fully reproducible experiment.
    Experiment {
        /// white-base | white-double | tomo-base | radius-sweep | drift
        #[arg(long)]
        preset: Preset,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Phantom { config, slope, out } => {
            let mut spec = match config {
                Some(path) => load_spec(&path)?,
                None => PhantomSpec::default(),
            };
            if let Some(rate) = slope {
                spec.slope_rate = if rate == 0.0 { None } else { Some(rate) };
            }
            spec.validate()?;
            let img: Image = render(&spec)?;
            let truth = ground_truth_edges(&spec)?;
            let mut bundle = Bundle::create(&out)?;
            bundle.write_field("phantom", &img)?;
            bundle.write_mask("truth", &truth)?;
            bundle.write_text("phantom.toml", &spec_to_toml(&spec))?;
            println!("phantom: {}x{} written to {}", spec.rows, spec.cols, out.display());
            Ok(())
        }
        Command::Radiograph { input, sigma, seed, out } => {
            let slice = read_image(&input)?;
            let op = AbelOperator::<f64>::new(slice.cols() / 2)?;
            let mut g = radiograph(&slice, &op)?;
            if let Some(sigma) = sigma {
                let noise: Image = sample_white_field(&WhiteNoiseSpec {
                    rows: g.rows(),
                    cols: g.cols(),
                    sigma,
                    seed,
                })?;
                g = g.zip_map(&noise, |a, b| a + b)?;
            }
            let mut bundle = Bundle::create(&out)?;
            bundle.write_field("radiograph", &g)?;
            println!("radiograph: {}x{} written to {}", g.rows(), g.cols(), out.display());
            Ok(())
        }
        Command::Reconstruct { input, out } => {
            let g = read_image(&input)?;
            let op = AbelOperator::<f64>::new(g.cols() / 2)?;
            let rec = reconstruct(&g, &op)?;
            let mut bundle = Bundle::create(&out)?;
            bundle.write_field("reconstruction", &rec)?;
            println!("reconstruction: {}x{} written to {}", rec.rows(), rec.cols(), out.display());
            Ok(())
        }
        Command::Thresholds { width, sigma, epsilon, kernel, noise, tail, out } => {
            let profile = build_profile(width, sigma, kernel, epsilon, noise, tail)?;
            let mut csv = Vec::new();
            profile.write_csv(&mut csv)?;
            if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            atomic_write(&out, &csv)?;
            let (first, last) = profile.column_range();
            println!("thresholds: columns {first}..={last} written to {}", out.display());
            Ok(())
        }
        Command::Detect { input, kernel, epsilon, noise, sigma, tail, out } => {
            let img = read_image(&input)?;
            let contrast = ContrastKernel::<f64>::new(kernel)?;
            let margin = kernel.support_radius() as usize;
            let field = contrast_field(&img, &contrast)?;
            let crossings = zero_crossings(&field.lap, margin);
            let profile;
            let rule = match noise {
                NoiseModel::White => {
                    ThresholdRule::Scalar(white_threshold_for_kernel(epsilon, sigma, kernel)?)
                }
                NoiseModel::Tomo => {
                    profile = build_profile(img.cols(), sigma, kernel, epsilon, noise, tail)?;
                    ThresholdRule::Profile(&profile)
                }
            };
            let map = significant_edges(&crossings, &field.c, margin, rule)?;
            let mut bundle = Bundle::create(&out)?;
            bundle.write_field("contrast", &map.contrast_at_crossing)?;
            bundle.write_mask("crossings", &map.crossings)?;
            bundle.write_mask("significant", &map.significant)?;
            println!(
                "detect: {} crossings, {} significant, masks written to {}",
                map.crossing_count(),
                map.significant_count(),
                out.display()
            );
            Ok(())
        }
        Command::Experiment { preset, seed, out } => {
            let entries = run_preset(preset, seed, &out)?;
            for e in &entries {
                println!(
                    "{}: coverage {:.3}, significant {}, false positives {}, mean distance {:.2}",
                    e.label,
                    e.metrics.coverage,
                    e.metrics.significant,
                    e.metrics.false_positives,
                    e.metrics.mean_distance
                );
            }
            Ok(())
        }
    }
}

/// Reads `.grd` exactly; PGM images come in as their raw 8-bit values.
fn read_image(path: &Path) -> Result<Image, CliError> {
    let is_pgm = path.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
    if is_pgm {
        Ok(sigedge::io::read_pgm_file(path)?.map(|p| p as f64))
    } else {
        Ok(sigedge::io::read_grid_file(path)?)
    }
}

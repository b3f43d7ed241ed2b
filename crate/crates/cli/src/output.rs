//! Bundle writing: atomic file creation, manifests, PGM/grid/CSV emission.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sigedge::grid::Grid;
use sigedge::io::{mask_to_u8, scale_to_u8, write_grid, write_pgm, PgmFormat, ScaleInfo};
use sigedge::{Mask, Real};

use crate::config::ConfigEcho;
use crate::metrics::DetectionMetrics;
use crate::CliError;

/// Writes `bytes` to `path` atomically: a temporary sibling file is renamed
/// into place, so concurrent readers never observe a partial file.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let mut tmp_name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    tmp_name.push(".tmp");
    let tmp: PathBuf = path.with_file_name(tmp_name);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

/// Accumulates one experiment's files and scale metadata, then writes the
/// manifest last so a complete manifest implies a complete bundle.
pub struct Bundle {
    dir: PathBuf,
    scales: BTreeMap<String, ScaleEntry>,
}

#[derive(Serialize, Clone, Copy)]
pub struct ScaleEntry {
    pub min: f64,
    pub max: f64,
}

impl From<ScaleInfo> for ScaleEntry {
    fn from(s: ScaleInfo) -> Self {
        ScaleEntry { min: s.min, max: s.max }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    run: RunInfo<'a>,
    config: &'a ConfigEcho,
    phantom: &'a sigedge::PhantomSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    metrics: Option<&'a DetectionMetrics>,
    /// Min/max used to scale each real-valued image into its 8-bit PGM.
    pgm_scales: &'a BTreeMap<String, ScaleEntry>,
}

#[derive(Serialize)]
struct RunInfo<'a> {
    name: &'a str,
    seed: u64,
    core_version: &'a str,
    cli_version: &'a str,
}

impl Bundle {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(Bundle { dir: dir.to_path_buf(), scales: BTreeMap::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Lossless grid plus its scaled 8-bit visualization.
    pub fn write_field<T: Real>(&mut self, stem: &str, grid: &Grid<T>) -> Result<(), CliError> {
        let mut bytes = Vec::new();
        write_grid(grid, &mut bytes)?;
        atomic_write(&self.dir.join(format!("{stem}.grd")), &bytes)?;

        let (img, scale) = scale_to_u8(grid);
        let mut pgm = Vec::new();
        write_pgm(&img, PgmFormat::Binary, &mut pgm)?;
        atomic_write(&self.dir.join(format!("{stem}.pgm")), &pgm)?;
        self.scales.insert(format!("{stem}.pgm"), scale.into());
        Ok(())
    }

    /// Binary mask as a PGM (edge = 255).
    pub fn write_mask(&mut self, stem: &str, mask: &Mask) -> Result<(), CliError> {
        let mut pgm = Vec::new();
        write_pgm(&mask_to_u8(mask), PgmFormat::Binary, &mut pgm)?;
        atomic_write(&self.dir.join(format!("{stem}.pgm")), &pgm)?;
        Ok(())
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        atomic_write(&self.dir.join(name), text.as_bytes())?;
        Ok(())
    }

    pub fn write_toml<S: Serialize>(&mut self, name: &str, value: &S) -> Result<(), CliError> {
        let text = toml::to_string_pretty(value)
            .map_err(|e| CliError::Config(format!("serializing {name}: {e}")))?;
        self.write_text(name, &text)
    }

    /// Writes `manifest.toml`; call once everything else is in place.
    pub fn finish(
        mut self,
        config: &ConfigEcho,
        phantom: &sigedge::PhantomSpec,
        metrics: Option<&DetectionMetrics>,
    ) -> Result<(), CliError> {
        let manifest = Manifest {
            run: RunInfo {
                name: &config.name,
                seed: config.seed,
                core_version: sigedge::VERSION,
                cli_version: env!("CARGO_PKG_VERSION"),
            },
            config,
            phantom,
            metrics,
            pgm_scales: &self.scales,
        };
        let text = toml::to_string_pretty(&manifest)
            .map_err(|e| CliError::Config(format!("serializing manifest: {e}")))?;
        self.write_text("manifest.toml", &text)
    }
}

//! File formats: PGM images for visualization, a flat binary grid format for
//! lossless interchange.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::real::{widen, Real};

/// Magic line of the binary grid format.
const GRID_MAGIC: &str = "grid-f64 1";

/// Writes a grid as `grid-f64 1\n<rows> <cols>\n` followed by row-major
/// little-endian `f64` values. Lossless for `f64` grids; other scalars are
/// widened.
pub fn write_grid<T: Real, W: Write>(grid: &Grid<T>, w: &mut W) -> Result<()> {
    writeln!(w, "{GRID_MAGIC}")?;
    writeln!(w, "{} {}", grid.rows(), grid.cols())?;
    for &x in grid.as_slice() {
        w.write_all(&widen(x).to_le_bytes())?;
    }
    Ok(())
}

pub fn write_grid_file<T: Real>(grid: &Grid<T>, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    write_grid(grid, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn read_grid(bytes: &[u8]) -> Result<Grid<f64>> {
    let (header_end, rows, cols) = parse_grid_header(bytes)?;
    let payload = &bytes[header_end..];
    let expect = rows * cols * 8;
    if payload.len() != expect {
        return Err(Error::Format(format!(
            "grid payload holds {} bytes, expected {expect}",
            payload.len()
        )));
    }
    let data = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Grid::from_vec(rows, cols, data)
}

pub fn read_grid_file(path: &Path) -> Result<Grid<f64>> {
    read_grid(&fs::read(path)?)
}

fn parse_grid_header(bytes: &[u8]) -> Result<(usize, usize, usize)> {
    let (magic, dims_line, header_end) =
        split_two_lines(bytes).ok_or_else(|| Error::Format("grid header truncated".into()))?;
    if magic != GRID_MAGIC {
        return Err(Error::Format(format!("bad grid magic {magic:?}")));
    }
    let mut dims = dims_line.split_whitespace();
    let rows = dims
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Format("bad grid rows".into()))?;
    let cols = dims
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Format("bad grid cols".into()))?;
    if dims.next().is_some() {
        return Err(Error::Format("trailing tokens in grid dimensions".into()));
    }
    if rows == 0 || cols == 0 {
        return Err(Error::Format("grid dimensions must be positive".into()));
    }
    Ok((header_end, rows, cols))
}

/// First two `\n`-terminated ASCII lines and the offset past them.
fn split_two_lines(bytes: &[u8]) -> Option<(&str, &str, usize)> {
    let first_nl = bytes.iter().position(|&b| b == b'\n')?;
    let rest = &bytes[first_nl + 1..];
    let second_nl = rest.iter().position(|&b| b == b'\n')?;
    let line1 = std::str::from_utf8(&bytes[..first_nl]).ok()?;
    let line2 = std::str::from_utf8(&rest[..second_nl]).ok()?;
    Some((line1, line2, first_nl + 1 + second_nl + 1))
}

/// PGM flavor: binary (`P5`) or ASCII (`P2`), both with maxval 255.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PgmFormat {
    Binary,
    Ascii,
}

pub fn write_pgm<W: Write>(img: &Grid<u8>, format: PgmFormat, w: &mut W) -> Result<()> {
    match format {
        PgmFormat::Binary => {
            write!(w, "P5\n{} {}\n255\n", img.cols(), img.rows())?;
            w.write_all(img.as_slice())?;
        }
        PgmFormat::Ascii => {
            write!(w, "P2\n{} {}\n255\n", img.cols(), img.rows())?;
            for u in 0..img.rows() {
                let line: Vec<String> = img.row(u).iter().map(|p| p.to_string()).collect();
                writeln!(w, "{}", line.join(" "))?;
            }
        }
    }
    Ok(())
}

pub fn write_pgm_file(img: &Grid<u8>, format: PgmFormat, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    write_pgm(img, format, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Reads `P5` or `P2` PGM with maxval <= 255. Comments (`#`) are honored in
/// the header.
pub fn read_pgm(bytes: &[u8]) -> Result<Grid<u8>> {
    let mut pos = 0usize;
    let magic = next_token(bytes, &mut pos).ok_or_else(|| Error::Format("empty PGM".into()))?;
    let binary = match magic.as_str() {
        "P5" => true,
        "P2" => false,
        other => return Err(Error::Format(format!("unsupported PGM magic {other:?}"))),
    };
    let cols: usize = parse_header_int(bytes, &mut pos, "width")?;
    let rows: usize = parse_header_int(bytes, &mut pos, "height")?;
    let maxval: usize = parse_header_int(bytes, &mut pos, "maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::Format(format!("unsupported PGM maxval {maxval}")));
    }
    if rows == 0 || cols == 0 {
        return Err(Error::Format("PGM dimensions must be positive".into()));
    }
    let mut data = Vec::with_capacity(rows * cols);
    if binary {
        // Exactly one whitespace byte separates the header from the raster.
        if pos + 1 + rows * cols > bytes.len() {
            return Err(Error::Format("P5 raster truncated".into()));
        }
        let raster = &bytes[pos + 1..];
        data.extend_from_slice(&raster[..rows * cols]);
    } else {
        for _ in 0..rows * cols {
            let v: usize = parse_header_int(bytes, &mut pos, "sample")?;
            if v > maxval {
                return Err(Error::Format(format!("P2 sample {v} exceeds maxval {maxval}")));
            }
            data.push(v as u8);
        }
    }
    Grid::from_vec(rows, cols, data)
}

pub fn read_pgm_file(path: &Path) -> Result<Grid<u8>> {
    read_pgm(&fs::read(path)?)
}

fn next_token(bytes: &[u8], pos: &mut usize) -> Option<String> {
    // Skip whitespace and comment lines.
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if *pos > start {
        std::str::from_utf8(&bytes[start..*pos]).ok().map(|s| s.to_string())
    } else {
        None
    }
}

fn parse_header_int(bytes: &[u8], pos: &mut usize, what: &str) -> Result<usize> {
    next_token(bytes, pos)
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Format(format!("bad PGM {what}")))
}

/// Linear min-max scaling of a real grid to 8 bits; returns the scale bounds
/// actually used so they can be recorded alongside the image. A constant
/// grid maps to 0.
pub fn scale_to_u8<T: Real>(grid: &Grid<T>) -> (Grid<u8>, ScaleInfo) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &x in grid.as_slice() {
        let x = widen(x);
        lo = lo.min(x);
        hi = hi.max(x);
    }
    let span = hi - lo;
    let img = if span > 0.0 {
        grid.map(|x| (((widen(x) - lo) / span * 255.0).round().clamp(0.0, 255.0)) as u8)
    } else {
        grid.map(|_| 0u8)
    };
    (img, ScaleInfo { min: lo, max: hi })
}

/// Bounds used by [`scale_to_u8`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaleInfo {
    pub min: f64,
    pub max: f64,
}

/// Mask to 8-bit image: true -> 255, false -> 0.
pub fn mask_to_u8(mask: &Grid<bool>) -> Grid<u8> {
    mask.map(|b| if b { 255u8 } else { 0u8 })
}

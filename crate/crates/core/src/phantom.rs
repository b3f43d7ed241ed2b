//! Synthetic mirror-symmetric test objects with known edges.
//!
//! A phantom slice is a piecewise-constant density map built from an outer
//! material filling the image, one centered disc of lighter material, and one
//! embedded circle of near-outer density, centered on the symmetry axis (a
//! ball of material in the 3-D object). Geometry is pinned in a small config
//! file so experiments are reproducible; an optional linear density slope (in
//! the distance from the axis) turns the piecewise-constant slice into a
//! piecewise-affine one.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::real::{cast, Real};

/// Material densities, outermost first.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Densities {
    pub outer: f64,
    pub circle: f64,
    pub inner: f64,
}

/// Shape placement in pixels. The vertical symmetry axis is implicit: it runs
/// between the two middle columns, and both shapes are centered on it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    /// Row coordinate of the inner disc center.
    pub center_row: f64,
    /// Radius of the centered inner disc.
    pub inner_radius: f64,
    /// Row coordinate of the embedded circle center.
    pub circle_row: f64,
    /// Radius of the embedded circle.
    pub circle_radius: f64,
}

/// Full description of a phantom slice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhantomSpec {
    pub rows: usize,
    pub cols: usize,
    pub densities: Densities,
    pub geometry: Geometry,
    /// Density added per pixel of distance from the axis, in every material.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope_rate: Option<f64>,
}

/// Material labels, used for ground-truth edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Region {
    Outer,
    Circle,
    Inner,
}

impl Default for PhantomSpec {
    /// The pinned 512x512 object used by the canned experiments.
    fn default() -> Self {
        PhantomSpec {
            rows: 512,
            cols: 512,
            densities: Densities { outer: 1.0, circle: 0.8, inner: 0.3 },
            geometry: Geometry {
                center_row: 255.5,
                inner_radius: 90.0,
                circle_row: 406.5,
                circle_radius: 30.0,
            },
            slope_rate: None,
        }
    }
}

impl PhantomSpec {
    pub fn validate(&self) -> Result<()> {
        if self.rows < 8 || self.cols < 8 {
            return Err(Error::invalid("phantom must be at least 8x8"));
        }
        if self.cols % 2 != 0 {
            return Err(Error::invalid(
                "phantom width must be even so the symmetry axis falls between two columns",
            ));
        }
        let d = &self.densities;
        if !(d.outer >= 0.0 && d.circle >= 0.0 && d.inner >= 0.0) {
            return Err(Error::invalid("densities must be nonnegative"));
        }
        let g = &self.geometry;
        if !(g.inner_radius > 0.0 && g.circle_radius > 0.0) {
            return Err(Error::invalid("shape radii must be positive"));
        }
        // The embedded circle must not touch the inner disc; overlap would
        // make the material map ambiguous.
        if (g.circle_row - g.center_row).abs() <= g.inner_radius + g.circle_radius {
            return Err(Error::invalid("embedded circle overlaps the inner disc"));
        }
        let row_span = |center: f64, radius: f64| {
            center - radius > 0.0 && center + radius < self.rows as f64 - 1.0
        };
        if !row_span(g.center_row, g.inner_radius) || g.inner_radius >= self.cols as f64 / 2.0 {
            return Err(Error::invalid("inner disc does not fit inside the image"));
        }
        if !row_span(g.circle_row, g.circle_radius) || g.circle_radius >= self.cols as f64 / 2.0 {
            return Err(Error::invalid("embedded circle does not fit inside the image"));
        }
        Ok(())
    }

    /// Column coordinate of the symmetry axis.
    pub fn axis(&self) -> f64 {
        (self.cols as f64 - 1.0) / 2.0
    }

    fn region_of(&self, u: usize, v: usize) -> Region {
        let g = &self.geometry;
        let dv = v as f64 - self.axis();
        let du = u as f64 - g.center_row;
        if du * du + dv * dv <= g.inner_radius * g.inner_radius {
            return Region::Inner;
        }
        let dc = u as f64 - g.circle_row;
        if dc * dc + dv * dv <= g.circle_radius * g.circle_radius {
            return Region::Circle;
        }
        Region::Outer
    }

    fn base_density(&self, region: Region) -> f64 {
        match region {
            Region::Outer => self.densities.outer,
            Region::Circle => self.densities.circle,
            Region::Inner => self.densities.inner,
        }
    }
}

/// Rasterizes the density map.
pub fn render<T: Real>(spec: &PhantomSpec) -> Result<Grid<T>> {
    spec.validate()?;
    let axis = spec.axis();
    let slope = spec.slope_rate.unwrap_or(0.0);
    let mut img = Grid::filled(spec.rows, spec.cols, T::zero());
    for u in 0..spec.rows {
        for v in 0..spec.cols {
            let mut density = spec.base_density(spec.region_of(u, v));
            if slope != 0.0 {
                density += slope * (v as f64 - axis).abs();
            }
            img.set(u, v, cast::<T>(density));
        }
    }
    Ok(img)
}

/// One-pixel-thin rasterization of the material interfaces.
///
/// A pixel is marked when some 4-neighbor belongs to a different material
/// *and* the pixel's own base density is the smaller of the two — so exactly
/// one side of each interface is marked, by a rule that is invariant under
/// horizontal flips. Interfaces are defined by material labels, not rendered
/// values, so a density slope does not create spurious edges.
pub fn ground_truth_edges(spec: &PhantomSpec) -> Result<Grid<bool>> {
    spec.validate()?;
    let mut regions = Vec::with_capacity(spec.rows * spec.cols);
    for u in 0..spec.rows {
        for v in 0..spec.cols {
            regions.push(spec.region_of(u, v));
        }
    }
    let at = |u: usize, v: usize| regions[u * spec.cols + v];
    let mut edges = Grid::filled(spec.rows, spec.cols, false);
    for u in 0..spec.rows {
        for v in 0..spec.cols {
            let here = at(u, v);
            let mut boundary = false;
            let mut neighbors = [None; 4];
            if u > 0 {
                neighbors[0] = Some(at(u - 1, v));
            }
            if u + 1 < spec.rows {
                neighbors[1] = Some(at(u + 1, v));
            }
            if v > 0 {
                neighbors[2] = Some(at(u, v - 1));
            }
            if v + 1 < spec.cols {
                neighbors[3] = Some(at(u, v + 1));
            }
            for other in neighbors.into_iter().flatten() {
                if other != here && spec.base_density(here) < spec.base_density(other) {
                    boundary = true;
                    break;
                }
            }
            edges.set(u, v, boundary);
        }
    }
    Ok(edges)
}

/// Reads a spec from its TOML form.
pub fn load_spec(path: &Path) -> Result<PhantomSpec> {
    let text = fs::read_to_string(path)?;
    let spec: PhantomSpec =
        toml::from_str(&text).map_err(|e| Error::Format(format!("phantom config: {e}")))?;
    spec.validate()?;
    Ok(spec)
}

/// Serializes a spec to TOML.
pub fn spec_to_toml(spec: &PhantomSpec) -> String {
    toml::to_string_pretty(spec).expect("phantom spec serializes infallibly")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_spec_is_valid_and_mirror_symmetric() {
        let spec = PhantomSpec::default();
        spec.validate().unwrap();
        let img: Grid<f64> = render(&spec).unwrap();
        assert_eq!(img, img.flip_horizontal());
        let edges = ground_truth_edges(&spec).unwrap();
        assert_eq!(edges, edges.flip_horizontal());
    }

    #[test]
    fn densities_take_exactly_three_values() {
        let spec = PhantomSpec::default();
        let img: Grid<f64> = render(&spec).unwrap();
        let mut seen: Vec<f64> = Vec::new();
        for &x in img.as_slice() {
            if !seen.contains(&x) {
                seen.push(x);
            }
        }
        seen.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(seen, vec![0.3, 0.8, 1.0]);
    }

    #[test]
    fn slope_tilts_every_material() {
        let mut spec = PhantomSpec::default();
        spec.slope_rate = Some(0.002);
        let img: Grid<f64> = render(&spec).unwrap();
        // Two outer-material pixels on the same row, right half.
        let (u, v1, v2) = (10usize, 400usize, 440usize);
        let expect = 0.002 * (v2 as f64 - v1 as f64);
        assert!((img.at(u, v2) - img.at(u, v1) - expect).abs() < 1e-12);
        // Still mirror symmetric.
        assert_eq!(img, img.flip_horizontal());
    }

    #[test]
    fn truth_edges_are_thin_and_on_the_light_side() {
        let spec = PhantomSpec::default();
        let img: Grid<f64> = render(&spec).unwrap();
        let edges = ground_truth_edges(&spec).unwrap();
        let mut count = 0usize;
        for (u, v, hit) in edges.enumerate() {
            if !hit {
                continue;
            }
            count += 1;
            // Marked pixels are strictly lighter than some 4-neighbor.
            let mut lighter_than_neighbor = false;
            let mut same_material_on_other_side = true;
            for (du, dv) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
                let (nu, nv) = ((u as i64 + du), (v as i64 + dv));
                if nu < 0 || nv < 0 || nu >= spec.rows as i64 || nv >= spec.cols as i64 {
                    continue;
                }
                let other = img.at(nu as usize, nv as usize);
                if other > img.at(u, v) {
                    lighter_than_neighbor = true;
                    // The heavier side must not also be marked: thinness.
                    same_material_on_other_side &= !edges.at(nu as usize, nv as usize)
                        || img.at(nu as usize, nv as usize) == img.at(u, v);
                }
            }
            assert!(lighter_than_neighbor, "({u},{v}) marked but not a light-side pixel");
            assert!(same_material_on_other_side, "both sides marked at ({u},{v})");
        }
        // Roughly the two perimeters: 2*pi*(90 + 30), loosely bounded.
        assert!(count > 600 && count < 1100, "unexpected truth-pixel count {count}");
    }

    #[test]
    fn overlapping_shapes_rejected() {
        let mut spec = PhantomSpec::default();
        spec.geometry.circle_row = 330.0;
        assert!(spec.validate().is_err());

        let mut spec = PhantomSpec::default();
        spec.geometry.circle_row = 500.0;
        assert!(spec.validate().is_err());

        let mut spec = PhantomSpec::default();
        spec.cols = 511;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn toml_round_trip() {
        let spec = PhantomSpec::default();
        let text = spec_to_toml(&spec);
        let back: PhantomSpec = toml::from_str(&text).unwrap();
        assert_eq!(spec, back);

        let mut sloped = spec.clone();
        sloped.slope_rate = Some(0.002);
        let back: PhantomSpec = toml::from_str(&spec_to_toml(&sloped)).unwrap();
        assert_eq!(sloped, back);
    }
}

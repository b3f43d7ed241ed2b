//! Zero-crossing extraction and statistical significance filtering.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::real::{widen, Real};
use crate::tomo::ThresholdProfile;

/// Marks candidate edge pixels: sign changes of the Laplacian estimate
/// between 4-neighbors.
///
/// For every horizontal or vertical neighbor pair with strictly opposite
/// signs, the endpoint with the smaller `|lap|` is marked (the crossing lies
/// closer to it); ties go to the left/upper pixel. Pixels where `lap` is
/// exactly zero are marked directly. Only pairs fully inside the field's
/// margin are considered.
pub fn zero_crossings<T: Real>(lap: &Grid<T>, margin: usize) -> Grid<bool> {
    let mut out = Grid::filled(lap.rows(), lap.cols(), false);
    if lap.rows() < 2 * margin + 1 || lap.cols() < 2 * margin + 1 {
        return out;
    }
    let (lo_u, hi_u) = (margin, lap.rows() - margin);
    let (lo_v, hi_v) = (margin, lap.cols() - margin);
    let zero = T::zero();
    for u in lo_u..hi_u {
        for v in lo_v..hi_v {
            let a = lap.at(u, v);
            if a == zero {
                out.set(u, v, true);
                continue;
            }
            // Right and down neighbors; each pair is examined once.
            if v + 1 < hi_v {
                let b = lap.at(u, v + 1);
                if opposite_signs(a, b) {
                    if a.abs() <= b.abs() {
                        out.set(u, v, true);
                    } else {
                        out.set(u, v + 1, true);
                    }
                }
            }
            if u + 1 < hi_u {
                let b = lap.at(u + 1, v);
                if opposite_signs(a, b) {
                    if a.abs() <= b.abs() {
                        out.set(u, v, true);
                    } else {
                        out.set(u + 1, v, true);
                    }
                }
            }
        }
    }
    out
}

#[inline]
fn opposite_signs<T: Real>(a: T, b: T) -> bool {
    let zero = T::zero();
    (a > zero && b < zero) || (a < zero && b > zero)
}

/// Where the significance threshold comes from.
#[derive(Clone, Copy, Debug)]
pub enum ThresholdRule<'a> {
    /// One threshold for every pixel (stationary noise).
    Scalar(f64),
    /// Per-column thresholds (reconstruction-correlated noise). Pixels at
    /// columns outside the profile's range are never significant.
    Profile(&'a ThresholdProfile),
}

/// Crossing candidates together with their contrasts and the significant
/// subset.
#[derive(Clone, Debug)]
pub struct EdgeMap<T> {
    pub crossings: Grid<bool>,
    /// Contrast where a crossing is marked, zero elsewhere.
    pub contrast_at_crossing: Grid<T>,
    /// Crossings whose contrast reaches the threshold.
    pub significant: Grid<bool>,
    pub margin: usize,
}

impl<T: Copy> EdgeMap<T> {
    pub fn crossing_count(&self) -> usize {
        self.crossings.count_true()
    }

    pub fn significant_count(&self) -> usize {
        self.significant.count_true()
    }
}

/// Filters crossing candidates by contrast against the threshold rule.
pub fn significant_edges<T: Real>(
    crossings: &Grid<bool>,
    contrast: &Grid<T>,
    margin: usize,
    rule: ThresholdRule<'_>,
) -> Result<EdgeMap<T>> {
    if !crossings.same_shape(contrast) {
        return Err(Error::invalid(format!(
            "crossing mask {}x{} and contrast field {}x{} must have equal shapes",
            crossings.rows(),
            crossings.cols(),
            contrast.rows(),
            contrast.cols()
        )));
    }
    if let ThresholdRule::Scalar(s) = rule {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::invalid(format!("scalar threshold must be finite and >= 0, got {s}")));
        }
    }
    let mut contrast_at = Grid::filled(contrast.rows(), contrast.cols(), T::zero());
    let mut significant = Grid::filled(contrast.rows(), contrast.cols(), false);
    for (u, v, hit) in crossings.enumerate() {
        if !hit {
            continue;
        }
        let c = contrast.at(u, v);
        contrast_at.set(u, v, c);
        let threshold = match rule {
            ThresholdRule::Scalar(s) => Some(s),
            ThresholdRule::Profile(p) => p.threshold_at(v),
        };
        if let Some(s) = threshold {
            if widen(c) >= s {
                significant.set(u, v, true);
            }
        }
    }
    Ok(EdgeMap { crossings: crossings.clone(), contrast_at_crossing: contrast_at, significant, margin })
}

//! Detection quality against ground truth.

use serde::Serialize;
use sigedge::{EdgeMap, Mask};

/// Distance cap used when averaging localization error: detections with no
/// truth pixel within this radius contribute the cap itself.
pub const DISTANCE_CAP: f64 = 10.0;

/// Radius (in pixels, Euclidean) within which a truth pixel counts as
/// covered by a detection.
pub const COVER_RADIUS: f64 = 2.0;

/// Detections farther than this from any truth pixel count as false
/// positives.
pub const FALSE_POSITIVE_RADIUS: f64 = 5.0;

/// Summary of one detection run, evaluated away from the image border.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DetectionMetrics {
    /// Border band (pixels) excluded from the evaluation on all four sides.
    pub border: usize,
    /// Ground-truth edge pixels inside the evaluated region.
    pub truth_pixels: usize,
    /// Truth pixels with a significant detection within [`COVER_RADIUS`].
    pub covered: usize,
    /// `covered / truth_pixels` (1 when there is no truth).
    pub coverage: f64,
    /// Truth pixels left without a nearby detection.
    pub uncovered: usize,
    /// Zero-crossing candidates inside the region.
    pub crossings: usize,
    /// Significant detections inside the region.
    pub significant: usize,
    /// Significant detections farther than [`FALSE_POSITIVE_RADIUS`] from
    /// every truth pixel.
    pub false_positives: usize,
    /// Mean distance from significant detections to the nearest truth pixel,
    /// capped at [`DISTANCE_CAP`]. Zero when there are no detections.
    pub mean_distance: f64,
}

/// Any true pixel of `mask` within Euclidean `radius` of `(u, v)`?
/// Distances are measured against the full mask, not just the evaluated
/// region, so the region border does not manufacture misses.
fn within_radius(mask: &Mask, u: usize, v: usize, radius: f64) -> bool {
    let r = radius.floor() as i64;
    let r2 = radius * radius;
    for di in -r..=r {
        let nu = u as i64 + di;
        if nu < 0 || nu >= mask.rows() as i64 {
            continue;
        }
        for dj in -r..=r {
            let nv = v as i64 + dj;
            if nv < 0 || nv >= mask.cols() as i64 {
                continue;
            }
            if (di * di + dj * dj) as f64 <= r2 && mask.at(nu as usize, nv as usize) {
                return true;
            }
        }
    }
    false
}

/// Euclidean distance from `(u, v)` to the nearest true pixel of `mask`,
/// capped at `cap`. Scans Chebyshev rings outward, continuing past the first
/// hit until no closer hit is possible.
fn nearest_distance(mask: &Mask, u: usize, v: usize, cap: f64) -> f64 {
    let mut best = cap;
    let max_ring = cap.ceil() as i64;
    'rings: for ring in 0..=max_ring {
        if ring as f64 > best {
            break 'rings;
        }
        let visit = |du: i64, dv: i64, best: &mut f64| {
            let (nu, nv) = (u as i64 + du, v as i64 + dv);
            if nu < 0 || nv < 0 || nu >= mask.rows() as i64 || nv >= mask.cols() as i64 {
                return;
            }
            if mask.at(nu as usize, nv as usize) {
                let d = ((du * du + dv * dv) as f64).sqrt();
                if d < *best {
                    *best = d;
                }
            }
        };
        if ring == 0 {
            visit(0, 0, &mut best);
            continue;
        }
        for t in -ring..=ring {
            visit(-ring, t, &mut best);
            visit(ring, t, &mut best);
        }
        for t in -ring + 1..ring {
            visit(t, -ring, &mut best);
            visit(t, ring, &mut best);
        }
    }
    best
}

/// Evaluates an edge map against ground truth, ignoring a `border`-wide band
/// on every side.
pub fn detection_metrics(truth: &Mask, map: &EdgeMap<f64>, border: usize) -> DetectionMetrics {
    let rows = truth.rows();
    let cols = truth.cols();
    assert!(
        truth.same_shape(&map.significant),
        "truth mask and edge map must share dimensions"
    );
    let inside =
        |u: usize, v: usize| u >= border && u < rows - border && v >= border && v < cols - border;

    let mut truth_pixels = 0usize;
    let mut covered = 0usize;
    for (u, v, hit) in truth.enumerate() {
        if !hit || !inside(u, v) {
            continue;
        }
        truth_pixels += 1;
        if within_radius(&map.significant, u, v, COVER_RADIUS) {
            covered += 1;
        }
    }

    let mut crossings = 0usize;
    let mut significant = 0usize;
    let mut false_positives = 0usize;
    let mut distance_sum = 0.0f64;
    for (u, v, hit) in map.crossings.enumerate() {
        if !inside(u, v) {
            continue;
        }
        if hit {
            crossings += 1;
        }
        if map.significant.at(u, v) {
            significant += 1;
            let d = nearest_distance(truth, u, v, DISTANCE_CAP);
            distance_sum += d;
            if d > FALSE_POSITIVE_RADIUS {
                false_positives += 1;
            }
        }
    }

    DetectionMetrics {
        border,
        truth_pixels,
        covered,
        coverage: if truth_pixels > 0 { covered as f64 / truth_pixels as f64 } else { 1.0 },
        uncovered: truth_pixels - covered,
        crossings,
        significant,
        false_positives,
        mean_distance: if significant > 0 { distance_sum / significant as f64 } else { 0.0 },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use sigedge::Grid;

    fn edge_map_from(significant: Mask) -> EdgeMap<f64> {
        EdgeMap {
            crossings: significant.clone(),
            contrast_at_crossing: significant.map(|b| if b { 1.0 } else { 0.0 }),
            significant,
            margin: 0,
        }
    }

    #[test]
    fn perfect_detection() {
        let mut truth = Grid::filled(32, 32, false);
        for v in 8..24 {
            truth.set(16, v, true);
        }
        let map = edge_map_from(truth.clone());
        let m = detection_metrics(&truth, &map, 4);
        assert_eq!(m.truth_pixels, 16);
        assert_eq!(m.covered, 16);
        assert_eq!(m.coverage, 1.0);
        assert_eq!(m.false_positives, 0);
        assert_eq!(m.mean_distance, 0.0);
    }

    #[test]
    fn offset_detection_counts_as_covered_until_two_pixels() {
        let mut truth = Grid::filled(32, 32, false);
        let mut detected = Grid::filled(32, 32, false);
        for v in 8..24 {
            truth.set(14, v, true);
            detected.set(16, v, true); // two rows away: still covering
        }
        let m = detection_metrics(&truth, &edge_map_from(detected.clone()), 4);
        assert_eq!(m.covered, m.truth_pixels);
        assert!((m.mean_distance - 2.0).abs() < 1e-12);

        let mut detected_far = Grid::filled(32, 32, false);
        for v in 8..24 {
            detected_far.set(17, v, true); // three rows away: uncovered
        }
        let m = detection_metrics(&truth, &edge_map_from(detected_far), 4);
        assert_eq!(m.covered, 0);
        assert_eq!(m.false_positives, 0, "3 px off is a miss but not a false positive");
    }

    #[test]
    fn detections_in_the_void_are_false_positives() {
        let mut truth = Grid::filled(32, 32, false);
        truth.set(8, 8, true);
        let mut detected = Grid::filled(32, 32, false);
        detected.set(24, 24, true);
        let m = detection_metrics(&truth, &edge_map_from(detected), 4);
        assert_eq!(m.false_positives, 1);
        assert_eq!(m.mean_distance, DISTANCE_CAP);
    }

    #[test]
    fn border_band_is_ignored() {
        let mut truth = Grid::filled(32, 32, false);
        truth.set(2, 16, true); // inside the border band
        let mut detected = Grid::filled(32, 32, false);
        detected.set(2, 16, true);
        let m = detection_metrics(&truth, &edge_map_from(detected), 4);
        assert_eq!(m.truth_pixels, 0);
        assert_eq!(m.significant, 0);
        assert_eq!(m.coverage, 1.0);
    }

    #[test]
    fn nearest_distance_is_euclidean() {
        let mut mask = Grid::filled(16, 16, false);
        mask.set(8, 8, true);
        assert_eq!(nearest_distance(&mask, 8, 8, 10.0), 0.0);
        assert_eq!(nearest_distance(&mask, 8, 11, 10.0), 3.0);
        assert!((nearest_distance(&mask, 11, 12, 10.0) - 5.0).abs() < 1e-12);
        assert_eq!(nearest_distance(&mask, 0, 0, 10.0), 10.0); // sqrt(128) > cap
    }
}

//! Property tests for the statistical invariants the estimators rely on.

use proptest::prelude::*;

use sigedge::ball::{moments, raw_moments, DiscBall};
use sigedge::deriv::{ContrastKernel, KernelKind};
use sigedge::edges::{significant_edges, zero_crossings, ThresholdRule};
use sigedge::grid::Grid;
use sigedge::io::{read_grid, write_grid};
use sigedge::phantom::{ground_truth_edges, render, Densities, Geometry, PhantomSpec};
use sigedge::tomo::{tail_probability, TailMode};
use sigedge::white::white_threshold;

proptest! {
    /// Odd-order power sums over a disc vanish by symmetry.
    #[test]
    fn odd_power_sums_vanish(radius in 1u32..30, k in 0u32..4, l in 0u32..4) {
        prop_assume!(k % 2 == 1 || l % 2 == 1);
        let ball = DiscBall::new(radius).unwrap();
        prop_assert_eq!(ball.power_sum(k, l), 0);
    }

    /// Larger discs contain more points and carry strictly more weight.
    #[test]
    fn raw_moments_grow_with_radius(radius in 1u32..25) {
        let small = raw_moments(&DiscBall::new(radius).unwrap());
        let big = raw_moments(&DiscBall::new(radius + 1).unwrap());
        prop_assert!(big.m00 > small.m00);
        prop_assert!(big.m20 > small.m20);
        prop_assert!(big.m40 > small.m40);
    }

    /// A two-radius kernel is exactly the difference of the two averaging
    /// kernels, point by point.
    #[test]
    fn diff_kernel_is_pointwise_difference(r1 in 1u32..6, extra in 1u32..5) {
        let r2 = r1 + extra;
        let diff = ContrastKernel::<f64>::new(KernelKind::Diff { r1, r2 }).unwrap();
        let inner = DiscBall::new(r1).unwrap();
        let outer = DiscBall::new(r2).unwrap();
        let m_inner = moments::<f64>(&inner).m20;
        let m_outer = moments::<f64>(&outer).m20;
        let r = r2 as i32;
        for i in -r..=r {
            for j in -r..=r {
                let mut expect = 0.0;
                if inner.contains(i, j) {
                    expect += 1.0 / m_inner;
                }
                if outer.contains(i, j) {
                    expect -= 1.0 / m_outer;
                }
                prop_assert!((diff.coeff(i, j) - expect).abs() < 1e-15);
            }
        }
    }

    /// Grid binary serialization is lossless.
    #[test]
    fn grid_io_round_trips(
        rows in 1usize..12,
        cols in 1usize..12,
        seed in prop::collection::vec(-1e12f64..1e12, 144),
    ) {
        let data: Vec<f64> = seed.iter().take(rows * cols).copied().collect();
        let grid = Grid::from_vec(rows, cols, data).unwrap();
        let mut bytes = Vec::new();
        write_grid(&grid, &mut bytes).unwrap();
        let back = read_grid(&bytes).unwrap();
        prop_assert_eq!(grid, back);
    }

    /// Lower false-alarm rates demand strictly higher thresholds.
    #[test]
    fn white_threshold_monotone_in_epsilon(
        e1 in 1e-8f64..0.4,
        factor in 1.1f64..100.0,
        r in 1u32..15,
    ) {
        let e2 = (e1 * factor).min(0.9);
        let s1 = white_threshold(e1, 1.0, r).unwrap();
        let s2 = white_threshold(e2, 1.0, r).unwrap();
        prop_assert!(s1 > s2);
    }

    /// Tail probabilities are probabilities, decrease in s, and the two modes
    /// agree exactly in the equal-variance case.
    #[test]
    fn tail_probability_is_a_decreasing_probability(
        v1 in 0.01f64..10.0,
        v2 in 0.01f64..10.0,
        s in 0.0f64..10.0,
    ) {
        for mode in [TailMode::Exact, TailMode::Approx] {
            let p = tail_probability(s, v1, v2, mode).unwrap();
            prop_assert!((0.0..=1.0).contains(&p));
            let p_further = tail_probability(s + 0.5, v1, v2, mode).unwrap();
            prop_assert!(p_further <= p + 1e-12);
        }
        let exact = tail_probability(s, v1, v1, TailMode::Exact).unwrap();
        let approx = tail_probability(s, v1, v1, TailMode::Approx).unwrap();
        prop_assert!((exact - approx).abs() < 1e-12);
    }

    /// Any valid phantom renders mirror-symmetrically, and its ground truth
    /// marks the interfaces of the rendered image.
    #[test]
    fn phantom_is_mirror_symmetric(
        inner_radius in 8.0f64..20.0,
        circle_radius in 4.0f64..10.0,
        gap in 2.0f64..10.0,
        outer in 0.5f64..1.5,
        inner in 0.1f64..0.4,
    ) {
        let center_row = 40.0;
        let spec = PhantomSpec {
            rows: 128,
            cols: 128,
            densities: Densities { outer, circle: 0.8, inner },
            geometry: Geometry {
                center_row,
                inner_radius,
                circle_row: center_row + inner_radius + circle_radius + gap,
                circle_radius,
            },
            slope_rate: None,
        };
        spec.validate().unwrap();
        let img: Grid<f64> = render(&spec).unwrap();
        prop_assert_eq!(&img, &img.flip_horizontal());
        let truth = ground_truth_edges(&spec).unwrap();
        prop_assert_eq!(&truth, &truth.flip_horizontal());
        // Every truth pixel borders a different rendered density.
        for (u, v, hit) in truth.enumerate() {
            if hit {
                let mut differs = false;
                if u > 0 { differs |= img.at(u - 1, v) != img.at(u, v); }
                if u + 1 < 128 { differs |= img.at(u + 1, v) != img.at(u, v); }
                if v > 0 { differs |= img.at(u, v - 1) != img.at(u, v); }
                if v + 1 < 128 { differs |= img.at(u, v + 1) != img.at(u, v); }
                prop_assert!(differs);
            }
        }
    }

    /// Zero-crossings stay inside the margin and significant pixels are a
    /// subset of them.
    #[test]
    fn edge_masks_nest_and_respect_margin(
        vals in prop::collection::vec(-1.0f64..1.0, 400),
        margin in 0usize..6,
        threshold in 0.0f64..0.8,
    ) {
        let lap = Grid::from_vec(20, 20, vals.clone()).unwrap();
        let contrast = Grid::from_vec(20, 20, vals.iter().map(|x| x.abs()).collect()).unwrap();
        let crossings = zero_crossings(&lap, margin);
        let map = significant_edges(
            &crossings,
            &contrast,
            margin,
            ThresholdRule::Scalar(threshold),
        ).unwrap();
        for (u, v, hit) in map.significant.enumerate() {
            if hit {
                prop_assert!(crossings.at(u, v));
                prop_assert!(contrast.at(u, v) >= threshold);
            }
        }
        for (u, v, hit) in crossings.enumerate() {
            if hit {
                prop_assert!(u >= margin && u < 20 - margin);
                prop_assert!(v >= margin && v < 20 - margin);
            }
        }
    }
}

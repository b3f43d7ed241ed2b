//! Discrete line-of-sight projection of radially symmetric objects and its
//! exact triangular inverse.
//!
//! Geometry, per image row: the object is a stack of cylindrical shells around
//! a vertical axis that runs *between* the two middle columns, so every pixel
//! center sits at a half-integer distance from the axis and the inverse stays
//! finite. Cell `j` of a half-row covers radii `[j, j+1)` (unit pixel pitch);
//! ray `k` passes through the pixel centers at distance `k + 1/2`. Entry
//! `H[k][j]` is the exact path length of ray `k` inside shell `j`:
//! `2 (sqrt(x_{j+1}^2 - u_k^2) - sqrt(max(x_j, u_k)^2 - u_k^2))`.
//! `H` is upper triangular with positive diagonal, so the reconstruction
//! matrix `M = H^{-1}` comes from plain back-substitution and is itself upper
//! triangular.

use std::io::Write;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::mat::Mat;
use crate::real::{cast, widen, Real};

/// Column <-> shell bookkeeping for a full-width slice of `2n` columns.
///
/// Columns `n..2n` are the right half (shell `j = v - n`), columns `0..n` the
/// left half (shell `j = n - 1 - v`). Pixel centers sit at distance `j + 1/2`
/// from the axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SliceGeometry {
    n: usize,
}

impl SliceGeometry {
    /// `full_width` must be even and at least 4.
    pub fn new(full_width: usize) -> Result<Self> {
        if full_width < 4 || full_width % 2 != 0 {
            return Err(Error::invalid(format!(
                "slice width must be even and >= 4, got {full_width}"
            )));
        }
        Ok(SliceGeometry { n: full_width / 2 })
    }

    /// Shells per half-row.
    pub fn half_width(&self) -> usize {
        self.n
    }

    pub fn full_width(&self) -> usize {
        2 * self.n
    }

    /// Shell index of column `v`.
    #[inline]
    pub fn cell_of(&self, v: usize) -> usize {
        if v >= self.n {
            v - self.n
        } else {
            self.n - 1 - v
        }
    }

    /// Whether two columns lie on the same side of the axis.
    #[inline]
    pub fn same_side(&self, a: usize, b: usize) -> bool {
        (a >= self.n) == (b >= self.n)
    }

    /// Distance of the pixel center of column `v` from the axis.
    pub fn distance(&self, v: usize) -> f64 {
        self.cell_of(v) as f64 + 0.5
    }
}

/// Projection matrix `H`, its inverse `M`, and the associated geometry.
#[derive(Clone, Debug)]
pub struct AbelOperator<T> {
    geometry: SliceGeometry,
    h: Mat<T>,
    m: Mat<T>,
}

impl<T: Real> AbelOperator<T> {
    /// Builds the operator for half-width `n >= 2`.
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!("half-width must be >= 2, got {n}")));
        }
        let geometry = SliceGeometry { n };
        let mut h = Mat::zeros(n, n);
        for k in 0..n {
            let u = k as f64 + 0.5;
            let u2 = u * u;
            for j in k..n {
                let x0 = (j as f64).max(u);
                let x1 = (j + 1) as f64;
                let val = 2.0 * ((x1 * x1 - u2).sqrt() - (x0 * x0 - u2).sqrt());
                h.set(k, j, cast::<T>(val));
            }
        }

        // Column-by-column back-substitution of H m = e_c. Entries below the
        // diagonal stay exactly zero.
        let mut m = Mat::zeros(n, n);
        for c in 0..n {
            m.set(c, c, T::one() / h.at(c, c));
            for i in (0..c).rev() {
                let mut acc = T::zero();
                for j in i + 1..=c {
                    acc += h.at(i, j) * m.at(j, c);
                }
                m.set(i, c, -acc / h.at(i, i));
            }
        }
        Ok(AbelOperator { geometry, h, m })
    }

    pub fn half_width(&self) -> usize {
        self.geometry.n
    }

    pub fn geometry(&self) -> SliceGeometry {
        self.geometry
    }

    /// Projection matrix (upper triangular, positive diagonal).
    pub fn h(&self) -> &Mat<T> {
        &self.h
    }

    /// Reconstruction matrix `M = H^{-1}` (upper triangular).
    pub fn m(&self) -> &Mat<T> {
        &self.m
    }

    /// `max |HM - I|`; a residual check on the inversion.
    pub fn identity_residual(&self) -> T {
        self.h.mul(&self.m).max_abs_diff(&Mat::identity(self.geometry.n))
    }

    /// Squared L2 norms of the rows of `M`. Scaled by the radiograph noise
    /// variance these are the per-shell variances of reconstructed noise —
    /// the noise-amplification profile of the inversion.
    pub fn row_norm_sq(&self) -> Vec<f64> {
        (0..self.geometry.n)
            .map(|j| self.m.row(j).iter().map(|&x| widen(x) * widen(x)).sum())
            .collect()
    }
}

fn check_width<T: Copy>(img: &Grid<T>, geom: SliceGeometry, what: &str) -> Result<()> {
    if img.cols() != geom.full_width() {
        return Err(Error::invalid(format!(
            "{what} width {} does not match operator width {}",
            img.cols(),
            geom.full_width()
        )));
    }
    Ok(())
}

/// Projects a slice image row by row: the right-half profile of each row is
/// taken as the shell densities and `H` applied to it; the result is mirrored
/// onto both halves of the output. Radial symmetry of the input is assumed,
/// not checked — the round trip through [`reconstruct`] is exact only for
/// mirror-symmetric rows.
pub fn radiograph<T: Real>(slice: &Grid<T>, op: &AbelOperator<T>) -> Result<Grid<T>> {
    let geom = op.geometry();
    check_width(slice, geom, "slice")?;
    let n = geom.half_width();
    let mut out = Grid::filled(slice.rows(), slice.cols(), T::zero());
    for u in 0..slice.rows() {
        let row = slice.row(u);
        let right = &row[n..];
        for k in 0..n {
            let g = op.h.row(k)[k..].iter().zip(&right[k..]).fold(T::zero(), |a, (&h, &f)| a + h * f);
            out.set(u, n + k, g);
            out.set(u, n - 1 - k, g);
        }
    }
    Ok(out)
}

/// Inverts a radiograph row by row. Each half of a row is mapped through `M`
/// independently, so the two halves of the output are reconstructed from
/// disjoint (hence independently noisy) data.
pub fn reconstruct<T: Real>(radiograph: &Grid<T>, op: &AbelOperator<T>) -> Result<Grid<T>> {
    let geom = op.geometry();
    check_width(radiograph, geom, "radiograph")?;
    let n = geom.half_width();
    let mut out = Grid::filled(radiograph.rows(), radiograph.cols(), T::zero());
    let mut half = vec![T::zero(); n];
    for u in 0..radiograph.rows() {
        let row = radiograph.row(u);
        // Right half.
        for j in 0..n {
            let f = op.m.row(j)[j..]
                .iter()
                .zip(&row[n + j..])
                .fold(T::zero(), |a, (&m, &g)| a + m * g);
            out.set(u, n + j, f);
        }
        // Left half, mirrored into shell order first.
        for (k, h) in half.iter_mut().enumerate() {
            *h = row[n - 1 - k];
        }
        for j in 0..n {
            let f = op.m.row(j)[j..]
                .iter()
                .zip(&half[j..])
                .fold(T::zero(), |a, (&m, &g)| a + m * g);
            out.set(u, n - 1 - j, f);
        }
    }
    Ok(out)
}

/// Writes a matrix as CSV, row-major, in full-precision scientific notation.
pub fn write_matrix_csv<T: Real, W: Write>(mat: &Mat<T>, w: &mut W) -> std::io::Result<()> {
    for r in 0..mat.rows() {
        let mut first = true;
        for c in 0..mat.cols() {
            if !first {
                write!(w, ",")?;
            }
            write!(w, "{:e}", widen(mat.at(r, c)))?;
            first = false;
        }
        writeln!(w)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn two_cell_operator_closed_form() {
        let op = AbelOperator::<f64>::new(2).unwrap();
        let h = op.h();
        assert_relative_eq!(h.at(0, 0), 2.0 * 0.75f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(
            h.at(0, 1),
            2.0 * (3.75f64.sqrt() - 0.75f64.sqrt()),
            max_relative = 1e-14
        );
        assert_eq!(h.at(1, 0), 0.0);
        assert_relative_eq!(h.at(1, 1), 2.0 * 1.75f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn inverse_is_triangular_and_exact() {
        for n in [2usize, 8, 64] {
            let op = AbelOperator::<f64>::new(n).unwrap();
            for j in 0..n {
                for k in 0..j {
                    assert_eq!(op.m().at(j, k), 0.0, "subdiagonal M[{j}][{k}] for n={n}");
                }
            }
            assert!(op.identity_residual() < 1e-12, "residual for n={n}");
        }
    }

    #[test]
    fn projection_of_unit_disc_telescopes() {
        // Shell densities 1 for j < R: the ray integral telescopes to the
        // exact chord length 2 sqrt(R^2 - u^2).
        let n = 32;
        let r_disc = 16usize;
        let op = AbelOperator::<f64>::new(n).unwrap();
        let mut slice = Grid::filled(1, 2 * n, 0.0f64);
        for v in 0..2 * n {
            if op.geometry().cell_of(v) < r_disc {
                slice.set(0, v, 1.0);
            }
        }
        let g = radiograph(&slice, &op).unwrap();
        for k in 0..n {
            let u = k as f64 + 0.5;
            let expect = if k < r_disc {
                2.0 * ((r_disc * r_disc) as f64 - u * u).sqrt()
            } else {
                0.0
            };
            assert_abs_diff_eq!(g.at(0, n + k), expect, epsilon = 1e-10);
            assert_abs_diff_eq!(g.at(0, n - 1 - k), expect, epsilon = 1e-10);
        }
    }

    #[test]
    fn round_trip_on_symmetric_rows() {
        let n = 24;
        let op = AbelOperator::<f64>::new(n).unwrap();
        let mut slice = Grid::filled(3, 2 * n, 0.0f64);
        for u in 0..3 {
            for v in 0..2 * n {
                let d = op.geometry().distance(v);
                slice.set(u, v, 1.0 + 0.5 * (0.1 * d + u as f64).sin());
            }
        }
        let rec = reconstruct(&radiograph(&slice, &op).unwrap(), &op).unwrap();
        for u in 0..3 {
            for v in 0..2 * n {
                assert_abs_diff_eq!(rec.at(u, v), slice.at(u, v), epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn geometry_mapping() {
        let geom = SliceGeometry::new(8).unwrap();
        assert_eq!(geom.cell_of(4), 0);
        assert_eq!(geom.cell_of(3), 0);
        assert_eq!(geom.cell_of(7), 3);
        assert_eq!(geom.cell_of(0), 3);
        assert!(geom.same_side(0, 3));
        assert!(!geom.same_side(3, 4));
        assert_eq!(geom.distance(4), 0.5);
        assert_eq!(geom.distance(0), 3.5);
        assert!(SliceGeometry::new(7).is_err());
        assert!(SliceGeometry::new(2).is_err());
    }

    #[test]
    fn width_mismatch_rejected() {
        let op = AbelOperator::<f64>::new(4).unwrap();
        let img = Grid::filled(2, 6, 0.0f64);
        assert!(radiograph(&img, &op).is_err());
        assert!(reconstruct(&img, &op).is_err());
    }
}

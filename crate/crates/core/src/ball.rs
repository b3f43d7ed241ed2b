//! Discrete discs and their lattice moments.
//!
//! All local estimators in this crate are least-squares fits over the lattice
//! disc `B_r = {(i, j) : i^2 + j^2 <= r^2}` centered on the pixel of interest.
//! Their normalizing constants are power sums over that disc, accumulated in
//! integer arithmetic and converted to the target scalar only at the end.

use crate::error::{Error, Result};
use crate::real::{cast, Real};

/// Lattice disc of radius `r`: offsets `(i, j)` with `i^2 + j^2 <= r^2`,
/// `i` indexing rows and `j` columns.
#[derive(Clone, Debug)]
pub struct DiscBall {
    radius: u32,
    points: Vec<(i32, i32)>,
}

impl DiscBall {
    /// Enumerates the disc in row-major order. `r` must be at least 1.
    pub fn new(radius: u32) -> Result<Self> {
        if radius == 0 {
            return Err(Error::invalid("disc radius must be >= 1"));
        }
        let r = radius as i64;
        let r2 = r * r;
        let mut points = Vec::new();
        for i in -r..=r {
            for j in -r..=r {
                if i * i + j * j <= r2 {
                    points.push((i as i32, j as i32));
                }
            }
        }
        Ok(DiscBall { radius, points })
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn points(&self) -> &[(i32, i32)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false // a disc always contains the origin
    }

    pub fn contains(&self, i: i32, j: i32) -> bool {
        let (i, j) = (i as i64, j as i64);
        i * i + j * j <= (self.radius as i64).pow(2)
    }

    /// Exact power sum `sum over the disc of i^k * j^l`.
    ///
    /// Accumulated in `i128`; fine for every radius and exponent this crate
    /// uses (`r <= ~1000`, `k + l <= 8`).
    pub fn power_sum(&self, k: u32, l: u32) -> i128 {
        self.points
            .iter()
            .map(|&(i, j)| (i as i128).pow(k) * (j as i128).pow(l))
            .sum()
    }
}

/// Integer moments of a disc: `m_kl = sum of i^k j^l`.
///
/// Odd-order sums vanish by symmetry and are not stored. `m20` doubles as the
/// normalizer of the gradient estimate; `alpha`/`beta` (see [`MomentSet`])
/// are derived from these.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RawMoments {
    pub m00: i64,
    pub m20: i64,
    pub m22: i64,
    pub m40: i64,
}

/// Moments of [`DiscBall`] converted to a floating scalar, plus the derived
/// constants of the degree-2 least-squares fit.
#[derive(Clone, Copy, Debug)]
pub struct MomentSet<T> {
    pub radius: u32,
    pub m00: T,
    pub m20: T,
    pub m22: T,
    pub m40: T,
    /// `-2 m20 / m00`; makes the Laplacian weights `alpha + i^2 + j^2` sum to
    /// zero over the disc, so the estimator kills constants exactly.
    pub alpha: T,
    /// `(m40 + m22 - 2 m20^2 / m00) / 2`; normalizer of the Laplacian
    /// estimate. Strictly positive for every radius >= 1.
    pub beta: T,
}

pub fn raw_moments(ball: &DiscBall) -> RawMoments {
    let (mut m00, mut m20, mut m22, mut m40) = (0i64, 0i64, 0i64, 0i64);
    for &(i, j) in ball.points() {
        let (i, j) = (i as i64, j as i64);
        m00 += 1;
        m20 += i * i;
        m22 += i * i * j * j;
        m40 += i * i * i * i;
    }
    RawMoments { m00, m20, m22, m40 }
}

pub fn moments<T: Real>(ball: &DiscBall) -> MomentSet<T> {
    let raw = raw_moments(ball);
    let m00 = cast::<T>(raw.m00 as f64);
    let m20 = cast::<T>(raw.m20 as f64);
    let m22 = cast::<T>(raw.m22 as f64);
    let m40 = cast::<T>(raw.m40 as f64);
    let two = cast::<T>(2.0);
    let alpha = -two * m20 / m00;
    let beta = (m40 + m22 - two * m20 * m20 / m00) / two;
    MomentSet { radius: ball.radius(), m00, m20, m22, m40, alpha, beta }
}

impl<T: Real> MomentSet<T> {
    /// Weight of the Laplacian estimator at offset `(i, j)`, before the
    /// `1/beta` normalization.
    #[inline]
    pub fn lap_weight(&self, i: i32, j: i32) -> T {
        self.alpha + cast::<T>((i as f64).powi(2) + (j as f64).powi(2))
    }
}

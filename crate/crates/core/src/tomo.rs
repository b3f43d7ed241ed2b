//! Contrast laws and detection thresholds under reconstruction-correlated
//! noise.
//!
//! After row-by-row inversion of a radiograph carrying i.i.d. Gaussian noise,
//! the noise in a reconstructed row is Gaussian with a column covariance
//! `Gamma = sigma^2 M M^T` within each half-row and zero across the axis
//! (the halves come from disjoint data). Everything here follows from
//! propagating that covariance through the windowed sums of
//! [`crate::deriv`]: exact variances for the contrast components and the
//! companion Laplacian, the variance of the horizontal component conditioned
//! on a vanishing Laplacian, and per-column detection thresholds.
//!
//! All statistics are computed in `f64` regardless of the image scalar.

use std::io::Write;

use crate::abel::{AbelOperator, SliceGeometry};
use crate::ball::{moments, DiscBall};
use crate::deriv::KernelKind;
use crate::error::{Error, Result};
use crate::mat::Mat;
use crate::real::{widen, Real};

/// Column covariance of reconstructed noise for one half-row, plus the
/// zero-across-the-axis lookup rule for full-width column pairs.
#[derive(Clone, Debug)]
pub struct ColumnCovariance {
    geometry: SliceGeometry,
    gamma: Mat<f64>,
}

impl ColumnCovariance {
    /// `sigma^2 M M^T` for the given operator: the exact covariance of a
    /// reconstructed half-row when the radiograph noise is i.i.d. with
    /// deviation `sigma`.
    pub fn from_operator<T: Real>(op: &AbelOperator<T>, sigma: f64) -> Result<Self> {
        if sigma <= 0.0 || !sigma.is_finite() {
            return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
        }
        let n = op.half_width();
        let mut gamma = Mat::zeros(n, n);
        for j in 0..n {
            for l in j..n {
                // Rows of M are supported on [row index, n): start at the
                // later row to skip the structural zeros.
                let start = l;
                let dot: f64 = op.m().row(j)[start..]
                    .iter()
                    .zip(&op.m().row(l)[start..])
                    .map(|(&a, &b)| widen(a) * widen(b))
                    .sum();
                gamma.set(j, l, sigma * sigma * dot);
                gamma.set(l, j, sigma * sigma * dot);
            }
        }
        Ok(ColumnCovariance { geometry: op.geometry(), gamma })
    }

    /// Covariance of white noise of deviation `sigma` presented through the
    /// same interface (identity reconstruction): `Gamma = sigma^2 I`.
    pub fn white(full_width: usize, sigma: f64) -> Result<Self> {
        if sigma <= 0.0 || !sigma.is_finite() {
            return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
        }
        let geometry = SliceGeometry::new(full_width)?;
        let n = geometry.half_width();
        let mut gamma = Mat::zeros(n, n);
        for j in 0..n {
            gamma.set(j, j, sigma * sigma);
        }
        Ok(ColumnCovariance { geometry, gamma })
    }

    pub fn geometry(&self) -> SliceGeometry {
        self.geometry
    }

    /// Covariance of the reconstructed noise between shells `a` and `b` of
    /// one half-row.
    pub fn shell(&self, a: usize, b: usize) -> f64 {
        self.gamma.at(a, b)
    }

    /// Covariance between full-width columns `a` and `b`: the shell entry on
    /// a common side, zero across the axis.
    #[inline]
    pub fn column(&self, a: usize, b: usize) -> f64 {
        if self.geometry.same_side(a, b) {
            self.gamma.at(self.geometry.cell_of(a), self.geometry.cell_of(b))
        } else {
            0.0
        }
    }
}

/// Second-order law of the contrast components and companion Laplacian at one
/// column. `cov_x_lap` is the only nonzero cross term: both `E[Cx Cy]` and
/// `E[Cy lap]` vanish identically because the window weights are even in the
/// row offset while the noise covariance does not depend on it.
#[derive(Clone, Copy, Debug)]
pub struct ContrastLaw {
    pub column: usize,
    pub var_x: f64,
    pub var_y: f64,
    pub var_lap: f64,
    pub cov_x_lap: f64,
    /// Variance of `Cx` conditioned on the Laplacian estimate vanishing:
    /// `(var_x var_lap - cov_x_lap^2) / var_lap`; zero when the Gram
    /// determinant underflows to zero.
    pub var_x_cond: f64,
}

impl ContrastLaw {
    /// Gram determinant `var_x * var_lap - cov_x_lap^2` (clamped at zero).
    pub fn gram_det(&self) -> f64 {
        (self.var_x * self.var_lap - self.cov_x_lap * self.cov_x_lap).max(0.0)
    }
}

/// Exact second-order law of the contrast of `kind` at full-width column `v`.
///
/// Sums run over offset triples `(i, j, l)` with `(i,j)` and `(i,l)` in the
/// relevant discs, weighting the noise covariance of columns `v+j` and `v+l`.
/// `v` must keep the whole window inside the slice.
pub fn contrast_law(cov: &ColumnCovariance, kind: KernelKind, v: usize) -> Result<ContrastLaw> {
    kind.validate()?;
    let r = kind.support_radius() as i32;
    let width = cov.geometry().full_width();
    let (lo, hi) = (r as usize, width - 1 - r as usize);
    if v < lo || v > hi {
        return Err(Error::ColumnOutOfRange { column: v, lo, hi });
    }

    // Dense coefficient row c_j and Laplacian weight row w_j per |i|, with
    // the local covariance block G[j][l] = Cov(col v+j, col v+l).
    let side = (2 * r + 1) as usize;
    let ball = DiscBall::new(kind.support_radius())?;
    let ms = moments::<f64>(&ball);
    let coeff = coefficient_table(kind)?;

    let mut g = vec![0.0f64; side * side];
    for j in -r..=r {
        for l in -r..=r {
            g[((j + r) as usize) * side + (l + r) as usize] =
                cov.column((v as i32 + j) as usize, (v as i32 + l) as usize);
        }
    }
    let gat = |j: i32, l: i32| g[((j + r) as usize) * side + (l + r) as usize];

    let (mut var_x, mut var_y, mut var_lap, mut cov_x_lap) = (0.0, 0.0, 0.0, 0.0);
    for i in -r..=r {
        let half = half_row_width(r, i);
        for j in -half..=half {
            let c_j = coeff[((i + r) as usize) * side + (j + r) as usize];
            for l in -half..=half {
                let c_l = coeff[((i + r) as usize) * side + (l + r) as usize];
                let gjl = gat(j, l);
                var_x += (j as f64) * c_j * (l as f64) * c_l * gjl;
                var_y += (i as f64) * c_j * (i as f64) * c_l * gjl;
                let w_l = ms.lap_weight(i, l) / ms.beta;
                cov_x_lap += (j as f64) * c_j * w_l * gjl;
                let w_j = ms.lap_weight(i, j) / ms.beta;
                var_lap += w_j * w_l * gjl;
            }
        }
    }

    let det = (var_x * var_lap - cov_x_lap * cov_x_lap).max(0.0);
    let var_x_cond = if var_lap > 0.0 { det / var_lap } else { 0.0 };
    Ok(ContrastLaw { column: v, var_x, var_y, var_lap, cov_x_lap, var_x_cond })
}

/// Dense contrast coefficients on the bounding square, in f64.
fn coefficient_table(kind: KernelKind) -> Result<Vec<f64>> {
    let r = kind.support_radius();
    let side = (2 * r + 1) as usize;
    let mut c = vec![0.0f64; side * side];
    let outer = DiscBall::new(r)?;
    let idx = |i: i32, j: i32| ((i + r as i32) as usize) * side + (j + r as i32) as usize;
    match kind {
        KernelKind::Single { .. } => {
            let w = 1.0 / moments::<f64>(&outer).m20;
            for &(i, j) in outer.points() {
                c[idx(i, j)] = w;
            }
        }
        KernelKind::Diff { r1, .. } => {
            let inner = DiscBall::new(r1)?;
            let w1 = 1.0 / moments::<f64>(&inner).m20;
            let w2 = 1.0 / moments::<f64>(&outer).m20;
            for &(i, j) in outer.points() {
                c[idx(i, j)] = -w2;
            }
            for &(i, j) in inner.points() {
                c[idx(i, j)] = w1 - w2;
            }
        }
    }
    Ok(c)
}

/// Largest |column offset| inside the radius-`r` disc at row offset `i`.
#[inline]
fn half_row_width(r: i32, i: i32) -> i32 {
    (((r * r - i * i) as f64).sqrt().floor()) as i32
}

/// Variance of `Cx` given that the companion Laplacian vanishes.
/// Errors when `var_lap` is zero (conditioning on a constant).
pub fn conditional_variance(law: &ContrastLaw) -> Result<f64> {
    if law.var_lap <= 0.0 {
        return Err(Error::DegenerateLaw(format!(
            "Laplacian variance vanishes at column {}; conditional law undefined",
            law.column
        )));
    }
    Ok(law.gram_det() / law.var_lap)
}

/// How the tail of `sqrt(X^2 + Y^2)` for independent centered Gaussians is
/// evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailMode {
    /// Single-exponential approximation `exp(-s^2 / (var1 + var2))`; exact
    /// when the variances are equal, optimistic otherwise.
    Approx,
    /// Exact law by adaptive quadrature (absolute accuracy 1e-10).
    Exact,
}

impl TailMode {
    pub fn name(&self) -> &'static str {
        match self {
            TailMode::Approx => "approx",
            TailMode::Exact => "exact",
        }
    }
}

/// Upper-tail probability of the standard normal.
#[inline]
fn normal_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// `P(X^2 + Y^2 >= s^2)` for independent centered Gaussians with the given
/// variances (not both zero), evaluated per `mode`.
pub fn tail_probability(s: f64, var1: f64, var2: f64, mode: TailMode) -> Result<f64> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::invalid(format!("tail abscissa must be finite and >= 0, got {s}")));
    }
    if var1 < 0.0 || var2 < 0.0 || !var1.is_finite() || !var2.is_finite() {
        return Err(Error::invalid(format!("variances must be finite and >= 0, got ({var1}, {var2})")));
    }
    if var1 == 0.0 && var2 == 0.0 {
        return Err(Error::invalid("tail law undefined when both variances are zero"));
    }
    if s == 0.0 {
        return Ok(1.0);
    }
    match mode {
        TailMode::Approx => Ok((-s * s / (var1 + var2)).exp()),
        TailMode::Exact => Ok(exact_tail(s, var1.max(var2), var1.min(var2))),
    }
}

/// Exact tail with `v1 >= v2`. One-dimensional reductions are closed-form;
/// otherwise condition on the larger-variance coordinate and integrate the
/// complementary tail of the other, with a trigonometric substitution that
/// removes the square-root cusp at the sphere crossing.
fn exact_tail(s: f64, v1: f64, v2: f64) -> f64 {
    const QUAD_ABS_ACC: f64 = 1e-10;
    if v2 == 0.0 {
        return 2.0 * normal_tail(s / v1.sqrt());
    }
    if (v1 - v2) <= 1e-14 * (v1 + v2) {
        return (-s * s / (v1 + v2)).exp();
    }
    let a = s / v1.sqrt();
    let inv_norm = (2.0 * std::f64::consts::PI).sqrt().recip();
    let integrand = |theta: f64| {
        let (sin_t, cos_t) = theta.sin_cos();
        let t = a * sin_t;
        let phi = inv_norm * (-0.5 * t * t).exp();
        let tail_y = libm::erfc(s * cos_t / (2.0 * v2).sqrt());
        phi * tail_y * a * cos_t
    };
    let integral = adaptive_simpson(&integrand, 0.0, std::f64::consts::FRAC_PI_2, QUAD_ABS_ACC);
    2.0 * integral + 2.0 * normal_tail(a)
}

/// Adaptive Simpson quadrature with absolute accuracy `acc`.
fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, acc: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        acc: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * acc {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * acc, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * acc, depth - 1)
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(fa, fm, fb, b - a);
    recurse(f, a, b, fa, fm, fb, whole, acc, 40)
}

/// Per-column detection thresholds over the evaluable column range of a
/// slice, with the law behind each threshold.
#[derive(Clone, Debug)]
pub struct ThresholdProfile {
    epsilon: f64,
    mode: TailMode,
    first_column: usize,
    laws: Vec<ContrastLaw>,
    thresholds: Vec<f64>,
}

impl ThresholdProfile {
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn mode(&self) -> TailMode {
        self.mode
    }

    /// Evaluable columns as `(first, last)` inclusive.
    pub fn column_range(&self) -> (usize, usize) {
        (self.first_column, self.first_column + self.thresholds.len() - 1)
    }

    pub fn threshold_at(&self, column: usize) -> Option<f64> {
        column
            .checked_sub(self.first_column)
            .and_then(|k| self.thresholds.get(k))
            .copied()
    }

    pub fn law_at(&self, column: usize) -> Option<&ContrastLaw> {
        column.checked_sub(self.first_column).and_then(|k| self.laws.get(k))
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    /// CSV with one row per column:
    /// `column,sigma_x2,sigma_y2,sigma_delta2,sigma_x_delta,sigma_x_cond2,threshold`.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "column,sigma_x2,sigma_y2,sigma_delta2,sigma_x_delta,sigma_x_cond2,threshold")?;
        for (k, law) in self.laws.iter().enumerate() {
            writeln!(
                w,
                "{},{:e},{:e},{:e},{:e},{:e},{:e}",
                law.column,
                law.var_x,
                law.var_y,
                law.var_lap,
                law.cov_x_lap,
                law.var_x_cond,
                self.thresholds[k]
            )?;
        }
        Ok(())
    }
}

/// Smallest `s >= 0` with `tail_probability(s, var1, var2, mode) <= epsilon`,
/// by bracketing and bisection (relative tolerance well below 1e-8; the tail
/// is continuous and strictly decreasing, so the root is unique).
pub fn solve_threshold(epsilon: f64, var1: f64, var2: f64, mode: TailMode) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if var1 == 0.0 && var2 == 0.0 {
        return Ok(0.0);
    }
    let scale = (var1 + var2).sqrt();
    let mut hi = scale * (-epsilon.ln()).sqrt().max(1.0);
    let mut grow = 0;
    while tail_probability(hi, var1, var2, mode)? > epsilon {
        hi *= 2.0;
        grow += 1;
        if grow > 200 {
            return Err(Error::DegenerateLaw("tail does not fall below epsilon".into()));
        }
    }
    let mut lo = 0.0f64;
    // ~60 halvings drive the bracket to machine precision.
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if tail_probability(mid, var1, var2, mode)? > epsilon {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Thresholds for the contrast of `kind` at every evaluable column.
///
/// The per-column law conditions the horizontal component on the vanishing
/// Laplacian picked out by zero-crossing candidates: the threshold solves
/// `P(C >= s) = epsilon` for `C^2 = Y^2 + X_cond^2` with variances
/// `(var_y, var_x_cond)`.
pub fn threshold_profile(
    cov: &ColumnCovariance,
    kind: KernelKind,
    epsilon: f64,
    mode: TailMode,
) -> Result<ThresholdProfile> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    kind.validate()?;
    let r = kind.support_radius() as usize;
    let width = cov.geometry().full_width();
    if width < 2 * r + 2 {
        return Err(Error::invalid(format!(
            "slice width {width} leaves no evaluable column at radius {r}"
        )));
    }
    let (first, last) = (r, width - 1 - r);
    let mut laws = Vec::with_capacity(last - first + 1);
    let mut thresholds = Vec::with_capacity(last - first + 1);
    for v in first..=last {
        let law = contrast_law(cov, kind, v)?;
        let var_x_cond = if law.var_x == 0.0 && law.var_lap == 0.0 {
            0.0
        } else {
            conditional_variance(&law)?
        };
        thresholds.push(solve_threshold(epsilon, law.var_y, var_x_cond, mode)?);
        laws.push(law);
    }
    Ok(ThresholdProfile { epsilon, mode, first_column: first, laws, thresholds })
}

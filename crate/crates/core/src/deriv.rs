//! Local derivative estimates and contrast fields.
//!
//! Gradient and Laplacian estimates come from a degree-2 least-squares fit of
//! the image over the lattice disc centered at each pixel; the fit collapses
//! to fixed correlation weights, so every field here is a plain windowed sum.
//! Fields are defined only at pixels whose window fits inside the image; the
//! excluded border is reported as `margin` and never padded.

use crate::ball::{moments, DiscBall, MomentSet};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::real::{cast, Real};

/// Which contrast statistic a kernel realizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelKind {
    /// Norm of the gradient estimate at a single fitting radius.
    Single { r: u32 },
    /// Norm of the difference between the gradient estimates at two radii
    /// (`r1 < r2`). Insensitive to locally affine trends by construction.
    Diff { r1: u32, r2: u32 },
}

impl KernelKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelKind::Single { r } if r >= 1 => Ok(()),
            KernelKind::Diff { r1, r2 } if r1 >= 1 && r1 < r2 => Ok(()),
            KernelKind::Single { .. } => Err(Error::invalid("kernel radius must be >= 1")),
            KernelKind::Diff { r1, r2 } => {
                Err(Error::invalid(format!("kernel radii must satisfy 1 <= r1 < r2, got ({r1}, {r2})")))
            }
        }
    }

    /// Radius of the bounding square of the kernel support.
    pub fn support_radius(&self) -> u32 {
        match *self {
            KernelKind::Single { r } => r,
            KernelKind::Diff { r2, .. } => r2,
        }
    }

    /// Radius used for the companion Laplacian estimate (the larger one).
    pub fn laplacian_radius(&self) -> u32 {
        self.support_radius()
    }
}

/// Scalar coefficients `c_ij` of a contrast kernel on the bounding square of
/// its support, plus the moment sets of the discs involved.
///
/// For `Single`, `c_ij = 1/m20(r)` on the disc; for `Diff`,
/// `c_ij = 1_{B_r1}/m20(r1) - 1_{B_r2}/m20(r2)`. The contrast components are
/// `Cx = sum j c_ij I` and `Cy = sum i c_ij I`.
#[derive(Clone, Debug)]
pub struct ContrastKernel<T> {
    kind: KernelKind,
    support: u32,
    coeff: Vec<T>,
    lap_moments: MomentSet<T>,
}

impl<T: Real> ContrastKernel<T> {
    pub fn new(kind: KernelKind) -> Result<Self> {
        kind.validate()?;
        let support = kind.support_radius();
        let side = (2 * support + 1) as usize;
        let mut coeff = vec![T::zero(); side * side];
        let outer = DiscBall::new(support)?;
        let idx = |i: i32, j: i32| {
            ((i + support as i32) as usize) * side + (j + support as i32) as usize
        };
        match kind {
            KernelKind::Single { r } => {
                let w = T::one() / moments::<T>(&outer).m20;
                debug_assert_eq!(r, support);
                for &(i, j) in outer.points() {
                    coeff[idx(i, j)] = w;
                }
            }
            KernelKind::Diff { r1, .. } => {
                let inner = DiscBall::new(r1)?;
                let w1 = T::one() / moments::<T>(&inner).m20;
                let w2 = T::one() / moments::<T>(&outer).m20;
                for &(i, j) in outer.points() {
                    coeff[idx(i, j)] = -w2;
                }
                for &(i, j) in inner.points() {
                    coeff[idx(i, j)] = w1 - w2;
                }
            }
        }
        let lap_moments = moments::<T>(&outer);
        Ok(ContrastKernel { kind, support, coeff, lap_moments })
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn support_radius(&self) -> u32 {
        self.support
    }

    /// Coefficient at offset `(i, j)`; zero outside every disc.
    pub fn coeff(&self, i: i32, j: i32) -> T {
        let r = self.support as i32;
        if i.abs() > r || j.abs() > r {
            return T::zero();
        }
        let side = (2 * self.support + 1) as usize;
        self.coeff[((i + r) as usize) * side + (j + r) as usize]
    }

    /// Moments of the disc used for the companion Laplacian.
    pub fn laplacian_moments(&self) -> &MomentSet<T> {
        &self.lap_moments
    }
}

/// Gradient and Laplacian estimates at a common fitting radius.
#[derive(Clone, Debug)]
pub struct DerivativeFields<T> {
    pub gx: Grid<T>,
    pub gy: Grid<T>,
    pub lap: Grid<T>,
    /// Width of the undefined border; fields are valid on
    /// `[margin, rows-margin) x [margin, cols-margin)`.
    pub margin: usize,
}

/// Contrast components, their norm, and the companion Laplacian.
#[derive(Clone, Debug)]
pub struct ContrastField<T> {
    pub cx: Grid<T>,
    pub cy: Grid<T>,
    /// `sqrt(cx^2 + cy^2)`.
    pub c: Grid<T>,
    pub lap: Grid<T>,
    pub margin: usize,
}

fn check_window<T: Copy>(img: &Grid<T>, r: u32) -> Result<()> {
    let need = (2 * r + 1) as usize;
    if img.rows() <= need || img.cols() <= need {
        return Err(Error::invalid(format!(
            "image {}x{} too small for window radius {r} (needs dimensions > {need})",
            img.rows(),
            img.cols()
        )));
    }
    Ok(())
}

/// Windowed correlation with dense square weights of the given radius.
/// Output is zero on the margin.
fn correlate<T: Real>(img: &Grid<T>, weights: &[T], radius: usize) -> Grid<T> {
    let side = 2 * radius + 1;
    debug_assert_eq!(weights.len(), side * side);
    let mut out = Grid::filled(img.rows(), img.cols(), T::zero());
    for u in radius..img.rows() - radius {
        for v in radius..img.cols() - radius {
            let mut acc = T::zero();
            for di in 0..side {
                let row = &img.row(u + di - radius)[v - radius..v + radius + 1];
                let wrow = &weights[di * side..(di + 1) * side];
                for (&x, &w) in row.iter().zip(wrow) {
                    acc += x * w;
                }
            }
            out.set(u, v, acc);
        }
    }
    out
}

fn dense_weights<T: Real>(r: u32, f: impl Fn(i32, i32) -> T) -> (Vec<T>, DiscBall) {
    let ball = DiscBall::new(r).expect("radius validated by caller");
    let side = (2 * r + 1) as usize;
    let mut w = vec![T::zero(); side * side];
    for &(i, j) in ball.points() {
        w[((i + r as i32) as usize) * side + (j + r as i32) as usize] = f(i, j);
    }
    (w, ball)
}

/// Least-squares gradient estimate `(gx, gy)` at radius `r`.
///
/// `gx` is the derivative along columns, `gy` along rows:
/// `gx(u,v) = (1/m20) sum_{(i,j) in B_r} j * I(u+i, v+j)`, and `gy` the same
/// with weight `i`. Exact on affine images.
pub fn gradient_field<T: Real>(img: &Grid<T>, r: u32) -> Result<DerivativeGrids<T>> {
    if r == 0 {
        return Err(Error::invalid("gradient radius must be >= 1"));
    }
    check_window(img, r)?;
    let norm = moments::<T>(&DiscBall::new(r)?).m20;
    let (wx, _) = dense_weights(r, |_, j| cast::<T>(j as f64) / norm);
    let (wy, _) = dense_weights(r, |i, _| cast::<T>(i as f64) / norm);
    Ok(DerivativeGrids {
        gx: correlate(img, &wx, r as usize),
        gy: correlate(img, &wy, r as usize),
        margin: r as usize,
    })
}

/// Gradient component grids plus their margin.
#[derive(Clone, Debug)]
pub struct DerivativeGrids<T> {
    pub gx: Grid<T>,
    pub gy: Grid<T>,
    pub margin: usize,
}

/// Least-squares Laplacian estimate at radius `r`:
/// `lap(u,v) = (1/beta) sum_{(i,j) in B_r} (alpha + i^2 + j^2) I(u+i, v+j)`.
/// Exact (= 4) on `I = u^2 + v^2`, zero on affine images.
pub fn laplacian_field<T: Real>(img: &Grid<T>, r: u32) -> Result<Grid<T>> {
    if r == 0 {
        return Err(Error::invalid("laplacian radius must be >= 1"));
    }
    check_window(img, r)?;
    let ms = moments::<T>(&DiscBall::new(r)?);
    let (w, _) = dense_weights(r, |i, j| ms.lap_weight(i, j) / ms.beta);
    Ok(correlate(img, &w, r as usize))
}

/// Gradient and Laplacian at one radius, sharing a margin.
pub fn derivative_fields<T: Real>(img: &Grid<T>, r: u32) -> Result<DerivativeFields<T>> {
    let g = gradient_field(img, r)?;
    let lap = laplacian_field(img, r)?;
    Ok(DerivativeFields { gx: g.gx, gy: g.gy, lap, margin: r as usize })
}

/// Contrast components, norm, and companion Laplacian for the given kernel.
///
/// The Laplacian is always taken at the kernel's larger radius, which also
/// sets the common margin.
pub fn contrast_field<T: Real>(img: &Grid<T>, kernel: &ContrastKernel<T>) -> Result<ContrastField<T>> {
    let r = kernel.support_radius();
    check_window(img, r)?;
    let side = (2 * r + 1) as usize;
    let mut wx = vec![T::zero(); side * side];
    let mut wy = vec![T::zero(); side * side];
    for i in -(r as i32)..=r as i32 {
        for j in -(r as i32)..=r as i32 {
            let c = kernel.coeff(i, j);
            let k = ((i + r as i32) as usize) * side + (j + r as i32) as usize;
            wx[k] = cast::<T>(j as f64) * c;
            wy[k] = cast::<T>(i as f64) * c;
        }
    }
    let cx = correlate(img, &wx, r as usize);
    let cy = correlate(img, &wy, r as usize);
    let mut c = Grid::filled(img.rows(), img.cols(), T::zero());
    for u in 0..img.rows() {
        for v in 0..img.cols() {
            c.set(u, v, cx.at(u, v).hypot(cy.at(u, v)));
        }
    }
    let lap = laplacian_field(img, r)?;
    Ok(ContrastField { cx, cy, c, lap, margin: r as usize })
}

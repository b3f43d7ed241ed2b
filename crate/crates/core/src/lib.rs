//! Statistically calibrated edge detection for noisy images.
//!
//! The pipeline: estimate gradient and Laplacian fields by local
//! least-squares fits over lattice discs ([`deriv`]), take Laplacian
//! zero-crossings as edge candidates ([`edges`]), and keep a candidate only
//! when its contrast exceeds a threshold derived from the *exact* law of the
//! contrast under the image's noise model — stationary white noise
//! ([`white`]) or noise correlated by row-wise inversion of a line-of-sight
//! projection ([`abel`], [`tomo`]). Thresholds are chosen so pure noise is
//! detected with probability at most a user-set `epsilon` per candidate.
//!
//! Grids and operators are generic over the pixel scalar ([`real::Real`]:
//! `f32` or `f64`); statistics are always evaluated in `f64`. [`Image`] and
//! [`Mask`] are the concrete aliases used by the command-line tools.

pub mod abel;
pub mod ball;
pub mod deriv;
pub mod edges;
pub mod error;
pub mod grid;
pub mod io;
pub mod mat;
pub mod phantom;
pub mod real;
pub mod tomo;
pub mod white;

pub use abel::{radiograph, reconstruct, AbelOperator, SliceGeometry};
pub use ball::{moments, DiscBall, MomentSet};
pub use deriv::{
    contrast_field, derivative_fields, gradient_field, laplacian_field, ContrastField,
    ContrastKernel, DerivativeFields, KernelKind,
};
pub use edges::{significant_edges, zero_crossings, EdgeMap, ThresholdRule};
pub use error::{Error, Result};
pub use grid::Grid;
pub use phantom::{ground_truth_edges, render, PhantomSpec};
pub use real::Real;
pub use tomo::{
    contrast_law, tail_probability, threshold_profile, ColumnCovariance, ContrastLaw, TailMode,
    ThresholdProfile,
};
pub use white::{
    sample_white_field, white_laws, white_threshold, white_threshold_for_kernel, WhiteNoiseSpec,
};

/// Default-precision image grid.
pub type Image = Grid<f64>;
/// Single-precision image grid.
pub type ImageF32 = Grid<f32>;
/// Boolean pixel mask (crossings, edges, ground truth).
pub type Mask = Grid<bool>;

/// Crate version, recorded in experiment manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

//! Sampling and exact laws for stationary white Gaussian noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::ball::{moments, DiscBall};
use crate::deriv::KernelKind;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::real::{cast, Real};

/// Parameters of an i.i.d. centered Gaussian field.
#[derive(Clone, Copy, Debug)]
pub struct WhiteNoiseSpec {
    pub rows: usize,
    pub cols: usize,
    pub sigma: f64,
    pub seed: u64,
}

/// Draws the field row-major from a ChaCha8 stream seeded with `seed`.
/// The same spec always produces the same grid, bit for bit.
pub fn sample_white_field<T: Real>(spec: &WhiteNoiseSpec) -> Result<Grid<T>>
where
    StandardNormal: Distribution<T>,
{
    if spec.sigma <= 0.0 || !spec.sigma.is_finite() {
        return Err(Error::invalid(format!("sigma must be positive, got {}", spec.sigma)));
    }
    if spec.rows == 0 || spec.cols == 0 {
        return Err(Error::invalid("noise field dimensions must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let sigma = cast::<T>(spec.sigma);
    let data: Vec<T> =
        (0..spec.rows * spec.cols).map(|_| StandardNormal.sample(&mut rng) * sigma).collect();
    Grid::from_vec(spec.rows, spec.cols, data)
}

/// Variances of the derivative estimates on white noise of deviation `sigma`.
///
/// Each gradient component has variance `sigma^2 / m20(r)`; the Laplacian
/// estimate has variance `sigma^2 sum (alpha + i^2 + j^2)^2 / beta^2`. At a
/// fixed pixel the two gradient components and the Laplacian are pairwise
/// uncorrelated (odd disc moments vanish), hence independent in the Gaussian
/// case — so gradient thresholds need no conditioning here.
#[derive(Clone, Copy, Debug)]
pub struct WhiteLaws {
    pub sigma: f64,
    pub radius: u32,
    pub var_gradient_component: f64,
    pub var_laplacian: f64,
}

pub fn white_laws(sigma: f64, r: u32) -> Result<WhiteLaws> {
    if sigma <= 0.0 || !sigma.is_finite() {
        return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
    }
    let ball = DiscBall::new(r)?;
    let ms = moments::<f64>(&ball);
    let sq_sum: f64 = ball.points().iter().map(|&(i, j)| ms.lap_weight(i, j).powi(2)).sum();
    Ok(WhiteLaws {
        sigma,
        radius: r,
        var_gradient_component: sigma * sigma / ms.m20,
        var_laplacian: sigma * sigma * sq_sum / (ms.beta * ms.beta),
    })
}

/// Variance of one component of the contrast statistic of `kind` on white
/// noise. For `Single{r}` this is `sigma^2/m20(r)`; for `Diff{r1,r2}` the
/// nesting of the discs gives `sigma^2 (1/m20(r1) - 1/m20(r2))`.
pub fn white_contrast_component_variance(sigma: f64, kind: KernelKind) -> Result<f64> {
    kind.validate()?;
    if sigma <= 0.0 || !sigma.is_finite() {
        return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
    }
    Ok(match kind {
        KernelKind::Single { r } => sigma * sigma / moments::<f64>(&DiscBall::new(r)?).m20,
        KernelKind::Diff { r1, r2 } => {
            let m1 = moments::<f64>(&DiscBall::new(r1)?).m20;
            let m2 = moments::<f64>(&DiscBall::new(r2)?).m20;
            sigma * sigma * (1.0 / m1 - 1.0 / m2)
        }
    })
}

/// Smallest `s` with `P(|gradient estimate| >= s) <= epsilon` on pure white
/// noise: `m20(r) |grad|^2 / sigma^2` is chi-square with 2 degrees of
/// freedom, so `s = sigma sqrt(-2 ln(epsilon) / m20(r))` in closed form.
pub fn white_threshold(epsilon: f64, sigma: f64, r: u32) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let laws = white_laws(sigma, r)?;
    Ok((-2.0 * laws.var_gradient_component * epsilon.ln()).sqrt())
}

/// [`white_threshold`] generalized to either contrast kind. The squared
/// contrast is again exponential (both components share one variance and stay
/// independent of the companion Laplacian), so the closed form carries over
/// with the kind's component variance.
pub fn white_threshold_for_kernel(epsilon: f64, sigma: f64, kind: KernelKind) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let var = white_contrast_component_variance(sigma, kind)?;
    Ok((-2.0 * var * epsilon.ln()).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn radius_one_laws() {
        let laws = white_laws(1.0, 1).unwrap();
        assert_relative_eq!(laws.var_gradient_component, 0.5, max_relative = 1e-15);
        // Squared-weight sum 0.8 over beta^2 = 0.04.
        assert_relative_eq!(laws.var_laplacian, 20.0, max_relative = 1e-12);
    }

    #[test]
    fn threshold_closed_form_spot_value() {
        // epsilon = 1/e, sigma = 1, r = 1: s = sqrt(2/m20) = 1.
        let s = white_threshold((-1.0f64).exp(), 1.0, 1).unwrap();
        assert_relative_eq!(s, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn threshold_decreases_with_epsilon() {
        let s1 = white_threshold(1e-2, 2.0, 3).unwrap();
        let s2 = white_threshold(1e-4, 2.0, 3).unwrap();
        assert!(s2 > s1);
    }

    #[test]
    fn sampling_is_deterministic_and_calibrated() {
        let spec = WhiteNoiseSpec { rows: 512, cols: 512, sigma: 1.0, seed: 7 };
        let a: Grid<f64> = sample_white_field(&spec).unwrap();
        let b: Grid<f64> = sample_white_field(&spec).unwrap();
        assert_eq!(a, b);

        let n = (a.rows() * a.cols()) as f64;
        let mean: f64 = a.as_slice().iter().sum::<f64>() / n;
        let var: f64 = a.as_slice().iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        assert!(mean.abs() < 0.01, "sample mean {mean}");
        assert!((var - 1.0).abs() < 0.03, "sample variance {var}");

        let other = sample_white_field::<f64>(&WhiteNoiseSpec { seed: 8, ..spec }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(white_laws(0.0, 1).is_err());
        assert!(white_laws(1.0, 0).is_err());
        assert!(white_threshold(0.0, 1.0, 1).is_err());
        assert!(white_threshold(1.0, 1.0, 1).is_err());
        assert!(sample_white_field::<f64>(&WhiteNoiseSpec {
            rows: 4,
            cols: 4,
            sigma: -1.0,
            seed: 0
        })
        .is_err());
    }

    #[test]
    fn diff_component_variance_closed_form() {
        let v = white_contrast_component_variance(2.0, KernelKind::Diff { r1: 1, r2: 2 }).unwrap();
        assert_relative_eq!(v, 4.0 * (1.0 / 2.0 - 1.0 / 14.0), max_relative = 1e-14);
    }

    #[test]
    fn kernel_threshold_reduces_to_single_form() {
        let a = white_threshold(1e-3, 0.7, 5).unwrap();
        let b = white_threshold_for_kernel(1e-3, 0.7, KernelKind::Single { r: 5 }).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-15);
    }
}

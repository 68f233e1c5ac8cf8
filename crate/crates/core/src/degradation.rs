//! Observation operators: the spectral response that turns a hyperspectral
//! cube into a multispectral one, the spatial blur-and-decimate operator that
//! turns it into a low-resolution cube, that operator's adjoint, additive
//! noise, and reduced-resolution (Wald) triplet generation.
//!
//! The blur is cyclic. Output pixel `(I, J)` of the spatial operator is
//! `sum_{a,b} kernel[a][b] * x[(I*f + a) mod H][(J*f + b) mod W]`, i.e. the
//! kernel is anchored at the top-left sample of each `f x f` block, so a
//! uniform `f x f` kernel with factor `f` is exactly block averaging.

use alloc::format;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{shape_err, FusionError, Result};
use crate::linalg;
use crate::tensor::{mode3_multiply, HsCube, Matrix};

/// An `S x s` spectral response matrix with full column rank.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResponse {
    matrix: Matrix,
}

impl SpectralResponse {
    pub fn new(matrix: Matrix) -> Result<Self> {
        let (big_s, small_s) = (matrix.rows(), matrix.cols());
        if small_s > big_s {
            return Err(shape_err!(
                "spectral response maps {big_s} bands to {small_s}; output bands must not exceed input bands"
            ));
        }
        let sigma = linalg::svd(&matrix, false)?.sigma;
        if linalg::numerical_rank(&sigma) < small_s {
            return Err(FusionError::Degenerate(format!(
                "spectral response {big_s}x{small_s} is not of full column rank (singular values {sigma:?})"
            )));
        }
        Ok(Self { matrix })
    }

    /// Three smooth nonnegative bumps (blue, green, red) sampled over
    /// `bands` channels spread evenly across 400-700 nm, each column
    /// normalized to sum to one.
    pub fn rgb_preset(bands: usize) -> Result<Self> {
        if bands < 3 {
            return Err(FusionError::Parameter(format!(
                "the RGB preset needs at least 3 hyperspectral bands, got {bands}"
            )));
        }
        // (centre nm, width nm); the red channel carries a small blue lobe
        let lobes: [&[(f64, f64, f64)]; 3] = [
            &[(610.0, 40.0, 1.0), (440.0, 20.0, 0.08)],
            &[(545.0, 38.0, 1.0)],
            &[(455.0, 30.0, 1.0)],
        ];
        let wavelength = |b: usize| {
            if bands == 1 {
                550.0
            } else {
                400.0 + 300.0 * b as f64 / (bands - 1) as f64
            }
        };
        let mut m = Matrix::from_fn(bands, 3, |b, c| {
            let lambda = wavelength(b);
            lobes[c]
                .iter()
                .map(|&(mu, w, amp)| {
                    let t = (lambda - mu) / w;
                    amp * libm::exp(-0.5 * t * t)
                })
                .sum()
        });
        for c in 0..3 {
            let total: f64 = (0..bands).map(|b| m.get(b, c)).sum();
            for b in 0..bands {
                m.set(b, c, m.get(b, c) / total);
            }
        }
        Self::new(m)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// Number of hyperspectral bands `S`.
    pub fn hs_bands(&self) -> usize {
        self.matrix.rows()
    }

    /// Number of multispectral bands `s`.
    pub fn ms_bands(&self) -> usize {
        self.matrix.cols()
    }
}

/// Cyclic blur followed by decimation by an integer factor.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialDegradation {
    kernel: Matrix,
    factor: usize,
}

impl SpatialDegradation {
    pub fn new(kernel: Matrix, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(FusionError::Parameter(
                "decimation factor must be positive".into(),
            ));
        }
        if kernel.rows() != kernel.cols() {
            return Err(shape_err!(
                "blur kernel must be square, got {}x{}",
                kernel.rows(),
                kernel.cols()
            ));
        }
        let sum: f64 = kernel.as_slice().iter().sum();
        if libm::fabs(sum - 1.0) > 1e-12 {
            return Err(FusionError::Parameter(format!(
                "blur kernel must sum to 1, sums to {sum}"
            )));
        }
        Ok(Self { kernel, factor })
    }

    /// `f x f` averaging kernel with decimation `f`: plain block averaging.
    pub fn uniform(factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(FusionError::Parameter(
                "decimation factor must be positive".into(),
            ));
        }
        let w = 1.0 / (factor * factor) as f64;
        Self::new(Matrix::from_fn(factor, factor, |_, _| w), factor)
    }

    /// Normalized isotropic Gaussian kernel of the given size and width.
    pub fn gaussian(size: usize, sigma: f64, factor: usize) -> Result<Self> {
        if size == 0 || !(sigma > 0.0) {
            return Err(FusionError::Parameter(format!(
                "gaussian kernel needs size > 0 and sigma > 0, got size {size}, sigma {sigma}"
            )));
        }
        let c = (size as f64 - 1.0) / 2.0;
        let mut k = Matrix::from_fn(size, size, |i, j| {
            let (di, dj) = (i as f64 - c, j as f64 - c);
            libm::exp(-(di * di + dj * dj) / (2.0 * sigma * sigma))
        });
        let total: f64 = k.as_slice().iter().sum();
        k = k.scaled(1.0 / total);
        Self::new(k, factor)
    }

    pub fn kernel(&self) -> &Matrix {
        &self.kernel
    }

    pub fn factor(&self) -> usize {
        self.factor
    }

    /// Offset, in high-resolution pixels, from a block's top-left sample to
    /// the centre of the kernel footprint.
    pub fn sample_offset(&self) -> f64 {
        (self.kernel.rows() as f64 - 1.0) / 2.0
    }

    fn low_res_dims(&self, height: usize, width: usize) -> Result<(usize, usize)> {
        let f = self.factor;
        if !height.is_multiple_of(f) || !width.is_multiple_of(f) {
            return Err(shape_err!(
                "decimation factor {f} does not divide spatial size {height}x{width}"
            ));
        }
        Ok((height / f, width / f))
    }
}

/// Gaussian noise parameters with a seed for the deterministic stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    sigma: f64,
    seed: u64,
}

impl NoiseSpec {
    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(FusionError::Parameter(format!(
                "noise sigma must be finite and nonnegative, got {sigma}"
            )));
        }
        Ok(Self { sigma, seed })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// `Y = X R`: maps an `S`-band cube to an `s`-band cube.
pub fn apply_spectral_response(x: &HsCube, r: &SpectralResponse) -> Result<HsCube> {
    if x.bands() != r.hs_bands() {
        return Err(shape_err!(
            "spectral response expects {} bands, cube has {}",
            r.hs_bands(),
            x.bands()
        ));
    }
    mode3_multiply(x, &r.matrix.transpose())
}

/// Blur-then-decimate, band by band: `H x W x S` to `H/f x W/f x S`.
pub fn apply_spatial_degradation(x: &HsCube, c: &SpatialDegradation) -> Result<HsCube> {
    let (height, width, bands) = x.shape();
    let (h, w) = c.low_res_dims(height, width)?;
    let f = c.factor;
    let k = c.kernel.rows();
    let kernel = c.kernel.as_slice();
    let mut out = HsCube::zeros(h, w, bands);
    let row_idx: Vec<usize> = (0..h * k).map(|t| ((t / k) * f + t % k) % height).collect();
    let col_idx: Vec<usize> = (0..w * k).map(|t| ((t / k) * f + t % k) % width).collect();
    for band in 0..bands {
        let src = x.plane(band);
        let dst = out.plane_mut(band);
        for big_i in 0..h {
            for big_j in 0..w {
                let mut acc = 0.0;
                for a in 0..k {
                    let row = &src[row_idx[big_i * k + a] * width..][..width];
                    let krow = &kernel[a * k..(a + 1) * k];
                    for (b, kv) in krow.iter().enumerate() {
                        acc += kv * row[col_idx[big_j * k + b]];
                    }
                }
                dst[big_i * w + big_j] = acc;
            }
        }
    }
    Ok(out)
}

/// Exact adjoint of [`apply_spatial_degradation`]: zero-fill upsampling
/// followed by cyclic correlation with the kernel.
pub fn adjoint_spatial_degradation(
    e: &HsCube,
    c: &SpatialDegradation,
    target_h: usize,
    target_w: usize,
) -> Result<HsCube> {
    let (h, w) = c.low_res_dims(target_h, target_w)?;
    if (e.height(), e.width()) != (h, w) {
        return Err(shape_err!(
            "adjoint of factor {} to {target_h}x{target_w} needs a {h}x{w} input, got {}x{}",
            c.factor,
            e.height(),
            e.width()
        ));
    }
    let f = c.factor;
    let k = c.kernel.rows();
    let kernel = c.kernel.as_slice();
    let mut out = HsCube::zeros(target_h, target_w, e.bands());
    let row_idx: Vec<usize> = (0..h * k)
        .map(|t| ((t / k) * f + t % k) % target_h)
        .collect();
    let col_idx: Vec<usize> = (0..w * k)
        .map(|t| ((t / k) * f + t % k) % target_w)
        .collect();
    for band in 0..e.bands() {
        let src = e.plane(band);
        let dst = out.plane_mut(band);
        for big_i in 0..h {
            for big_j in 0..w {
                let v = src[big_i * w + big_j];
                for a in 0..k {
                    let row = row_idx[big_i * k + a] * target_w;
                    let krow = &kernel[a * k..(a + 1) * k];
                    for (b, kv) in krow.iter().enumerate() {
                        dst[row + col_idx[big_j * k + b]] += kv * v;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Adds i.i.d. `N(0, sigma^2)` noise drawn from a ChaCha stream seeded by `n.seed`.
pub fn add_noise(x: &HsCube, n: &NoiseSpec) -> HsCube {
    let mut out = x.clone();
    if n.sigma == 0.0 {
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(n.seed);
    for v in out.as_mut_slice() {
        let z: f64 = StandardNormal.sample(&mut rng);
        *v += n.sigma * z;
    }
    out
}

/// A reduced-resolution training/evaluation triplet.
#[derive(Debug, Clone, PartialEq)]
pub struct WaldTriplet {
    /// Degraded high-resolution multispectral image, `h x w x s`.
    pub hrms: HsCube,
    /// Degraded low-resolution hyperspectral image, `h/f x w/f x S`.
    pub lrhs: HsCube,
    /// The original low-resolution hyperspectral image, `h x w x S`.
    pub reference: HsCube,
}

/// Degrades both inputs by `c` so the original low-resolution cube becomes
/// ground truth for the smaller problem.
pub fn wald_downsample(y: &HsCube, z: &HsCube, c: &SpatialDegradation) -> Result<WaldTriplet> {
    let f = c.factor;
    if y.height() != z.height() * f || y.width() != z.width() * f {
        return Err(shape_err!(
            "Wald protocol needs HrMS {}x{} to be factor {f} times LrHS {}x{}",
            y.height(),
            y.width(),
            z.height(),
            z.width()
        ));
    }
    Ok(WaldTriplet {
        hrms: apply_spatial_degradation(y, c)?,
        lrhs: apply_spatial_degradation(z, c)?,
        reference: z.clone(),
    })
}

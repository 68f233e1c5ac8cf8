//! Proximal-gradient solver for
//!
//! ```text
//! min_Yhat  g(Yhat) + lambda * f(Yhat),   g(Yhat) = |C (Y A + Yhat B) - Z|_F^2
//! ```
//!
//! Each iteration is the four-step update
//! `X = Y A + Yhat B`, `E = C X - Z`, `G = eta' C^T E B^T`, `Yhat <- prox(Yhat - G)`.
//!
//! Convention: `grad g = 2 C^T E B^T`. The configured step `eta` applies to
//! that gradient, so the update calls [`compute_gradient_step`] with
//! `eta' = 2 * eta`, and the proximal threshold is `lambda * eta`.

use alloc::format;
use alloc::vec::Vec;
use core::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::degradation::{
    adjoint_spatial_degradation, apply_spatial_degradation, SpatialDegradation, SpectralResponse,
};
use crate::error::{shape_err, FusionError, Result};
use crate::linalg;
use crate::subspace::{
    derive_coefficients, spectral_subspace_from_lrhs, CoefficientPair, SpectralBasis,
};
use crate::tensor::{mode3_multiply, HsCube};

/// Power iterations used to estimate `|C|^2`.
pub const POWER_ITERATIONS: usize = 100;

/// Step size selection.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum StepSize {
    /// `1 / L` with `L` the Lipschitz constant of `grad g`.
    Auto,
    Fixed(f64),
}

/// Proximal operator applied after each gradient step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ProxKind {
    /// No regularizer (`f = 0`).
    Identity,
    /// Soft thresholding, the proximal map of the elementwise l1 norm.
    SoftThreshold,
}

impl ProxKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProxKind::Identity => "identity",
            ProxKind::SoftThreshold => "soft_threshold",
        }
    }
}

impl FromStr for ProxKind {
    type Err = FusionError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(ProxKind::Identity),
            "soft_threshold" => Ok(ProxKind::SoftThreshold),
            other => Err(FusionError::Config(format!(
                "unknown prox kind {other:?} (expected \"identity\" or \"soft_threshold\")"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusionConfig {
    pub max_iters: usize,
    pub eta: StepSize,
    pub lambda: f64,
    pub prox: ProxKind,
    pub rank: usize,
    /// Stop once the relative objective change drops to this value. Zero disables.
    pub tolerance: f64,
    /// Keep every iteration's objective and residual norm; otherwise only the last.
    pub record_trace: bool,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            max_iters: 200,
            eta: StepSize::Auto,
            lambda: 0.0,
            prox: ProxKind::Identity,
            rank: 8,
            tolerance: 1e-8,
            record_trace: true,
        }
    }
}

impl FusionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(FusionError::Config("max_iters must be at least 1".into()));
        }
        if let StepSize::Fixed(eta) = self.eta {
            if !(eta > 0.0) || !eta.is_finite() {
                return Err(FusionError::Config(format!(
                    "step size must be positive, got {eta}"
                )));
            }
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(FusionError::Config(format!(
                "lambda must be >= 0, got {}",
                self.lambda
            )));
        }
        if !(self.tolerance >= 0.0) {
            return Err(FusionError::Config(format!(
                "tolerance must be >= 0, got {}",
                self.tolerance
            )));
        }
        Ok(())
    }
}

/// Output of [`fuse`].
#[derive(Debug, Clone, PartialEq)]
pub struct FusionResult {
    pub x_hat: HsCube,
    pub y_hat: HsCube,
    pub basis: SpectralBasis,
    pub coeff: CoefficientPair,
    /// `g + lambda f` evaluated at the iterate entering each iteration.
    pub objective_trace: Vec<f64>,
    /// `|E|_F` per iteration.
    pub data_residual_trace: Vec<f64>,
    pub iterations_run: usize,
    pub eta: f64,
}

fn check_bases(y: &HsCube, y_hat: &HsCube, coeff: &CoefficientPair) -> Result<()> {
    if y.bands() != coeff.ms_bands() {
        return Err(shape_err!(
            "HrMS has {} bands, coefficients expect {}",
            y.bands(),
            coeff.ms_bands()
        ));
    }
    if y_hat.bands() != coeff.rank() - coeff.ms_bands() {
        return Err(shape_err!(
            "bases have {} bands, coefficients expect {}",
            y_hat.bands(),
            coeff.rank() - coeff.ms_bands()
        ));
    }
    if (y.height(), y.width()) != (y_hat.height(), y_hat.width()) {
        return Err(shape_err!(
            "HrMS is {}x{} but bases are {}x{}",
            y.height(),
            y.width(),
            y_hat.height(),
            y_hat.width()
        ));
    }
    Ok(())
}

/// `X = Y x3 A^T + Yhat x3 B^T`.
pub fn compute_x(y: &HsCube, y_hat: &HsCube, coeff: &CoefficientPair) -> Result<HsCube> {
    check_bases(y, y_hat, coeff)?;
    let mut x = mode3_multiply(y, &coeff.a().transpose())?;
    x.axpy(1.0, &mode3_multiply(y_hat, &coeff.b().transpose())?);
    Ok(x)
}

/// `E = C(X) - Z`.
pub fn compute_residual(x: &HsCube, z: &HsCube, c: &SpatialDegradation) -> Result<HsCube> {
    let cx = apply_spatial_degradation(x, c)?;
    cx.ensure_same_shape(z, "degraded estimate vs LrHS")?;
    Ok(cx.sub(z))
}

/// `G = eta * C^T(E) x3 B`, shape `(h f) x (w f) x (r - s)`.
pub fn compute_gradient_step(
    e: &HsCube,
    c: &SpatialDegradation,
    coeff: &CoefficientPair,
    eta: f64,
) -> Result<HsCube> {
    if e.bands() != coeff.hs_bands() {
        return Err(shape_err!(
            "residual has {} bands, coefficients expect {}",
            e.bands(),
            coeff.hs_bands()
        ));
    }
    // C^T acts spatially and x3 B spectrally, so applying B first at low
    // resolution gives the same result with fewer bands to upsample.
    let low = mode3_multiply(e, coeff.b())?;
    let f = c.factor();
    let mut g = adjoint_spatial_degradation(&low, c, e.height() * f, e.width() * f)?;
    g.as_mut_slice().iter_mut().for_each(|v| *v *= eta);
    Ok(g)
}

/// Scalar soft threshold `sign(t) max(|t| - tau, 0)`.
#[inline]
pub fn soft_threshold(t: f64, tau: f64) -> f64 {
    if t > tau {
        t - tau
    } else if t < -tau {
        t + tau
    } else {
        0.0
    }
}

/// `prox_{lambda eta}(Yhat - G)`.
pub fn prox_step(y_hat: &HsCube, g: &HsCube, lambda_eta: f64, kind: ProxKind) -> Result<HsCube> {
    y_hat.ensure_same_shape(g, "prox step")?;
    let t = y_hat.sub(g);
    Ok(match kind {
        ProxKind::Identity => t,
        ProxKind::SoftThreshold => t.map(|v| soft_threshold(v, lambda_eta)),
    })
}

/// Largest eigenvalue of `C^T C` on `height x width` images, by power iteration.
pub fn operator_norm_sq(
    c: &SpatialDegradation,
    height: usize,
    width: usize,
    iters: usize,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_c0de);
    let mut v = HsCube::from_fn(height, width, 1, |_, _, _| rng.random_range(0.5..1.5));
    let mut estimate = 0.0;
    for _ in 0..iters.max(1) {
        let norm = v.frobenius_norm();
        if norm == 0.0 {
            return Ok(0.0);
        }
        v = v.scaled(1.0 / norm);
        let cv = apply_spatial_degradation(&v, c)?;
        // Rayleigh quotient of the unit vector
        estimate = cv.dot(&cv);
        v = adjoint_spatial_degradation(&cv, c, height, width)?;
    }
    Ok(estimate)
}

/// `1 / L` with `L = 2 |C|^2 |B|^2`.
pub fn estimate_step_size(
    c: &SpatialDegradation,
    coeff: &CoefficientPair,
    dims: (usize, usize),
) -> Result<f64> {
    let c_sq = operator_norm_sq(c, dims.0, dims.1, POWER_ITERATIONS)?;
    let b_norm = linalg::spectral_norm(coeff.b())?;
    let lipschitz = 2.0 * c_sq * b_norm * b_norm;
    if !(lipschitz > 0.0) {
        return Err(FusionError::Degenerate(
            "gradient Lipschitz constant is zero; cannot choose a step size".into(),
        ));
    }
    Ok(1.0 / lipschitz)
}

fn l1_norm(cube: &HsCube) -> f64 {
    cube.as_slice().iter().map(|v| libm::fabs(*v)).sum()
}

/// Fuses an HrMS cube `y` (`H x W x s`) and an LrHS cube `z` (`h x w x S`).
pub fn fuse(
    y: &HsCube,
    z: &HsCube,
    c: &SpatialDegradation,
    r_resp: &SpectralResponse,
    cfg: &FusionConfig,
) -> Result<FusionResult> {
    cfg.validate()?;
    let (height, width, s) = y.shape();
    let f = c.factor();
    if height % f != 0 || width % f != 0 || (z.height(), z.width()) != (height / f, width / f) {
        return Err(shape_err!(
            "HrMS {height}x{width} and LrHS {}x{} are inconsistent with factor {f}",
            z.height(),
            z.width()
        ));
    }
    if s != r_resp.ms_bands() || z.bands() != r_resp.hs_bands() {
        return Err(shape_err!(
            "response is {}x{} but HrMS has {s} bands and LrHS {}",
            r_resp.hs_bands(),
            r_resp.ms_bands(),
            z.bands()
        ));
    }
    if cfg.rank <= s {
        return Err(FusionError::Config(format!(
            "rank {} must exceed the multispectral band count {s}",
            cfg.rank
        )));
    }

    let basis = spectral_subspace_from_lrhs(z, cfg.rank)?;
    let coeff = derive_coefficients(&basis, r_resp)?;
    let eta = match cfg.eta {
        StepSize::Auto => estimate_step_size(c, &coeff, (height, width))?,
        StepSize::Fixed(eta) => eta,
    };
    let threshold = cfg.lambda * eta;

    // C(Y A + Yhat B) - Z = [C(Y) x3 A^T - Z] + C(Yhat) x3 B^T; the bracket is fixed.
    let mut offset = mode3_multiply(&apply_spatial_degradation(y, c)?, &coeff.a().transpose())?;
    offset.axpy(-1.0, z);
    let b_t = coeff.b().transpose();

    let mut y_hat = HsCube::zeros(height, width, cfg.rank - s);
    let mut objective_trace = Vec::new();
    let mut data_residual_trace = Vec::new();
    let mut previous: Option<f64> = None;
    let mut iterations_run = 0;

    for k in 1..=cfg.max_iters {
        let mut e = mode3_multiply(&apply_spatial_degradation(&y_hat, c)?, &b_t)?;
        e.axpy(1.0, &offset);
        let data_term = e.dot(&e);
        let objective = match cfg.prox {
            ProxKind::Identity => data_term,
            ProxKind::SoftThreshold => data_term + cfg.lambda * l1_norm(&y_hat),
        };
        if !objective.is_finite() {
            return Err(FusionError::Divergence { iteration: k });
        }
        if !cfg.record_trace {
            objective_trace.clear();
            data_residual_trace.clear();
        }
        objective_trace.push(objective);
        data_residual_trace.push(libm::sqrt(data_term));

        let g = compute_gradient_step(&e, c, &coeff, 2.0 * eta)?;
        y_hat = prox_step(&y_hat, &g, threshold, cfg.prox)?;
        iterations_run = k;

        if let (Some(prev), true) = (previous, cfg.tolerance > 0.0) {
            if libm::fabs(prev - objective) <= cfg.tolerance * libm::fabs(prev) {
                break;
            }
        }
        previous = Some(objective);
    }

    if !y_hat.is_finite() {
        return Err(FusionError::Divergence {
            iteration: iterations_run,
        });
    }
    let x_hat = compute_x(y, &y_hat, &coeff)?;
    Ok(FusionResult {
        x_hat,
        y_hat,
        basis,
        coeff,
        objective_trace,
        data_residual_trace,
        iterations_run,
        eta,
    })
}

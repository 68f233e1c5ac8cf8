//! Full-reference quality indices for fused cubes.
//!
//! * PSNR: mean over bands of `10 log10(peak^2 / MSE_band)`, each band capped at
//!   [`PSNR_CAP`] dB.
//! * SAM: mean per-pixel spectral angle in degrees.
//! * ERGAS: `100 / factor * sqrt(mean_band(MSE_band / mean_band(ref)^2))`.
//! * SSIM: single-scale SSIM with an 11x11 Gaussian window (sigma 1.5) over
//!   fully contained windows, `C1 = (0.01 peak)^2`, `C2 = (0.03 peak)^2`,
//!   averaged over windows and then bands.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{FusionError, Result};
use crate::tensor::HsCube;

/// PSNR reported for a band with zero error.
pub const PSNR_CAP: f64 = 99.0;
/// Pixels whose spectral norm falls below this are excluded from SAM.
pub const SAM_NORM_FLOOR: f64 = 1e-12;
pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricReport {
    /// dB
    pub psnr: f64,
    /// degrees
    pub sam: f64,
    pub ergas: f64,
    pub ssim: f64,
    pub per_band_psnr: Vec<f64>,
}

fn check_pair(reference: &HsCube, test: &HsCube) -> Result<()> {
    reference.ensure_same_shape(test, "reference vs test")
}

fn check_peak(peak: f64) -> Result<()> {
    if !(peak > 0.0) || !peak.is_finite() {
        return Err(FusionError::Parameter(format!(
            "peak must be positive, got {peak}"
        )));
    }
    Ok(())
}

fn band_mse(reference: &HsCube, test: &HsCube, band: usize) -> f64 {
    let n = reference.pixels() as f64;
    reference
        .plane(band)
        .iter()
        .zip(test.plane(band))
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n
}

pub fn psnr_per_band(reference: &HsCube, test: &HsCube, peak: f64) -> Result<Vec<f64>> {
    check_pair(reference, test)?;
    check_peak(peak)?;
    Ok((0..reference.bands())
        .map(|b| {
            let mse = band_mse(reference, test, b);
            if mse == 0.0 {
                PSNR_CAP
            } else {
                (10.0 * libm::log10(peak * peak / mse)).min(PSNR_CAP)
            }
        })
        .collect())
}

pub fn psnr(reference: &HsCube, test: &HsCube, peak: f64) -> Result<f64> {
    let per_band = psnr_per_band(reference, test, peak)?;
    Ok(per_band.iter().sum::<f64>() / per_band.len() as f64)
}

/// Mean spectral angle in degrees, plus the number of skipped near-zero pixels.
pub fn sam_with_skipped(reference: &HsCube, test: &HsCube) -> Result<(f64, usize)> {
    check_pair(reference, test)?;
    if reference.bands() < 2 {
        return Err(FusionError::Parameter(format!(
            "spectral angle needs at least 2 bands, got {}",
            reference.bands()
        )));
    }
    let n = reference.pixels();
    let mut norm_r = vec![0.0; n];
    let mut norm_t = vec![0.0; n];
    for b in 0..reference.bands() {
        for (p, (r, t)) in reference.plane(b).iter().zip(test.plane(b)).enumerate() {
            norm_r[p] += r * r;
            norm_t[p] += t * t;
        }
    }
    norm_r
        .iter_mut()
        .chain(norm_t.iter_mut())
        .for_each(|v| *v = libm::sqrt(*v));
    // angle = 2 atan2(|u - v|, |u + v|) for unit spectra u, v; exact at zero
    let mut diff = vec![0.0; n];
    let mut sum = vec![0.0; n];
    for b in 0..reference.bands() {
        for (p, (r, t)) in reference.plane(b).iter().zip(test.plane(b)).enumerate() {
            if norm_r[p] < SAM_NORM_FLOOR || norm_t[p] < SAM_NORM_FLOOR {
                continue;
            }
            let (u, v) = (r / norm_r[p], t / norm_t[p]);
            diff[p] += (u - v) * (u - v);
            sum[p] += (u + v) * (u + v);
        }
    }
    let mut total = 0.0;
    let mut counted = 0usize;
    for p in 0..n {
        if norm_r[p] < SAM_NORM_FLOOR || norm_t[p] < SAM_NORM_FLOOR {
            continue;
        }
        total += 2.0 * libm::atan2(libm::sqrt(diff[p]), libm::sqrt(sum[p]));
        counted += 1;
    }
    let mean = if counted == 0 {
        0.0
    } else {
        total / counted as f64
    };
    Ok((mean.to_degrees(), n - counted))
}

pub fn sam(reference: &HsCube, test: &HsCube) -> Result<f64> {
    sam_with_skipped(reference, test).map(|(deg, _)| deg)
}

/// `factor` is the spatial resolution ratio between the high- and low-resolution inputs.
pub fn ergas(reference: &HsCube, test: &HsCube, factor: f64) -> Result<f64> {
    check_pair(reference, test)?;
    if !(factor > 0.0) {
        return Err(FusionError::Parameter(format!(
            "ERGAS factor must be positive, got {factor}"
        )));
    }
    let n = reference.pixels() as f64;
    let mut acc = 0.0;
    for b in 0..reference.bands() {
        let mean = reference.plane(b).iter().sum::<f64>() / n;
        if libm::fabs(mean) < 1e-12 {
            return Err(FusionError::Degenerate(format!(
                "reference band {b} has zero mean; ERGAS is undefined"
            )));
        }
        acc += band_mse(reference, test, b) / (mean * mean);
    }
    Ok(100.0 / factor * libm::sqrt(acc / reference.bands() as f64))
}

fn gaussian_window() -> [f64; SSIM_WINDOW] {
    let mut w = [0.0; SSIM_WINDOW];
    let c = (SSIM_WINDOW / 2) as f64;
    for (i, v) in w.iter_mut().enumerate() {
        let d = i as f64 - c;
        *v = libm::exp(-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA));
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    w
}

/// Separable "valid" filtering of a `height x width` plane.
fn filter_valid(plane: &[f64], height: usize, width: usize, w: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let k = SSIM_WINDOW;
    let (oh, ow) = (height - k + 1, width - k + 1);
    let mut rows = vec![0.0; height * ow];
    for i in 0..height {
        let src = &plane[i * width..(i + 1) * width];
        for j in 0..ow {
            rows[i * ow + j] = w.iter().zip(&src[j..j + k]).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for i in 0..oh {
        for j in 0..ow {
            out[i * ow + j] = (0..k).map(|a| w[a] * rows[(i + a) * ow + j]).sum();
        }
    }
    out
}

pub fn ssim(reference: &HsCube, test: &HsCube, peak: f64) -> Result<f64> {
    check_pair(reference, test)?;
    check_peak(peak)?;
    let (height, width, bands) = reference.shape();
    if height < SSIM_WINDOW || width < SSIM_WINDOW {
        return Err(FusionError::Parameter(format!(
            "SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW} pixels, got {height}x{width}"
        )));
    }
    let c1 = (0.01 * peak) * (0.01 * peak);
    let c2 = (0.03 * peak) * (0.03 * peak);
    let w = gaussian_window();
    let mut total = 0.0;
    for b in 0..bands {
        let x = reference.plane(b);
        let y = test.plane(b);
        let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
        let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
        let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();
        let mu_x = filter_valid(x, height, width, &w);
        let mu_y = filter_valid(y, height, width, &w);
        let e_xx = filter_valid(&xx, height, width, &w);
        let e_yy = filter_valid(&yy, height, width, &w);
        let e_xy = filter_valid(&xy, height, width, &w);
        let mut band_sum = 0.0;
        for t in 0..mu_x.len() {
            let (mx, my) = (mu_x[t], mu_y[t]);
            let var_x = e_xx[t] - mx * mx;
            let var_y = e_yy[t] - my * my;
            let cov = e_xy[t] - mx * my;
            band_sum += ((2.0 * mx * my + c1) * (2.0 * cov + c2))
                / ((mx * mx + my * my + c1) * (var_x + var_y + c2));
        }
        total += band_sum / mu_x.len() as f64;
    }
    Ok(total / bands as f64)
}

/// All four indices. `peak` defaults to the reference maximum.
pub fn evaluate(
    reference: &HsCube,
    test: &HsCube,
    factor: f64,
    peak: Option<f64>,
) -> Result<MetricReport> {
    let peak = peak.unwrap_or_else(|| reference.max_value());
    let per_band_psnr = psnr_per_band(reference, test, peak)?;
    Ok(MetricReport {
        psnr: per_band_psnr.iter().sum::<f64>() / per_band_psnr.len() as f64,
        sam: sam(reference, test)?,
        ergas: ergas(reference, test, factor)?,
        ssim: ssim(reference, test, peak)?,
        per_band_psnr,
    })
}

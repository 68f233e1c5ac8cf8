//! Bicubic interpolation of the low-resolution cube, the reference method
//! fused results are compared against.

use alloc::vec;

use crate::degradation::SpatialDegradation;
use crate::error::{FusionError, Result};
use crate::tensor::HsCube;

const KEYS_A: f64 = -0.5;

fn keys_weight(x: f64) -> f64 {
    let x = libm::fabs(x);
    if x <= 1.0 {
        ((KEYS_A + 2.0) * x - (KEYS_A + 3.0)) * x * x + 1.0
    } else if x < 2.0 {
        ((KEYS_A * x - 5.0 * KEYS_A) * x + 8.0 * KEYS_A) * x - 4.0 * KEYS_A
    } else {
        0.0
    }
}

/// For each output index, the four source indices and weights (cyclic boundary).
fn taps(
    out_len: usize,
    in_len: usize,
    factor: usize,
    offset: f64,
) -> vec::Vec<([usize; 4], [f64; 4])> {
    (0..out_len)
        .map(|p| {
            let u = (p as f64 - offset) / factor as f64;
            let base = libm::floor(u);
            let t = u - base;
            let mut idx = [0usize; 4];
            let mut w = [0.0; 4];
            for m in 0..4 {
                let src = base as i64 - 1 + m as i64;
                idx[m] = src.rem_euclid(in_len as i64) as usize;
                w[m] = keys_weight(t + 1.0 - m as f64);
            }
            (idx, w)
        })
        .collect()
}

/// Upsamples `z` by `factor`, treating low-resolution sample `I` as located
/// at high-resolution coordinate `I * factor + offset`.
pub fn bicubic_upsample(z: &HsCube, factor: usize, offset: f64) -> Result<HsCube> {
    if factor == 0 {
        return Err(FusionError::Parameter(
            "upsampling factor must be positive".into(),
        ));
    }
    let (h, w, bands) = z.shape();
    let (big_h, big_w) = (h * factor, w * factor);
    let row_taps = taps(big_h, h, factor, offset);
    let col_taps = taps(big_w, w, factor, offset);
    let mut out = HsCube::zeros(big_h, big_w, bands);
    let mut tmp = vec![0.0; h * big_w];
    for b in 0..bands {
        let src = z.plane(b);
        for i in 0..h {
            for (j, (idx, wt)) in col_taps.iter().enumerate() {
                tmp[i * big_w + j] = (0..4).map(|m| wt[m] * src[i * w + idx[m]]).sum();
            }
        }
        let dst = out.plane_mut(b);
        for (i, (idx, wt)) in row_taps.iter().enumerate() {
            for j in 0..big_w {
                dst[i * big_w + j] = (0..4).map(|m| wt[m] * tmp[idx[m] * big_w + j]).sum();
            }
        }
    }
    Ok(out)
}

/// Bicubic upsampling aligned with the sampling geometry of `c`.
pub fn bicubic_baseline(z: &HsCube, c: &SpatialDegradation) -> Result<HsCube> {
    bicubic_upsample(z, c.factor(), c.sample_offset())
}

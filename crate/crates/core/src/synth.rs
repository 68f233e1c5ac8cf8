//! Seeded synthetic scenes with an exact low-rank spectral structure.
//!
//! A scene mixes `rank` endmember spectra with spatial abundance maps built
//! from smooth random fields, sharp-edged shapes and fine texture, so that
//! the unfolded cube has rank `rank` exactly.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{FusionError, Result};
use crate::tensor::{fold, HsCube, Matrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneSpec {
    pub height: usize,
    pub width: usize,
    pub bands: usize,
    pub rank: usize,
    pub seed: u64,
}

fn endmember(rng: &mut ChaCha8Rng, bands: usize) -> Vec<f64> {
    let lobes: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.random_range(380.0..720.0),
                rng.random_range(25.0..90.0),
                rng.random_range(0.1..0.8),
            )
        })
        .collect();
    let floor = rng.random_range(0.02..0.1);
    (0..bands)
        .map(|b| {
            let lambda = if bands == 1 {
                550.0
            } else {
                400.0 + 300.0 * b as f64 / (bands - 1) as f64
            };
            floor
                + lobes
                    .iter()
                    .map(|&(mu, w, amp)| {
                        let t = (lambda - mu) / w;
                        amp * libm::exp(-0.5 * t * t)
                    })
                    .sum::<f64>()
        })
        .collect()
}

enum Shape {
    Rect { r0: f64, c0: f64, r1: f64, c1: f64 },
    Disk { r: f64, c: f64, radius: f64 },
}

impl Shape {
    fn contains(&self, i: f64, j: f64) -> bool {
        match *self {
            Shape::Rect { r0, c0, r1, c1 } => i >= r0 && i < r1 && j >= c0 && j < c1,
            Shape::Disk { r, c, radius } => {
                (i - r) * (i - r) + (j - c) * (j - c) <= radius * radius
            }
        }
    }
}

fn abundance(rng: &mut ChaCha8Rng, height: usize, width: usize) -> Vec<f64> {
    let (hf, wf) = (height as f64, width as f64);
    let waves = |rng: &mut ChaCha8Rng, lo: f64, hi: f64, n: usize| -> Vec<(f64, f64, f64, f64)> {
        (0..n)
            .map(|_| {
                (
                    rng.random_range(lo..hi) * if rng.random_bool(0.5) { 1.0 } else { -1.0 },
                    rng.random_range(lo..hi),
                    rng.random_range(0.0..core::f64::consts::TAU),
                    rng.random_range(0.3..1.0),
                )
            })
            .collect()
    };
    let smooth = waves(rng, 0.3, 3.0, 4);
    let texture = waves(rng, 6.0, 20.0, 3);
    let shapes: Vec<(Shape, f64)> = (0..4)
        .map(|_| {
            let shape = if rng.random_bool(0.5) {
                let (r0, c0) = (rng.random_range(0.0..hf), rng.random_range(0.0..wf));
                Shape::Rect {
                    r0,
                    c0,
                    r1: r0 + rng.random_range(0.1..0.5) * hf,
                    c1: c0 + rng.random_range(0.1..0.5) * wf,
                }
            } else {
                Shape::Disk {
                    r: rng.random_range(0.0..hf),
                    c: rng.random_range(0.0..wf),
                    radius: rng.random_range(0.05..0.3) * hf.min(wf),
                }
            };
            (shape, rng.random_range(-0.4..0.6))
        })
        .collect();
    let eval = |list: &[(f64, f64, f64, f64)], i: f64, j: f64| -> f64 {
        list.iter()
            .map(|&(fy, fx, phase, amp)| {
                amp * libm::sin(core::f64::consts::TAU * (fy * i / hf + fx * j / wf) + phase)
            })
            .sum::<f64>()
            / list.len() as f64
    };
    let mut map = Vec::with_capacity(height * width);
    for i in 0..height {
        for j in 0..width {
            let (fi, fj) = (i as f64, j as f64);
            let mut v = 0.5 + 0.35 * eval(&smooth, fi, fj) + 0.08 * eval(&texture, fi, fj);
            for (shape, level) in &shapes {
                if shape.contains(fi, fj) {
                    v += level;
                }
            }
            map.push(v.max(0.0));
        }
    }
    map
}

/// Generates a nonnegative `height x width x bands` cube of spectral rank `rank`.
pub fn generate_scene(spec: &SceneSpec) -> Result<HsCube> {
    let SceneSpec {
        height,
        width,
        bands,
        rank,
        seed,
    } = *spec;
    if height == 0 || width == 0 || bands == 0 {
        return Err(FusionError::Parameter(
            "scene dimensions must be positive".into(),
        ));
    }
    if rank == 0 || rank > bands.min(height * width) {
        return Err(FusionError::Parameter(alloc::format!(
            "scene rank {rank} outside 1..={}",
            bands.min(height * width)
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spectra: Vec<Vec<f64>> = (0..rank).map(|_| endmember(&mut rng, bands)).collect();
    let maps: Vec<Vec<f64>> = (0..rank)
        .map(|_| abundance(&mut rng, height, width))
        .collect();
    let n = height * width;
    let abund = Matrix::from_fn(n, rank, |p, k| maps[k][p]);
    let endm = Matrix::from_fn(rank, bands, |k, b| spectra[k][b]);
    fold(&abund.matmul(&endm)?, height, width)
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::degradation::SpectralResponse;
use crate::tensor::{fold, HsCube, Matrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

pub fn gaussian_cube(rng: &mut ChaCha8Rng, h: usize, w: usize, s: usize) -> HsCube {
    HsCube::from_fn(h, w, s, |_, _, _| rng.sample::<f64, _>(StandardNormal))
}

/// Product of `HW x r` and `r x S` Gaussian factors.
pub fn low_rank_cube(rng: &mut ChaCha8Rng, h: usize, w: usize, s: usize, r: usize) -> HsCube {
    let left = gaussian_matrix(rng, h * w, r);
    let right = gaussian_matrix(rng, r, s);
    fold(&left.matmul(&right).unwrap(), h, w).unwrap()
}

/// Random nonnegative response with full column rank.
pub fn random_response(rng: &mut ChaCha8Rng, big_s: usize, small_s: usize) -> SpectralResponse {
    SpectralResponse::new(Matrix::from_fn(big_s, small_s, |_, _| {
        rng.random_range(0.0..1.0)
    }))
    .unwrap()
}

pub fn rel(a: &HsCube, b: &HsCube) -> f64 {
    a.sub(b).frobenius_norm() / b.frobenius_norm()
}

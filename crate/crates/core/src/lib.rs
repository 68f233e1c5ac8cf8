//! Numerical core for fusing a high-resolution multispectral image with a
//! low-resolution hyperspectral image through a low-rank spectral
//! representation `X = Y A + Yhat B` and a proximal-gradient solver.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]
// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod baseline;
pub mod degradation;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod solver;
pub mod subspace;
pub mod synth;
pub mod tensor;
#[cfg(test)]
mod testutil;

pub use degradation::{
    add_noise, adjoint_spatial_degradation, apply_spatial_degradation, apply_spectral_response,
    wald_downsample, NoiseSpec, SpatialDegradation, SpectralResponse, WaldTriplet,
};
pub use error::{FusionError, Result};
pub use metrics::MetricReport;
pub use solver::{fuse, FusionConfig, FusionResult, ProxKind, StepSize};
pub use subspace::{
    decompose_exact, derive_coefficients, spectral_subspace_from_lrhs, verify_corollary1,
    CoefficientPair, Decomposition, SpectralBasis,
};
pub use tensor::{fold, mode3_multiply, unfold, HsCube, Matrix};

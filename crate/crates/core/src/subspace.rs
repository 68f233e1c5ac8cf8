//! Low-rank spectral representation `X = Y A + Yhat B`.
//!
//! Given an orthonormal spectral basis `V` (`S x r`) and a response `R`
//! (`S x s`), let `M = V^T R` (`r x s`) and let `N` (`r x (r - s)`) be an
//! orthonormal basis of the complement of `col(M)`. Then `A = M^+ V^T` and
//! `B = N^T V^T` satisfy `M M^+ + N N^T = I`, so every `X = W V^T` splits as
//! `(X R) A + (W N) B`.

use alloc::format;

use crate::degradation::{
    apply_spatial_degradation, apply_spectral_response, SpatialDegradation, SpectralResponse,
};
use crate::error::{shape_err, FusionError, Result};
use crate::linalg;
use crate::tensor::{fold, unfold, HsCube, Matrix};

/// `S x r` matrix with orthonormal columns spanning the spectral row space.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBasis {
    v: Matrix,
}

impl SpectralBasis {
    /// Wraps a matrix after checking `V^T V = I` to 1e-10.
    pub fn new(v: Matrix) -> Result<Self> {
        let gram = v.transpose().matmul(&v)?;
        let defect = gram.sub(&Matrix::identity(v.cols())).frobenius_norm();
        if defect > 1e-10 {
            return Err(FusionError::Parameter(format!(
                "basis columns are not orthonormal (|V^T V - I| = {defect:e})"
            )));
        }
        Ok(Self { v })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.v
    }

    pub fn rank(&self) -> usize {
        self.v.cols()
    }

    pub fn bands(&self) -> usize {
        self.v.rows()
    }
}

/// Coefficients `A` (`s x S`) and `B` (`(r - s) x S`).
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientPair {
    a: Matrix,
    b: Matrix,
}

impl CoefficientPair {
    /// Validates shapes and that `[A; B]` has full row rank.
    pub fn new(a: Matrix, b: Matrix) -> Result<Self> {
        if a.cols() != b.cols() {
            return Err(shape_err!(
                "A is {}x{} but B is {}x{}; both need S columns",
                a.rows(),
                a.cols(),
                b.rows(),
                b.cols()
            ));
        }
        let stacked = a.vstack(&b)?;
        if stacked.rows() > stacked.cols() {
            return Err(shape_err!(
                "rank r = {} exceeds band count {}",
                stacked.rows(),
                stacked.cols()
            ));
        }
        let sigma = linalg::svd(&stacked, false)?.sigma;
        if linalg::numerical_rank(&sigma) < stacked.rows() {
            return Err(FusionError::Degenerate(
                "stacked coefficients [A; B] are rank deficient".into(),
            ));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    /// Multispectral band count `s`.
    pub fn ms_bands(&self) -> usize {
        self.a.rows()
    }

    /// Representation rank `r`.
    pub fn rank(&self) -> usize {
        self.a.rows() + self.b.rows()
    }

    /// Hyperspectral band count `S`.
    pub fn hs_bands(&self) -> usize {
        self.a.cols()
    }
}

/// Top-`r` right singular vectors of the matricized low-resolution cube.
pub fn spectral_subspace_from_lrhs(z: &HsCube, r: usize) -> Result<SpectralBasis> {
    let limit = z.pixels().min(z.bands());
    if r == 0 || r > limit {
        return Err(FusionError::Parameter(format!(
            "rank {r} outside 1..={limit} for a {}x{}x{} cube",
            z.height(),
            z.width(),
            z.bands()
        )));
    }
    top_right_singular_vectors(&unfold(z), r).map(|(basis, _)| basis)
}

fn top_right_singular_vectors(
    m: &Matrix,
    r: usize,
) -> Result<(SpectralBasis, alloc::vec::Vec<f64>)> {
    let d = linalg::svd(m, false)?;
    let v = Matrix::from_fn(m.cols(), r, |i, j| d.vt.get(j, i));
    Ok((SpectralBasis { v }, d.sigma))
}

/// Closed-form coefficients for a basis and response.
pub fn derive_coefficients(
    basis: &SpectralBasis,
    r_resp: &SpectralResponse,
) -> Result<CoefficientPair> {
    let r = basis.rank();
    let s = r_resp.ms_bands();
    if basis.bands() != r_resp.hs_bands() {
        return Err(shape_err!(
            "basis has {} bands but the response expects {}",
            basis.bands(),
            r_resp.hs_bands()
        ));
    }
    if r <= s {
        return Err(FusionError::Parameter(format!(
            "rank r = {r} must exceed the multispectral band count s = {s}"
        )));
    }
    let vt = basis.v.transpose();
    let m = vt.matmul(r_resp.matrix())?;
    let sigma = linalg::svd(&m, false)?.sigma;
    if linalg::numerical_rank(&sigma) < s {
        return Err(FusionError::Degenerate(
            "spectral response collapses inside subspace (V^T R is rank deficient)".into(),
        ));
    }
    let a = linalg::pinv(&m)?.matmul(&vt)?;
    let n = linalg::column_complement(&m)?;
    let b = n.transpose().matmul(&vt)?;
    CoefficientPair::new(a, b)
}

/// Result of [`decompose_exact`].
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub hrms: HsCube,
    pub bases: HsCube,
    pub coeff: CoefficientPair,
}

impl Decomposition {
    /// `Y A + Yhat B`, folded back into a cube.
    pub fn reconstruct(&self) -> Result<HsCube> {
        combine(&self.hrms, &self.bases, &self.coeff)
    }
}

/// Splits a cube into `Y = X R`, bases `Yhat` and coefficients so that
/// `X = Y A + Yhat B` whenever `X` has rank `r`.
pub fn decompose_exact(x: &HsCube, r_resp: &SpectralResponse, r: usize) -> Result<Decomposition> {
    let limit = x.pixels().min(x.bands());
    if r == 0 || r > limit {
        return Err(FusionError::Parameter(format!(
            "rank {r} outside 1..={limit}"
        )));
    }
    let y = apply_spectral_response(x, r_resp)?;
    let xm = unfold(x);
    let (basis, sigma) = top_right_singular_vectors(&xm, r)?;
    if linalg::numerical_rank(&sigma) < r {
        return Err(FusionError::Degenerate(format!(
            "cube has numerical rank {} below requested rank {r}",
            linalg::numerical_rank(&sigma)
        )));
    }
    let coeff = derive_coefficients(&basis, r_resp)?;
    // B has orthonormal rows, so the least-squares bases are (X - Y A) B^T.
    let residual = xm.sub(&unfold(&y).matmul(coeff.a())?);
    let bases = residual.matmul(&coeff.b().transpose())?;
    Ok(Decomposition {
        hrms: y,
        bases: fold(&bases, x.height(), x.width())?,
        coeff,
    })
}

pub(crate) fn combine(y: &HsCube, y_hat: &HsCube, coeff: &CoefficientPair) -> Result<HsCube> {
    crate::solver::compute_x(y, y_hat, coeff)
}

/// Relative defect `|Z - C(Y A + Yhat B)|_F / |Z|_F`.
pub fn verify_corollary1(
    y: &HsCube,
    z: &HsCube,
    c: &SpatialDegradation,
    coeff: &CoefficientPair,
    y_hat: &HsCube,
) -> Result<f64> {
    let x = combine(y, y_hat, coeff)?;
    let predicted = apply_spatial_degradation(&x, c)?;
    z.ensure_same_shape(&predicted, "LrHS vs degraded representation")?;
    let norm = z.frobenius_norm();
    if norm == 0.0 {
        return Err(FusionError::Degenerate(
            "LrHS cube is identically zero".into(),
        ));
    }
    Ok(z.sub(&predicted).frobenius_norm() / norm)
}

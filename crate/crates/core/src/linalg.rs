//! Thin wrappers over nalgebra's SVD with the conventions the rest of the
//! crate relies on: singular values sorted in descending order and each right
//! singular vector signed so its largest-magnitude entry is positive.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{FusionError, Result};
use crate::tensor::Matrix;

/// Relative tolerance for numerical rank decisions.
pub const RANK_RTOL: f64 = 1e-8;

/// Thin SVD `m = u * diag(sigma) * vt`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Option<Matrix>,
    pub sigma: Vec<f64>,
    pub vt: Matrix,
}

pub(crate) fn to_dmatrix(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

pub fn svd(m: &Matrix, compute_u: bool) -> Result<Svd> {
    let dm = to_dmatrix(m);
    let raw =
        nalgebra::linalg::SVD::try_new(dm, compute_u, true, f64::EPSILON, 0).ok_or_else(|| {
            FusionError::Degenerate(format!(
                "SVD of a {}x{} matrix did not converge",
                m.rows(),
                m.cols()
            ))
        })?;
    let k = raw.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    // stable sort keeps ties in nalgebra's order, which is deterministic
    order.sort_by(|&a, &b| raw.singular_values[b].total_cmp(&raw.singular_values[a]));

    let v_t = raw.v_t.as_ref().expect("v_t requested");
    let mut vt = Matrix::zeros(k, m.cols());
    let mut u = compute_u.then(|| Matrix::zeros(m.rows(), k));
    let mut sigma = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        sigma.push(raw.singular_values[src]);
        let row: Vec<f64> = (0..m.cols()).map(|j| v_t[(src, j)]).collect();
        let sign = largest_entry_sign(&row);
        for (j, v) in row.iter().enumerate() {
            vt.set(dst, j, sign * v);
        }
        if let (Some(u), Some(raw_u)) = (u.as_mut(), raw.u.as_ref()) {
            for i in 0..m.rows() {
                u.set(i, dst, sign * raw_u[(i, src)]);
            }
        }
    }
    Ok(Svd { u, sigma, vt })
}

fn largest_entry_sign(v: &[f64]) -> f64 {
    let mut best = 0usize;
    for (i, x) in v.iter().enumerate() {
        if libm::fabs(*x) > libm::fabs(v[best]) {
            best = i;
        }
    }
    if v[best] < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Number of singular values above `RANK_RTOL * sigma_max`.
pub fn numerical_rank(sigma: &[f64]) -> usize {
    let max = sigma.first().copied().unwrap_or(0.0);
    if max <= 0.0 {
        return 0;
    }
    sigma.iter().filter(|&&s| s > RANK_RTOL * max).count()
}

/// Moore-Penrose pseudo-inverse with cutoff `RANK_RTOL * sigma_max`.
pub fn pinv(m: &Matrix) -> Result<Matrix> {
    let d = svd(m, true)?;
    let u = d.u.as_ref().expect("u requested");
    let cutoff = RANK_RTOL * d.sigma.first().copied().unwrap_or(0.0);
    // pinv = V * diag(1/sigma) * U^T
    let mut out = Matrix::zeros(m.cols(), m.rows());
    for (k, &s) in d.sigma.iter().enumerate() {
        if s <= cutoff || s == 0.0 {
            continue;
        }
        for i in 0..m.cols() {
            let vik = d.vt.get(k, i) / s;
            for j in 0..m.rows() {
                let cur = out.get(i, j);
                out.set(i, j, cur + vik * u.get(j, k));
            }
        }
    }
    Ok(out)
}

/// Orthonormal basis (as columns) of the orthogonal complement of the column
/// space of a full-column-rank `r x s` matrix, i.e. of the null space of `m^T`.
///
/// The basis is read off the top eigenvectors of the projector `I - m m^+`,
/// whose nonzero eigenvalues are all one.
pub fn column_complement(m: &Matrix) -> Result<Matrix> {
    let r = m.rows();
    let s = m.cols();
    if s >= r {
        return Err(FusionError::Parameter(format!(
            "a {r}x{s} matrix has no column-space complement"
        )));
    }
    let proj = m.matmul(&pinv(m)?)?;
    let complement = Matrix::identity(r).sub(&proj);
    let d = svd(&complement, false)?;
    Ok(Matrix::from_fn(r, r - s, |i, j| d.vt.get(j, i)))
}

/// Largest singular value.
pub fn spectral_norm(m: &Matrix) -> Result<f64> {
    Ok(svd(m, false)?.sigma.first().copied().unwrap_or(0.0))
}

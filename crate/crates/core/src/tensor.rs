//! Dense three-mode image cubes and their matricized views.
//!
//! Cubes are stored band-sequentially: one `height × width` row-major plane
//! per band, planes in band order. The matricized form of a cube has one row
//! per pixel (row index `i * width + j`) and one column per band.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{shape_err, FusionError, Result};

/// A `height × width × bands` image cube in band-sequential order.
#[derive(Debug, Clone, PartialEq)]
pub struct HsCube {
    height: usize,
    width: usize,
    bands: usize,
    data: Vec<f64>,
}

/// A dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

fn check_dims(what: &str, dims: &[usize]) -> Result<()> {
    if dims.contains(&0) {
        return Err(shape_err!(
            "{what} dimensions must be positive, got {dims:?}"
        ));
    }
    Ok(())
}

fn check_finite(data: &[f64]) -> Result<()> {
    match data.iter().position(|v| !v.is_finite()) {
        Some(idx) => Err(FusionError::Parameter(alloc::format!(
            "non-finite value {} at flat index {idx}",
            data[idx]
        ))),
        None => Ok(()),
    }
}

impl HsCube {
    /// Builds a cube from band-sequential data, rejecting bad lengths and non-finite values.
    pub fn from_vec(height: usize, width: usize, bands: usize, data: Vec<f64>) -> Result<Self> {
        check_dims("cube", &[height, width, bands])?;
        let expected = height * width * bands;
        if data.len() != expected {
            return Err(shape_err!(
                "cube {height}x{width}x{bands} needs {expected} values, got {}",
                data.len()
            ));
        }
        check_finite(&data)?;
        Ok(Self {
            height,
            width,
            bands,
            data,
        })
    }

    pub fn zeros(height: usize, width: usize, bands: usize) -> Self {
        assert!(
            height > 0 && width > 0 && bands > 0,
            "cube dimensions must be positive"
        );
        Self {
            height,
            width,
            bands,
            data: vec![0.0; height * width * bands],
        }
    }

    /// Builds a cube from a function of `(row, col, band)`.
    pub fn from_fn(
        height: usize,
        width: usize,
        bands: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let mut cube = Self::zeros(height, width, bands);
        for b in 0..bands {
            for i in 0..height {
                for j in 0..width {
                    cube.data[(b * height + i) * width + j] = f(i, j, b);
                }
            }
        }
        cube
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    /// `(height, width, bands)`.
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.height, self.width, self.bands)
    }

    pub fn pixels(&self) -> usize {
        self.height * self.width
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, band: usize) -> f64 {
        self.data[(band * self.height + row) * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, band: usize, value: f64) {
        self.data[(band * self.height + row) * self.width + col] = value;
    }

    /// The row-major spatial plane of one band.
    pub fn plane(&self, band: usize) -> &[f64] {
        let n = self.pixels();
        &self.data[band * n..(band + 1) * n]
    }

    pub fn plane_mut(&mut self, band: usize) -> &mut [f64] {
        let n = self.pixels();
        &mut self.data[band * n..(band + 1) * n]
    }

    /// The spectral vector at one pixel.
    pub fn spectrum(&self, row: usize, col: usize) -> Vec<f64> {
        (0..self.bands).map(|b| self.get(row, col, b)).collect()
    }

    pub fn same_shape(&self, other: &HsCube) -> bool {
        self.shape() == other.shape()
    }

    pub(crate) fn ensure_same_shape(&self, other: &HsCube, what: &str) -> Result<()> {
        if !self.same_shape(other) {
            return Err(shape_err!(
                "{what}: shape {:?} does not match {:?}",
                self.shape(),
                other.shape()
            ));
        }
        Ok(())
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|v| v * v).sum::<f64>())
    }

    /// Frobenius inner product. Panics on shape mismatch.
    pub fn dot(&self, other: &HsCube) -> f64 {
        assert!(self.same_shape(other), "dot: shape mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    /// `self - other`. Panics on shape mismatch.
    pub fn sub(&self, other: &HsCube) -> HsCube {
        assert!(self.same_shape(other), "sub: shape mismatch");
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        self.with_data(data)
    }

    /// `self + alpha * other`, in place. Panics on shape mismatch.
    pub fn axpy(&mut self, alpha: f64, other: &HsCube) {
        assert!(self.same_shape(other), "axpy: shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
    }

    pub fn scaled(&self, alpha: f64) -> HsCube {
        self.map(|v| alpha * v)
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> HsCube {
        self.with_data(self.data.iter().map(|&v| f(v)).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn max_value(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn with_data(&self, data: Vec<f64>) -> HsCube {
        debug_assert_eq!(data.len(), self.data.len());
        HsCube {
            height: self.height,
            width: self.width,
            bands: self.bands,
            data,
        }
    }
}

impl Matrix {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_dims("matrix", &[rows, cols])?;
        if data.len() != rows * cols {
            return Err(shape_err!(
                "matrix {rows}x{cols} needs {} values, got {}",
                rows * cols,
                data.len()
            ));
        }
        check_finite(&data)?;
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != cols) {
            return Err(shape_err!(
                "row {bad} has {} entries, expected {cols}",
                rows[bad].len()
            ));
        }
        Self::from_vec(rows.len(), cols, rows.concat())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.cols + col] = value;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Matrix product `self * rhs`.
    pub fn matmul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols != rhs.rows {
            return Err(shape_err!(
                "cannot multiply {}x{} by {}x{}",
                self.rows,
                self.cols,
                rhs.rows,
                rhs.cols
            ));
        }
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                for (d, b) in dst.iter_mut().zip(rhs.row(k)) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Stacks `self` on top of `below`.
    pub fn vstack(&self, below: &Matrix) -> Result<Matrix> {
        if self.cols != below.cols {
            return Err(shape_err!(
                "vstack: {} vs {} columns",
                self.cols,
                below.cols
            ));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&below.data);
        Ok(Matrix {
            rows: self.rows + below.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "sub: shape mismatch"
        );
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scaled(&self, alpha: f64) -> Matrix {
        let data = self.data.iter().map(|v| alpha * v).collect();
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|v| v * v).sum::<f64>())
    }
}

/// Matricizes a cube: row `i * width + j` holds the spectrum of pixel `(i, j)`.
pub fn unfold(cube: &HsCube) -> Matrix {
    let n = cube.pixels();
    let s = cube.bands;
    let mut data = vec![0.0; n * s];
    for b in 0..s {
        for (p, &v) in cube.plane(b).iter().enumerate() {
            data[p * s + b] = v;
        }
    }
    Matrix {
        rows: n,
        cols: s,
        data,
    }
}

/// Inverse of [`unfold`].
pub fn fold(mat: &Matrix, height: usize, width: usize) -> Result<HsCube> {
    check_dims("fold target", &[height, width])?;
    if mat.rows != height * width {
        return Err(shape_err!(
            "cannot fold a {}x{} matrix into a {height}x{width} cube ({} pixels)",
            mat.rows,
            mat.cols,
            height * width
        ));
    }
    let s = mat.cols;
    let n = mat.rows;
    let mut data = vec![0.0; n * s];
    for p in 0..n {
        for b in 0..s {
            data[b * n + p] = mat.data[p * s + b];
        }
    }
    Ok(HsCube {
        height,
        width,
        bands: s,
        data,
    })
}

/// Mode-3 product: output band `l` is `sum_k m[l][k] * band_k`.
///
/// Equivalent to `fold(unfold(cube) * m^T)`; the output has `m.rows()` bands.
pub fn mode3_multiply(cube: &HsCube, m: &Matrix) -> Result<HsCube> {
    if m.cols != cube.bands {
        return Err(shape_err!(
            "mode-3 product needs {} matrix columns for a {}-band cube, got {}x{}",
            cube.bands,
            cube.bands,
            m.rows,
            m.cols
        ));
    }
    let n = cube.pixels();
    let mut out = HsCube::zeros(cube.height, cube.width, m.rows);
    for l in 0..m.rows {
        let dst = &mut out.data[l * n..(l + 1) * n];
        for (k, &coef) in m.row(l).iter().enumerate() {
            if coef == 0.0 {
                continue;
            }
            for (d, u) in dst.iter_mut().zip(cube.plane(k)) {
                *d += coef * u;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::vec::Vec;

    fn lcg_cube(h: usize, w: usize, s: usize, seed: u64) -> HsCube {
        let mut state = seed;
        HsCube::from_fn(h, w, s, |_, _, _| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
    }

    #[test]
    fn unfold_single_pixel_and_single_band() {
        let c = HsCube::from_vec(1, 1, 3, vec![1.0, 2.0, 3.0]).unwrap();
        let m = unfold(&c);
        assert_eq!((m.rows(), m.cols()), (1, 3));
        assert_eq!(m.as_slice(), &[1.0, 2.0, 3.0]);

        let c = HsCube::from_vec(2, 1, 1, vec![4.0, 5.0]).unwrap();
        let m = unfold(&c);
        assert_eq!((m.rows(), m.cols()), (2, 1));
        assert_eq!(m.as_slice(), &[4.0, 5.0]);
    }

    #[test]
    fn unfold_matches_index_oracle() {
        let c = HsCube::from_fn(2, 2, 2, |i, j, b| (100 * i + 10 * j + b) as f64 + 1.0);
        let m = unfold(&c);
        assert_eq!((m.rows(), m.cols()), (4, 2));
        for i in 0..2 {
            for j in 0..2 {
                for b in 0..2 {
                    assert_eq!(m.get(i * 2 + j, b), c.get(i, j, b));
                }
            }
        }
        // and the inverse direction on the same data
        let back = fold(&m, 2, 2).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn fold_round_trip_is_exact() {
        let c = lcg_cube(3, 4, 5, 9);
        assert_eq!(fold(&unfold(&c), 3, 4).unwrap(), c);
    }

    #[test]
    fn fold_rejects_mismatched_rows() {
        let m = Matrix::zeros(3, 2);
        let err = fold(&m, 2, 2).unwrap_err();
        assert_eq!(err.category(), "shape");
        let msg = std::format!("{err}");
        assert!(msg.contains("3x2") && msg.contains("2x2"), "{msg}");
    }

    #[test]
    fn mode3_identity_and_small_example() {
        let c = lcg_cube(3, 2, 4, 1);
        assert_eq!(mode3_multiply(&c, &Matrix::identity(4)).unwrap(), c);

        let c = HsCube::from_vec(1, 1, 2, vec![1.0, 2.0]).unwrap();
        let m = Matrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(mode3_multiply(&c, &m).unwrap().as_slice(), &[3.0, 2.0]);
    }

    #[test]
    fn mode3_matches_matricized_product() {
        let c = lcg_cube(3, 3, 4, 5);
        let m = Matrix::from_fn(2, 4, |i, j| (i as f64 + 1.0) * 0.3 - j as f64 * 0.7);
        let direct = mode3_multiply(&c, &m).unwrap();
        let oracle = fold(&unfold(&c).matmul(&m.transpose()).unwrap(), 3, 3).unwrap();
        let rel = direct.sub(&oracle).frobenius_norm() / oracle.frobenius_norm();
        assert!(rel <= 1e-12, "{rel}");
        assert_eq!(direct.bands(), 2);
    }

    #[test]
    fn mode3_rejects_band_mismatch() {
        let c = lcg_cube(2, 2, 3, 2);
        assert_eq!(
            mode3_multiply(&c, &Matrix::zeros(2, 4))
                .unwrap_err()
                .category(),
            "shape"
        );
    }

    #[test]
    fn constructors_validate() {
        assert!(HsCube::from_vec(2, 2, 2, vec![0.0; 7]).is_err());
        assert!(HsCube::from_vec(0, 2, 2, Vec::new()).is_err());
        assert_eq!(
            HsCube::from_vec(1, 1, 1, vec![f64::NAN])
                .unwrap_err()
                .category(),
            "parameter"
        );
        assert!(Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }
}

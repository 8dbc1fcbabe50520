//! Dense complex matrix stored column-major.
//!
//! Column-major storage makes `as_slice()` equal to `vec(A)` (columns stacked),
//! which is the vectorization used by the single-CP OTFS framing and by the
//! delay-Doppler operator indexing (`index = row + rows * col`).

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use num_traits::{Float, Zero};

use crate::error::{Error, Result};
use crate::fft::Fft;

#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::zero(); rows * cols],
        }
    }

    pub fn from_col_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for c in 0..cols {
            for r in 0..rows {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_elem(rows: usize, cols: usize, v: Complex64) -> Self {
        Self {
            rows,
            cols,
            data: vec![v; rows * cols],
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r + self.rows * c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r + self.rows * c] = v;
    }

    #[inline]
    pub fn get_mut(&mut self, r: usize, c: usize) -> &mut Complex64 {
        &mut self.data[r + self.rows * c]
    }

    pub fn col(&self, c: usize) -> &[Complex64] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    pub fn col_mut(&mut self, c: usize) -> &mut [Complex64] {
        &mut self.data[c * self.rows..(c + 1) * self.rows]
    }

    /// Column-major contents, i.e. `vec(A)`.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn energy(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn scale(&mut self, a: Complex64) {
        self.data.iter_mut().for_each(|v| *v *= a);
    }

    pub fn ensure_shape(&self, shape: (usize, usize)) -> Result<()> {
        if self.shape() != shape {
            return Err(Error::ShapeMismatch {
                expected: shape,
                got: self.shape(),
            });
        }
        Ok(())
    }

    /// Largest elementwise `|a - b|`; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.shape() != other.shape() {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Apply a unitary forward or inverse DFT to every column.
    pub(crate) fn transform_cols(&mut self, fft: &Fft, inverse: bool) {
        debug_assert_eq!(fft.len(), self.rows);
        for c in 0..self.cols {
            let col = self.col_mut(c);
            if inverse {
                fft.inverse_unitary(col);
            } else {
                fft.forward_unitary(col);
            }
        }
    }

    /// Apply a unitary forward or inverse DFT to every row.
    pub(crate) fn transform_rows(&mut self, fft: &Fft, inverse: bool) {
        debug_assert_eq!(fft.len(), self.cols);
        let mut buf = vec![Complex64::zero(); self.cols];
        for r in 0..self.rows {
            for (c, b) in buf.iter_mut().enumerate() {
                *b = self.data[r + self.rows * c];
            }
            if inverse {
                fft.inverse_unitary(&mut buf);
            } else {
                fft.forward_unitary(&mut buf);
            }
            for (c, b) in buf.iter().enumerate() {
                self.data[r + self.rows * c] = *b;
            }
        }
    }
}

use num_complex::Complex;
use num_traits::{One, Zero};

use super::is_finite;
use super::vector::{dot, ComplexVector};
use crate::{Error, Real, Result};

/// Row-major dense complex matrix with positive dimensions and finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix<T> {
    rows: usize,
    cols: usize,
    entries: Vec<Complex<T>>,
}

impl<T: Real> ComplexMatrix<T> {
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex<T>>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDimensions(format!(
                "matrix must be non-empty, got {rows}x{cols}"
            )));
        }
        if entries.len() != rows * cols {
            return Err(Error::dim("matrix entries", rows * cols, entries.len()));
        }
        if !entries.iter().all(is_finite) {
            return Err(Error::NonFinite("matrix entries"));
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_rows(rows: Vec<Vec<Complex<T>>>) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != n_cols) {
            return Err(Error::dim("matrix row length", n_cols, bad.len()));
        }
        Self::new(n_rows, n_cols, rows.into_iter().flatten().collect())
    }

    /// Stacks the given vectors as columns.
    pub fn from_columns(columns: &[ComplexVector<T>]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, ComplexVector::len);
        if let Some(bad) = columns.iter().find(|c| c.len() != rows) {
            return Err(Error::dim("matrix column length", rows, bad.len()));
        }
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            entries.extend(columns.iter().map(|c| c[r]));
        }
        Self::new(rows, cols, entries)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix must be non-empty");
        Self {
            rows,
            cols,
            entries: vec![Complex::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = Complex::one();
        }
        m
    }

    pub fn diagonal(values: &[T]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m.entries[i * n + i] = Complex::new(v, T::zero());
        }
        m
    }

    pub(crate) fn from_vec_unchecked(rows: usize, cols: usize, entries: Vec<Complex<T>>) -> Self {
        debug_assert_eq!(entries.len(), rows * cols);
        Self {
            rows,
            cols,
            entries,
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
    pub fn get(&self, r: usize, c: usize) -> Complex<T> {
        self.entries[r * self.cols + c]
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[Complex<T>] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_iter(&self) -> std::slice::ChunksExact<'_, Complex<T>> {
        self.entries.chunks_exact(self.cols)
    }

    pub fn column(&self, c: usize) -> ComplexVector<T> {
        ComplexVector::from_vec_unchecked((0..self.rows).map(|r| self.get(r, c)).collect())
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.entries
    }

    pub fn conj_transpose(&self) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len());
        for c in 0..self.cols {
            entries.extend((0..self.rows).map(|r| self.get(r, c).conj()));
        }
        Self::from_vec_unchecked(self.cols, self.rows, entries)
    }

    pub fn frobenius_norm(&self) -> T {
        self.entries.iter().map(|c| c.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::dim(
                "matrix subtraction",
                self.rows * self.cols,
                other.rows * other.cols,
            ));
        }
        Ok(Self::from_vec_unchecked(
            self.rows,
            self.cols,
            self.entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        ))
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::dim("matmul", self.cols, other.rows));
        }
        let mut entries = vec![Complex::zero(); self.rows * other.cols];
        for r in 0..self.rows {
            for (i, a) in self.row(r).iter().enumerate() {
                let out = &mut entries[r * other.cols..(r + 1) * other.cols];
                for (o, b) in out.iter_mut().zip(other.row(i)) {
                    *o += a * b;
                }
            }
        }
        Ok(Self::from_vec_unchecked(self.rows, other.cols, entries))
    }

    /// Largest absolute deviation from Hermitian symmetry.
    pub fn hermitian_defect(&self) -> T {
        let mut worst = T::zero();
        for r in 0..self.rows.min(self.cols) {
            for c in 0..self.cols.min(self.rows) {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }
}

/// `A v`.
pub fn matvec<T: Real>(a: &ComplexMatrix<T>, v: &ComplexVector<T>) -> Result<ComplexVector<T>> {
    if a.cols() != v.len() {
        return Err(Error::dim("matvec", a.cols(), v.len()));
    }
    Ok(ComplexVector::from_vec_unchecked(
        a.row_iter().map(|row| dot(row, v.as_slice())).collect(),
    ))
}

use std::ops::Index;

use num_complex::Complex;
use num_traits::Zero;

use super::is_finite;
use crate::{Error, Real, Result};

/// Non-empty vector of finite complex entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector<T> {
    entries: Vec<Complex<T>>,
}

impl<T: Real> ComplexVector<T> {
    pub fn new(entries: Vec<Complex<T>>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidDimensions(
                "vector length must be positive".into(),
            ));
        }
        if !entries.iter().all(is_finite) {
            return Err(Error::NonFinite("vector entries"));
        }
        Ok(Self { entries })
    }

    /// Builds a vector from real parts only.
    pub fn from_reals(values: &[T]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex::new(v, T::zero())).collect())
    }

    pub fn zeros(len: usize) -> Self {
        assert!(len > 0, "vector length must be positive");
        Self {
            entries: vec![Complex::zero(); len],
        }
    }

    /// Unit impulse at `index`.
    pub fn impulse(len: usize, index: usize) -> Self {
        let mut v = Self::zeros(len);
        v.entries[index] = Complex::new(T::one(), T::zero());
        v
    }

    /// Callers must uphold the non-empty invariant; finiteness is checked where
    /// a pipeline can actually produce NaN (the refinement loop).
    pub(crate) fn from_vec_unchecked(entries: Vec<Complex<T>>) -> Self {
        debug_assert!(!entries.is_empty());
        Self { entries }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex<T>> {
        self.entries.iter()
    }

    pub fn into_vec(self) -> Vec<Complex<T>> {
        self.entries
    }

    pub fn norm_sqr(&self) -> T {
        self.entries.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(is_finite)
    }

    pub fn scale(&self, factor: Complex<T>) -> Self {
        Self::from_vec_unchecked(self.entries.iter().map(|&c| c * factor).collect())
    }

    pub fn scale_real(&self, factor: T) -> Self {
        Self::from_vec_unchecked(self.entries.iter().map(|&c| c * factor).collect())
    }

    pub fn conj(&self) -> Self {
        Self::from_vec_unchecked(self.entries.iter().map(|c| c.conj()).collect())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "vector subtraction", |a, b| a - b)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "vector addition", |a, b| a + b)
    }

    /// Entrywise (Hadamard) product.
    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "hadamard product", |a, b| a * b)
    }

    /// Entrywise squared modulus.
    pub fn intensities(&self) -> Vec<T> {
        self.entries.iter().map(|c| c.norm_sqr()).collect()
    }

    fn zip_with(
        &self,
        other: &Self,
        context: &'static str,
        f: impl Fn(Complex<T>, Complex<T>) -> Complex<T>,
    ) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::dim(context, self.len(), other.len()));
        }
        Ok(Self::from_vec_unchecked(
            self.entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }
}

impl<T> Index<usize> for ComplexVector<T> {
    type Output = Complex<T>;

    fn index(&self, index: usize) -> &Complex<T> {
        &self.entries[index]
    }
}

impl<'a, T> IntoIterator for &'a ComplexVector<T> {
    type Item = &'a Complex<T>;
    type IntoIter = std::slice::Iter<'a, Complex<T>>;

    fn into_iter(self) -> Self::IntoIter {
        self.entries.iter()
    }
}

/// `u^H v`.
pub fn hermitian_inner<T: Real>(u: &ComplexVector<T>, v: &ComplexVector<T>) -> Result<Complex<T>> {
    if u.len() != v.len() {
        return Err(Error::dim("hermitian_inner", u.len(), v.len()));
    }
    Ok(dot_conj(u.as_slice(), v.as_slice()))
}

#[inline]
pub(crate) fn dot_conj<T: Real>(u: &[Complex<T>], v: &[Complex<T>]) -> Complex<T> {
    u.iter()
        .zip(v)
        .fold(Complex::zero(), |acc, (a, b)| acc + a.conj() * b)
}

#[inline]
pub(crate) fn dot<T: Real>(u: &[Complex<T>], v: &[Complex<T>]) -> Complex<T> {
    u.iter()
        .zip(v)
        .fold(Complex::zero(), |acc, (a, b)| acc + a * b)
}

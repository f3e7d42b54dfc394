//! Normalized DFT, its low-frequency truncation, and circular convolution.
//!
//! The DFT is unitary: `F[a, b] = n^(-1/2) exp(-2πj ab / n)`. With this
//! normalization the convolution theorem reads
//! `dft(x ⊛ h) = √n · dft(x) ⊙ dft(h)`.

use num_complex::Complex;
use num_traits::Zero;

use super::vector::ComplexVector;
use crate::{Error, Real, Result};

fn twiddles<T: Real>(n: usize) -> Vec<Complex<T>> {
    let step = -2.0 * std::f64::consts::PI / n as f64;
    (0..n)
        .map(|i| {
            let (s, c) = (step * i as f64).sin_cos();
            Complex::new(T::of(c), T::of(s))
        })
        .collect()
}

fn dft_rows<T: Real>(v: &[Complex<T>], rows: usize) -> Vec<Complex<T>> {
    let n = v.len();
    let table = twiddles::<T>(n);
    let scale = T::of((n as f64).sqrt().recip());
    (0..rows)
        .map(|a| {
            let acc = v
                .iter()
                .enumerate()
                .fold(Complex::zero(), |acc, (b, &x)| acc + x * table[(a * b) % n]);
            acc * scale
        })
        .collect()
}

/// Unitary DFT (direct O(n²) evaluation).
pub fn dft<T: Real>(v: &ComplexVector<T>) -> ComplexVector<T> {
    ComplexVector::from_vec_unchecked(dft_rows(v.as_slice(), v.len()))
}

/// First `m` rows of the unitary DFT applied to `v`.
pub fn partial_dft<T: Real>(v: &ComplexVector<T>, m: usize) -> Result<ComplexVector<T>> {
    if m == 0 || m > v.len() {
        return Err(Error::InvalidDimensions(format!(
            "partial DFT needs 1 <= m <= n, got m={m}, n={}",
            v.len()
        )));
    }
    Ok(ComplexVector::from_vec_unchecked(dft_rows(v.as_slice(), m)))
}

/// `out[t] = Σ_τ x[τ] h[(t - τ) mod n]`.
pub fn circular_convolve<T: Real>(
    x: &ComplexVector<T>,
    h: &ComplexVector<T>,
) -> Result<ComplexVector<T>> {
    let n = x.len();
    if h.len() != n {
        return Err(Error::dim("circular_convolve", n, h.len()));
    }
    let out = (0..n)
        .map(|t| {
            (0..n).fold(Complex::zero(), |acc, tau| {
                acc + x[tau] * h[(t + n - tau) % n]
            })
        })
        .collect();
    Ok(ComplexVector::from_vec_unchecked(out))
}

//! Spectral initialization: leading eigenvectors of the data-weighted
//! correlation matrices `H_g = (1/m) Σ y[ℓ] b̂_ℓ b̂_ℓ^H` and `H_z` (same with `ĉ_ℓ`).

use num_complex::Complex;
use num_traits::Zero;

use crate::complex::{sample_complex_gaussian, ComplexMatrix, ComplexVector, SeededRng};
use crate::{Error, Real, Result};

/// Which unknown a correlation matrix estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Kernel,
    Signal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix<T> {
    pub h: ComplexMatrix<T>,
    pub source: Side,
    /// Upper bound on `-λ_min(H)`; zero whenever every weight is nonnegative.
    pub psd_shift: T,
}

impl<T: Real> CorrelationMatrix<T> {
    pub fn dim(&self) -> usize {
        self.h.rows()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenEstimate<T> {
    pub eigenvalue: T,
    pub eigenvector: ComplexVector<T>,
    pub iterations_used: usize,
}

/// Output of the initializer: `g0 = w_g`, `z0 = √(λ_z/2) w_z`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralInit<T> {
    pub g0: ComplexVector<T>,
    pub z0: ComplexVector<T>,
    pub lambda_g: T,
    pub lambda_z: T,
}

/// `(1/m) Σ_ℓ y[ℓ] a_ℓ a_ℓ^H`, where `a_ℓ^H` is row `ℓ` of `rows`.
pub fn build_correlation<T: Real>(
    y: &[T],
    rows: &ComplexMatrix<T>,
    source: Side,
) -> Result<CorrelationMatrix<T>> {
    let m = rows.rows();
    if y.len() != m {
        return Err(Error::dim("build_correlation", m, y.len()));
    }
    if !y.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("measurements"));
    }
    let d = rows.cols();
    let mut acc = vec![Complex::<T>::zero(); d * d];
    let mut negative_mass = T::zero();
    for (row, &weight) in rows.row_iter().zip(y) {
        if weight.is_zero() {
            continue;
        }
        if weight < T::zero() {
            negative_mass += -weight * row.iter().map(|c| c.norm_sqr()).sum::<T>();
        }
        // a_ℓ = conj(row), so (a a^H)[p, q] = conj(row[p]) row[q]
        for (p, rp) in row.iter().enumerate() {
            let left = rp.conj() * weight;
            for (q, rq) in row.iter().enumerate().skip(p) {
                acc[p * d + q] += left * rq;
            }
        }
    }
    let inv_m = T::of(m as f64).recip();
    for p in 0..d {
        acc[p * d + p] = Complex::new(acc[p * d + p].re * inv_m, T::zero());
        for q in p + 1..d {
            let v = acc[p * d + q] * inv_m;
            acc[p * d + q] = v;
            acc[q * d + p] = v.conj();
        }
    }
    Ok(CorrelationMatrix {
        h: ComplexMatrix::from_vec_unchecked(d, d, acc),
        source,
        psd_shift: negative_mass * inv_m,
    })
}

fn apply<T: Real>(h: &ComplexMatrix<T>, shift: T, w: &[Complex<T>]) -> Vec<Complex<T>> {
    h.row_iter()
        .zip(w)
        .map(|(row, wi)| {
            row.iter()
                .zip(w)
                .fold(Complex::<T>::zero(), |acc, (a, b)| acc + a * b)
                + wi * shift
        })
        .collect()
}

fn normalize<T: Real>(v: Vec<Complex<T>>) -> Option<Vec<Complex<T>>> {
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<T>().sqrt();
    if !(norm > T::zero()) || !norm.is_finite() {
        return None;
    }
    let inv = norm.recip();
    Some(v.into_iter().map(|c| c * inv).collect())
}

fn rayleigh<T: Real>(h: &ComplexMatrix<T>, w: &[Complex<T>]) -> T {
    apply(h, T::zero(), w)
        .iter()
        .zip(w)
        .fold(Complex::<T>::zero(), |acc, (hw, wi)| acc + wi.conj() * hw)
        .re
}

/// Leading (largest algebraic) eigenpair by `iters` multiply-normalize rounds
/// from a random complex Gaussian start.
///
/// Iterates on `H + psd_shift·I`, which is positive semidefinite, so the
/// dominant eigenvalue is the largest one even when noisy weights make `H`
/// indefinite.
pub fn power_iteration<T: Real>(
    h: &CorrelationMatrix<T>,
    iters: usize,
    rng: &mut SeededRng,
) -> Result<EigenEstimate<T>> {
    power_iteration_until(h, iters, None, rng)
}

/// [`power_iteration`] with an optional early exit once the Rayleigh quotient
/// changes by less than `tol` relative to its magnitude.
pub fn power_iteration_until<T: Real>(
    h: &CorrelationMatrix<T>,
    iters: usize,
    tol: Option<T>,
    rng: &mut SeededRng,
) -> Result<EigenEstimate<T>> {
    if iters == 0 {
        return Err(Error::Config(
            "power iteration needs at least one round".into(),
        ));
    }
    if h.h.frobenius_norm().is_zero() {
        return Err(Error::DegenerateSpectrum("correlation matrix is zero"));
    }
    let start = sample_complex_gaussian::<T>(rng, h.dim()).into_vec();
    let mut w = normalize(start).ok_or(Error::DegenerateSpectrum("zero start vector"))?;
    let mut previous = rayleigh(&h.h, &w);
    let mut used = 0;
    for _ in 0..iters {
        w = normalize(apply(&h.h, h.psd_shift, &w))
            .ok_or(Error::DegenerateSpectrum("iterate collapsed to zero"))?;
        used += 1;
        if let Some(tol) = tol {
            let current = rayleigh(&h.h, &w);
            if (current - previous).abs() <= tol * current.abs() {
                break;
            }
            previous = current;
        }
    }
    Ok(EigenEstimate {
        eigenvalue: rayleigh(&h.h, &w),
        eigenvector: ComplexVector::from_vec_unchecked(w),
        iterations_used: used,
    })
}

/// Computes `(g0, z0)` from the measurements.
///
/// A negative `λ_z` (only possible with noisy data) is clamped to zero in the scaling.
pub fn initialize<T: Real>(
    y: &[T],
    b_hat: &ComplexMatrix<T>,
    c_hat: &ComplexMatrix<T>,
    iters: usize,
    rng: &mut SeededRng,
) -> Result<SpectralInit<T>> {
    if b_hat.rows() != c_hat.rows() {
        return Err(Error::dim("initialize rows", b_hat.rows(), c_hat.rows()));
    }
    let h_g = build_correlation(y, b_hat, Side::Kernel)?;
    let h_z = build_correlation(y, c_hat, Side::Signal)?;
    let kernel = power_iteration(&h_g, iters, rng)?;
    let signal = power_iteration(&h_z, iters, rng)?;
    let scale = (signal.eigenvalue.max(T::zero()) / T::of(2.0)).sqrt();
    Ok(SpectralInit {
        g0: kernel.eigenvector,
        z0: signal.eigenvector.scale_real(scale),
        lambda_g: kernel.eigenvalue,
        lambda_z: signal.eigenvalue,
    })
}

//! Dense complex vectors and matrices plus the handful of kernels the solver needs.

mod fourier;
mod matrix;
mod rng;
mod vector;

pub use fourier::{circular_convolve, dft, partial_dft};
pub use matrix::{matvec, ComplexMatrix};
pub(crate) use rng::stream_key;
pub use rng::{sample_complex_gaussian, SeededRng};
pub use vector::{hermitian_inner, ComplexVector};

pub use num_complex::Complex;

#[inline]
pub(crate) fn is_finite<T: crate::Real>(c: &Complex<T>) -> bool {
    c.re.is_finite() && c.im.is_finite()
}
